//! Multi-view label fusion: radius-gated nearest-neighbor vote transfer
//! from projected fragments into a per-point accumulator, then a
//! deterministic argmax.
//!
//! Votes are plain integer counts. Each fragment point votes on exactly one
//! scene point, its nearest, and only when the distance is within the
//! radius gate (inclusive). Ties in the final argmax resolve to the lowest
//! class id so that frame order can never change the result.

use std::io::Read;
use std::path::Path;

use crate::class_table::ClassTable;
use crate::cloud::ScenePointCloud;
use crate::error::{Error, Result};
use crate::frame::FrameRecord;
use crate::projection::{frame_to_fragment, LabeledFragment};
use crate::spatial::SceneIndex;

/// Dense N x m per-point, per-class vote counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteAccumulator {
    counts: Vec<u32>,
    n_points: usize,
    n_classes: usize,
}

impl VoteAccumulator {
    pub fn new(n_points: usize, n_classes: usize) -> Self {
        assert!(n_classes >= 1, "accumulator needs at least one class");
        Self { counts: vec![0; n_points * n_classes], n_points, n_classes }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    #[inline]
    pub fn count(&self, point: usize, class: u32) -> u32 {
        self.counts[point * self.n_classes + class as usize]
    }

    #[inline]
    pub fn row(&self, point: usize) -> &[u32] {
        &self.counts[point * self.n_classes..(point + 1) * self.n_classes]
    }

    #[inline]
    pub fn add_vote(&mut self, point: usize, class: u32) {
        self.counts[point * self.n_classes + class as usize] += 1;
    }

    /// Sum of every entry.
    pub fn total_votes(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// Vote totals per class.
    pub fn class_totals(&self) -> Vec<u64> {
        let mut totals = vec![0u64; self.n_classes];
        for row in self.counts.chunks_exact(self.n_classes) {
            for (t, &c) in totals.iter_mut().zip(row) {
                *t += c as u64;
            }
        }
        totals
    }

    /// Writes the binary dump: magic, point count, class count, then
    /// row-major little-endian 32-bit counts.
    pub fn dump(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = Vec::with_capacity(20 + self.counts.len() * 4);
        out.extend_from_slice(ACC_MAGIC);
        out.extend_from_slice(&(self.n_points as u64).to_le_bytes());
        out.extend_from_slice(&(self.n_classes as u32).to_le_bytes());
        for &c in &self.counts {
            out.extend_from_slice(&c.to_le_bytes());
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = std::io::BufReader::new(file);
        let mut magic = [0u8; 8];
        reader
            .read_exact(&mut magic)
            .map_err(|e| Error::io(path, e))?;
        if magic != *ACC_MAGIC {
            return Err(Error::format("accumulator dump", Some(path.into()), "bad magic"));
        }
        let mut u64buf = [0u8; 8];
        reader.read_exact(&mut u64buf).map_err(|e| Error::io(path, e))?;
        let n_points = u64::from_le_bytes(u64buf) as usize;
        let mut u32buf = [0u8; 4];
        reader.read_exact(&mut u32buf).map_err(|e| Error::io(path, e))?;
        let n_classes = u32::from_le_bytes(u32buf) as usize;
        let mut counts = vec![0u32; n_points * n_classes];
        for c in counts.iter_mut() {
            reader.read_exact(&mut u32buf).map_err(|e| Error::io(path, e))?;
            *c = u32::from_le_bytes(u32buf);
        }
        Ok(Self { counts, n_points, n_classes })
    }
}

const ACC_MAGIC: &[u8; 8] = b"VOTACC01";

/// Fusion parameters. Defaults: 0.1 m radius, every pixel, every 50th frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig {
    pub radius_m: f64,
    pub pixel_stride: u32,
    pub frame_stride: u32,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self { radius_m: 0.1, pixel_stride: 1, frame_stride: 50 }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        let radius_valid = self.radius_m.is_finite() && self.radius_m > 0.0;
        if !radius_valid {
            return Err(Error::InvalidData(format!("radius must be positive, got {}", self.radius_m)));
        }
        if self.pixel_stride < 1 || self.frame_stride < 1 {
            return Err(Error::InvalidData("strides must be at least 1".into()));
        }
        Ok(())
    }
}

/// Builds the exact nearest-neighbor index over the cloud.
pub fn build_spatial_index(cloud: &ScenePointCloud) -> SceneIndex {
    SceneIndex::build(cloud)
}

/// Transfers one fragment's votes into the accumulator: each fragment point
/// votes its label onto the nearest scene point when the distance is within
/// `radius_m` (inclusive). Returns the number of votes that passed the gate.
pub fn transfer_votes(
    fragment: &LabeledFragment,
    index: &SceneIndex,
    acc: &mut VoteAccumulator,
    radius_m: f64,
) -> Result<usize> {
    if acc.n_points() != index.len() {
        return Err(Error::DimensionMismatch(format!(
            "accumulator holds {} points, index {}",
            acc.n_points(),
            index.len()
        )));
    }
    let radius_sq = radius_m * radius_m;
    let mut transferred = 0usize;
    for (p, &label) in fragment.points.iter().zip(&fragment.labels) {
        if label as usize >= acc.n_classes() {
            return Err(Error::LabelOutOfRange {
                value: label,
                limit: acc.n_classes() as u32,
                ignore: acc.n_classes() as u32,
            });
        }
        let nearest = index.nearest(p);
        if nearest.dist_sq <= radius_sq {
            acc.add_vote(nearest.index, label);
            transferred += 1;
        }
    }
    Ok(transferred)
}

/// Elementwise sum of two accumulators of identical shape.
pub fn merge_accumulators(a: &VoteAccumulator, b: &VoteAccumulator) -> Result<VoteAccumulator> {
    if a.n_points != b.n_points || a.n_classes != b.n_classes {
        return Err(Error::DimensionMismatch(format!(
            "cannot merge {}x{} with {}x{} accumulators",
            a.n_points, a.n_classes, b.n_points, b.n_classes
        )));
    }
    let mut out = a.clone();
    for (o, &v) in out.counts.iter_mut().zip(&b.counts) {
        *o += v;
    }
    Ok(out)
}

/// Per-point argmax. All-zero rows get `ignore_id`; ties resolve to the
/// lowest class id.
pub fn fuse_labels(acc: &VoteAccumulator, ignore_id: u32) -> Vec<u32> {
    let mut labels = Vec::with_capacity(acc.n_points);
    for row in acc.counts.chunks_exact(acc.n_classes) {
        let mut best_class = ignore_id;
        let mut best_count = 0u32;
        for (class, &count) in row.iter().enumerate() {
            if count > best_count {
                best_count = count;
                best_class = class as u32;
            }
        }
        labels.push(best_class);
    }
    labels
}

/// Summary of one fusion run.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionStats {
    pub frames_used: usize,
    pub fragment_points: u64,
    pub transferred_votes: u64,
    pub per_class_votes: Vec<u64>,
    pub ignore_fraction: f64,
}

#[derive(Debug)]
pub struct FusionOutcome {
    pub labels: Vec<u32>,
    pub accumulator: VoteAccumulator,
    pub stats: FusionStats,
}

/// Runs the full fusion over the frames whose index is a multiple of
/// `cfg.frame_stride`. Every considered frame must carry a mask.
///
/// The result is independent of the order of `frames`: vote additions
/// commute and selection is by frame index.
pub fn run_fusion(
    cloud: &ScenePointCloud,
    frames: &[FrameRecord],
    ct: &ClassTable,
    cfg: &FusionConfig,
) -> Result<FusionOutcome> {
    cfg.validate()?;
    let index = build_spatial_index(cloud);
    let mut acc = VoteAccumulator::new(cloud.len(), ct.len());
    let mut fragment_points = 0u64;
    let mut transferred = 0u64;
    let mut frames_used = 0usize;

    for frame in frames {
        if frame.frame_index % cfg.frame_stride != 0 {
            continue;
        }
        let mask = frame.mask.as_ref().ok_or_else(|| {
            Error::InvalidData(format!("frame {} carries no mask", frame.frame_index))
        })?;
        let fragment = frame_to_fragment(frame, mask, cfg.pixel_stride, ct)?;
        fragment_points += fragment.len() as u64;
        transferred += transfer_votes(&fragment, &index, &mut acc, cfg.radius_m)? as u64;
        frames_used += 1;
    }

    let labels = fuse_labels(&acc, ct.ignore_id());
    let ignored = labels.iter().filter(|&&l| l == ct.ignore_id()).count();
    let stats = FusionStats {
        frames_used,
        fragment_points,
        transferred_votes: transferred,
        per_class_votes: acc.class_totals(),
        ignore_fraction: ignored as f64 / labels.len() as f64,
    };
    Ok(FusionOutcome { labels, accumulator: acc, stats })
}
