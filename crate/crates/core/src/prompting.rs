//! Sparse point prompts and prompt augmentation.
//!
//! One pixel is sampled per class present in a ground-truth mask; querying
//! a prompted segmenter for one class uses that class's pixel as the
//! positive point and every other class's pixel as a negative point. A
//! second positive point can be added from the segmenter's initial mask by
//! one of three strategies: uniform random, maximum pixel distance from
//! the anchor, or maximum absolute difference in local color entropy.

use std::collections::BTreeMap;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::class_table::ClassTable;
use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::raster::{ColorImage, LabelMask};
use crate::segmenter::{CandidateMask, Prompt, Segmenter};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptRole {
    Positive,
    Negative,
}

/// One annotated pixel handed to a prompted segmenter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptPoint {
    pub u: u32,
    pub v: u32,
    pub class_id: u32,
    pub role: PromptRole,
}

/// At most one annotated pixel per class present in a frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    width: u32,
    height: u32,
    points: BTreeMap<u32, (u32, u32)>,
}

impl PromptSet {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height, points: BTreeMap::new() }
    }

    pub fn insert(&mut self, class_id: u32, u: u32, v: u32) {
        self.points.insert(class_id, (u, v));
    }

    pub fn classes(&self) -> impl Iterator<Item = u32> + '_ {
        self.points.keys().copied()
    }

    pub fn pixel(&self, class_id: u32) -> Option<(u32, u32)> {
        self.points.get(&class_id).copied()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }
}

/// Samples one uniformly random pixel per class present in the mask.
/// Deterministic for a fixed seed. Errors when the mask has no labeled
/// pixel.
pub fn sample_sparse_prompts(gt_mask: &LabelMask, ct: &ClassTable, seed: u64) -> Result<PromptSet> {
    let mut per_class: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
    for v in 0..gt_mask.height() {
        for u in 0..gt_mask.width() {
            let label = gt_mask.get(u, v);
            if label != ct.ignore_id() {
                per_class.entry(label).or_default().push((u, v));
            }
        }
    }
    if per_class.is_empty() {
        return Err(Error::EmptyMask);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = PromptSet::new(gt_mask.width(), gt_mask.height());
    for (class, pixels) in &per_class {
        let (u, v) = pixels[rng.random_range(0..pixels.len())];
        set.insert(*class, u, v);
    }
    Ok(set)
}

/// Splits a prompt set for one target class: that class's pixel becomes
/// the positive point, every other annotated pixel a negative point.
pub fn assemble_class_prompt(
    ps: &PromptSet,
    target: u32,
) -> Result<(Vec<PromptPoint>, Vec<PromptPoint>)> {
    let (u, v) = ps
        .pixel(target)
        .ok_or_else(|| Error::InvalidData(format!("class {target} has no annotated pixel")))?;
    let positives = vec![PromptPoint { u, v, class_id: target, role: PromptRole::Positive }];
    let negatives = ps
        .classes()
        .filter(|&c| c != target)
        .map(|c| {
            let (u, v) = ps.pixel(c).expect("class listed by iterator");
            PromptPoint { u, v, class_id: c, role: PromptRole::Negative }
        })
        .collect();
    Ok((positives, negatives))
}

/// Uniformly random member of the mask; deterministic per seed.
pub fn augment_random(initial: &BinaryMask, seed: u64) -> Result<(u32, u32)> {
    let pixels: Vec<(u32, u32)> = initial.iter_pixels().collect();
    if pixels.is_empty() {
        return Err(Error::EmptyMask);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(pixels[rng.random_range(0..pixels.len())])
}

/// The mask pixel farthest from `anchor` in Euclidean pixel distance.
/// Ties resolve in row-major order (smallest v, then smallest u).
pub fn augment_max_distance(initial: &BinaryMask, anchor: (u32, u32)) -> Result<(u32, u32)> {
    let mut best: Option<((u32, u32), i64)> = None;
    for (u, v) in initial.iter_pixels() {
        let du = u as i64 - anchor.0 as i64;
        let dv = v as i64 - anchor.1 as i64;
        let d2 = du * du + dv * dv;
        if best.is_none_or(|(_, bd)| d2 > bd) {
            best = Some(((u, v), d2));
        }
    }
    best.map(|(p, _)| p).ok_or(Error::EmptyMask)
}

/// Joint RGB bins: 3 bits per channel, 512 bins total.
#[inline]
fn rgb_bin(rgb: [u8; 3]) -> usize {
    (((rgb[0] >> 5) as usize) << 6) | (((rgb[1] >> 5) as usize) << 3) | ((rgb[2] >> 5) as usize)
}

pub const ENTROPY_WINDOW: u32 = 9;
pub const ENTROPY_BINS: usize = 512;

/// Shannon entropy (bits) of the joint RGB bin distribution in a square
/// window centered on `center`, cropped at the image borders.
pub fn region_entropy(image: &ColorImage, center: (u32, u32), window: u32) -> f64 {
    debug_assert!(window % 2 == 1, "entropy window must be odd");
    let r = (window / 2) as i64;
    let (cu, cv) = (center.0 as i64, center.1 as i64);
    let u0 = (cu - r).max(0) as u32;
    let u1 = ((cu + r).min(image.width() as i64 - 1)) as u32;
    let v0 = (cv - r).max(0) as u32;
    let v1 = ((cv + r).min(image.height() as i64 - 1)) as u32;

    let mut histogram = [0u32; ENTROPY_BINS];
    let mut total = 0u32;
    for v in v0..=v1 {
        for u in u0..=u1 {
            histogram[rgb_bin(image.get(u, v))] += 1;
            total += 1;
        }
    }
    let total = total as f64;
    let mut entropy = 0.0;
    for &count in &histogram {
        if count > 0 {
            let p = count as f64 / total;
            entropy -= p * p.log2();
        }
    }
    entropy
}

/// The mask pixel maximizing `|H(pixel) - H(anchor)|` over 9x9 entropy
/// windows. Ties resolve in row-major order.
pub fn augment_max_entropy(
    image: &ColorImage,
    initial: &BinaryMask,
    anchor: (u32, u32),
) -> Result<(u32, u32)> {
    augment_max_entropy_strided(image, initial, anchor, 1)
}

/// `augment_max_entropy` over every `stride`-th candidate row and column
/// of the initial mask; stride 1 scans every member pixel.
pub fn augment_max_entropy_strided(
    image: &ColorImage,
    initial: &BinaryMask,
    anchor: (u32, u32),
    stride: u32,
) -> Result<(u32, u32)> {
    if stride < 1 {
        return Err(Error::InvalidData("candidate stride must be at least 1".into()));
    }
    if image.width() != initial.width() || image.height() != initial.height() {
        return Err(Error::DimensionMismatch(format!(
            "image {}x{} does not match mask {}x{}",
            image.width(),
            image.height(),
            initial.width(),
            initial.height()
        )));
    }
    let anchor_entropy = region_entropy(image, anchor, ENTROPY_WINDOW);
    let mut best: Option<((u32, u32), f64)> = None;
    for (u, v) in initial.iter_pixels() {
        if !u.is_multiple_of(stride) || !v.is_multiple_of(stride) {
            continue;
        }
        let diff = (region_entropy(image, (u, v), ENTROPY_WINDOW) - anchor_entropy).abs();
        if best.is_none_or(|(_, bd)| diff > bd) {
            best = Some(((u, v), diff));
        }
    }
    best.map(|(p, _)| p).ok_or(Error::EmptyMask)
}

/// Strategy for picking the augmented second positive point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentStrategy {
    None,
    Random,
    MaxDistance,
    MaxEntropy,
}

impl FromStr for AugmentStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => AugmentStrategy::None,
            "random" => AugmentStrategy::Random,
            "max_distance" => AugmentStrategy::MaxDistance,
            "max_entropy" => AugmentStrategy::MaxEntropy,
            other => {
                return Err(Error::InvalidData(format!(
                    "unknown augmentation strategy '{other}' (expected none|random|max_distance|max_entropy)"
                )))
            }
        })
    }
}

impl std::fmt::Display for AugmentStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AugmentStrategy::None => "none",
            AugmentStrategy::Random => "random",
            AugmentStrategy::MaxDistance => "max_distance",
            AugmentStrategy::MaxEntropy => "max_entropy",
        })
    }
}

fn best_binary(output: &crate::segmenter::SegmenterOutput) -> Result<BinaryMask> {
    match &output.best().mask {
        CandidateMask::Binary(mask) => Ok(mask.clone()),
        CandidateMask::Labeled(_) => Err(Error::Unsupported(
            "prompted query returned a label mask instead of a binary mask".into(),
        )),
    }
}

/// Queries the segmenter for one class, optionally augmenting the prompt
/// with a second positive point picked on the initial mask.
///
/// The smallest-area candidate of the first query serves as the initial
/// mask. An empty initial mask falls back to the un-augmented result.
pub fn run_augmented_prompt(
    segmenter: &dyn Segmenter,
    frame_index: u32,
    image: Option<&ColorImage>,
    ps: &PromptSet,
    target: u32,
    strategy: AugmentStrategy,
    seed: u64,
) -> Result<BinaryMask> {
    let (positives, negatives) = assemble_class_prompt(ps, target)?;
    let anchor = (positives[0].u, positives[0].v);
    let base = segmenter.query_prompt(
        frame_index,
        &Prompt { positives: positives.clone(), negatives: negatives.clone() },
    )?;
    if strategy == AugmentStrategy::None {
        return best_binary(&base);
    }

    let initial = base
        .candidates
        .iter()
        .filter_map(|c| match &c.mask {
            CandidateMask::Binary(m) => Some(m),
            CandidateMask::Labeled(_) => None,
        })
        .min_by_key(|m| m.count())
        .cloned()
        .ok_or_else(|| Error::Unsupported("prompted query returned no binary candidate".into()))?;
    if initial.is_empty() {
        return best_binary(&base);
    }

    let (au, av) = match strategy {
        AugmentStrategy::None => unreachable!("handled above"),
        AugmentStrategy::Random => augment_random(&initial, seed)?,
        AugmentStrategy::MaxDistance => augment_max_distance(&initial, anchor)?,
        AugmentStrategy::MaxEntropy => {
            let image = image.ok_or_else(|| {
                Error::InvalidData("max-entropy augmentation requires a color image".into())
            })?;
            augment_max_entropy(image, &initial, anchor)?
        }
    };

    let mut augmented = positives;
    augmented.push(PromptPoint { u: au, v: av, class_id: target, role: PromptRole::Positive });
    let out = segmenter.query_prompt(frame_index, &Prompt { positives: augmented, negatives })?;
    best_binary(&out)
}
