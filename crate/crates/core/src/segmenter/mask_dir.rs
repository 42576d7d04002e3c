//! File-backed segmenter: per-frame label masks produced by an external
//! model, laid out as `<dir>/<frame_index>.pgm` with an optional
//! `<frame_index>.conf` sidecar (one confidence per line per candidate).

use std::collections::BTreeSet;
use std::path::PathBuf;

use crate::class_table::ClassTable;
use crate::error::{Error, Result};
use crate::io::pnm;
use crate::segmenter::{
    CandidateMask, MaskCandidate, Prompt, Segmenter, SegmenterOutput,
};

pub struct MaskDirSegmenter {
    dir: PathBuf,
    ct: ClassTable,
    available: BTreeSet<u32>,
}

/// Scans a directory of per-frame masks. Queries for frames without a file
/// report a missing-frame error so callers can decide to skip them.
pub fn load_mask_directory(dir: impl Into<PathBuf>, ct: &ClassTable) -> Result<MaskDirSegmenter> {
    let dir = dir.into();
    let entries = std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut available = BTreeSet::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(&dir, e))?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some(stem) = name.strip_suffix(".pgm") {
            if let Ok(idx) = stem.parse::<u32>() {
                available.insert(idx);
            }
        }
    }
    Ok(MaskDirSegmenter { dir, ct: ct.clone(), available })
}

impl MaskDirSegmenter {
    pub fn available_frames(&self) -> impl Iterator<Item = u32> + '_ {
        self.available.iter().copied()
    }

    pub fn has_frame(&self, index: u32) -> bool {
        self.available.contains(&index)
    }
}

impl Segmenter for MaskDirSegmenter {
    fn query_labels(&self, frame_index: u32) -> Result<SegmenterOutput> {
        let path = self.dir.join(format!("{frame_index}.pgm"));
        if !self.available.contains(&frame_index) {
            return Err(Error::MissingFrame { index: frame_index, path });
        }
        let mask = pnm::read_mask_pgm(&path, &self.ct)?;
        let conf_path = self.dir.join(format!("{frame_index}.conf"));
        let confidence = if conf_path.exists() {
            let text = std::fs::read_to_string(&conf_path).map_err(|e| Error::io(&conf_path, e))?;
            text.lines()
                .next()
                .and_then(|l| l.trim().parse::<f64>().ok())
                .ok_or_else(|| {
                    Error::format("confidence sidecar", Some(conf_path.clone()), "first line is not a number")
                })?
        } else {
            1.0
        };
        SegmenterOutput::new(vec![MaskCandidate {
            mask: CandidateMask::Labeled(mask),
            confidence,
        }])
    }

    fn query_prompt(&self, _frame_index: u32, _prompt: &Prompt) -> Result<SegmenterOutput> {
        Err(Error::Unsupported("mask directories hold full label masks, not prompted masks".into()))
    }
}
