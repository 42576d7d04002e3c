//! The pluggable 2D segmenter contract.
//!
//! Two call shapes cover the supported strategies: `query_labels` asks for
//! a frame's full semantic mask (how externally produced zero-shot model
//! outputs enter the pipeline), and `query_prompt` asks for a class-
//! agnostic mask from positive/negative point prompts. Implementations
//! answer one or both. Candidates come back ordered by descending
//! confidence.

mod mask_dir;
mod oracle;
mod prompted;

pub use mask_dir::{load_mask_directory, MaskDirSegmenter};
pub use oracle::{oracle_segmenter, OracleSegmenter};
pub use prompted::{prompted_oracle_segmenter, GranularityMode, PromptedOracleSegmenter};

use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::prompting::PromptPoint;
use crate::raster::LabelMask;

/// Point prompts for one query: at least one positive pixel inside the
/// target, plus negative pixels known to lie outside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub positives: Vec<PromptPoint>,
    pub negatives: Vec<PromptPoint>,
}

/// A candidate mask: binary for prompted queries, labeled for full-frame
/// queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CandidateMask {
    Binary(BinaryMask),
    Labeled(LabelMask),
}

impl CandidateMask {
    pub fn width(&self) -> u32 {
        match self {
            CandidateMask::Binary(m) => m.width(),
            CandidateMask::Labeled(m) => m.width(),
        }
    }

    pub fn height(&self) -> u32 {
        match self {
            CandidateMask::Binary(m) => m.height(),
            CandidateMask::Labeled(m) => m.height(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskCandidate {
    pub mask: CandidateMask,
    pub confidence: f64,
}

/// A successful query's candidates, ordered by descending confidence.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmenterOutput {
    pub candidates: Vec<MaskCandidate>,
}

impl SegmenterOutput {
    pub fn new(mut candidates: Vec<MaskCandidate>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::InvalidData("segmenter output needs at least one candidate".into()));
        }
        if candidates.iter().any(|c| !c.confidence.is_finite()) {
            return Err(Error::InvalidData("candidate confidence must be finite".into()));
        }
        candidates.sort_by(|a, b| b.confidence.partial_cmp(&a.confidence).expect("finite"));
        Ok(Self { candidates })
    }

    /// The highest-confidence candidate.
    pub fn best(&self) -> &MaskCandidate {
        &self.candidates[0]
    }
}

/// The 2D segmenter contract.
pub trait Segmenter {
    /// Full per-pixel class labels for one frame.
    fn query_labels(&self, frame_index: u32) -> Result<SegmenterOutput>;

    /// A class-agnostic mask from point prompts on one frame.
    fn query_prompt(&self, frame_index: u32, prompt: &Prompt) -> Result<SegmenterOutput>;
}

/// Degradations applied by the noisy oracle, modeling the failure modes of
/// real segmenters: dropped detections, over/under-sized masks, and wrong
/// classes. Negative `morph_radius_px` erodes masks, positive dilates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub morph_radius_px: i32,
    pub drop_instance_prob: f64,
    pub mislabel_prob: f64,
    pub rng_seed: u64,
}

impl NoiseSpec {
    pub fn none(rng_seed: u64) -> Self {
        Self { morph_radius_px: 0, drop_instance_prob: 0.0, mislabel_prob: 0.0, rng_seed }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("drop_instance_prob", self.drop_instance_prob),
            ("mislabel_prob", self.mislabel_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidData(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        Ok(())
    }

    pub fn is_none(&self) -> bool {
        self.morph_radius_px == 0 && self.drop_instance_prob == 0.0 && self.mislabel_prob == 0.0
    }
}

/// Splitmix-style stream derivation so per-frame and per-instance draws
/// are independent of query order.
pub(crate) fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
