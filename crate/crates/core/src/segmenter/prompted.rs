//! Prompted oracle simulating the granularity ambiguity of point-prompted
//! segmentation.
//!
//! In `Ambiguous` mode a single positive prompt on an instance yields three
//! candidates at descending confidence: the instance half (split at the
//! centroid perpendicular to the principal axis) containing the prompt,
//! the whole instance, and the instance merged with its nearest same-class
//! neighbor. Candidates containing a negative point are suppressed.
//!
//! A second positive point resolves the ambiguity when it signals that the
//! target extends beyond the initial half: either it lies outside that
//! half, or the positives' spread reaches half of the half's own principal
//! extent (an augmented point chosen on the initial mask can never leave
//! it, so spread is the observable signal). The smallest of the larger
//! candidates covering all positives is then promoted to confidence 0.9.

use std::collections::BTreeMap;

use crate::class_table::ClassTable;
use crate::error::{Error, Result};
use crate::mask::{
    component_at, connected_components, principal_extent, principal_half_containing, BinaryMask,
};
use crate::raster::LabelMask;
use crate::segmenter::{
    CandidateMask, MaskCandidate, Prompt, Segmenter, SegmenterOutput,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GranularityMode {
    /// One candidate: the exact component under the prompt, confidence 1.
    Exact,
    /// Three candidates of different granularity, as above.
    Ambiguous,
}

pub struct PromptedOracleSegmenter {
    frames: BTreeMap<u32, LabelMask>,
    mode: GranularityMode,
    ct: ClassTable,
}

pub fn prompted_oracle_segmenter(
    frames: BTreeMap<u32, LabelMask>,
    mode: GranularityMode,
    ct: &ClassTable,
) -> PromptedOracleSegmenter {
    PromptedOracleSegmenter { frames, mode, ct: ct.clone() }
}

const CONF_HALF: f64 = 0.5;
const CONF_INSTANCE: f64 = 0.4;
const CONF_MERGED: f64 = 0.3;
const CONF_PROMOTED: f64 = 0.9;
const SPREAD_FRACTION: f64 = 0.5;

impl Segmenter for PromptedOracleSegmenter {
    fn query_labels(&self, _frame_index: u32) -> Result<SegmenterOutput> {
        Err(Error::Unsupported("the prompted oracle answers point prompts only".into()))
    }

    fn query_prompt(&self, frame_index: u32, prompt: &Prompt) -> Result<SegmenterOutput> {
        let mask = self.frames.get(&frame_index).ok_or_else(|| Error::MissingFrame {
            index: frame_index,
            path: format!("oracle frame {frame_index}").into(),
        })?;
        let first = prompt
            .positives
            .first()
            .ok_or_else(|| Error::InvalidData("prompt needs at least one positive point".into()))?;
        // prompt on an unlabeled pixel has no instance to segment
        let instance = component_at(mask, first.u, first.v, &self.ct)?;

        if self.mode == GranularityMode::Exact {
            return SegmenterOutput::new(vec![MaskCandidate {
                mask: CandidateMask::Binary(instance.pixels),
                confidence: 1.0,
            }]);
        }

        let half = principal_half_containing(&instance.pixels, first.u, first.v);
        let merged = match self.nearest_same_class(mask, &instance.pixels, instance.class_id) {
            Some(other) => instance.pixels.union(&other),
            None => instance.pixels.clone(),
        };
        let mut candidates = vec![
            (half.clone(), CONF_HALF),
            (instance.pixels, CONF_INSTANCE),
            (merged, CONF_MERGED),
        ];

        candidates.retain(|(m, _)| {
            !prompt.negatives.iter().any(|n| m.contains(n.u, n.v))
        });
        if candidates.is_empty() {
            return Err(Error::InvalidData(
                "every candidate contains a negative prompt point".into(),
            ));
        }

        if prompt.positives.len() >= 2 {
            let pixels: Vec<(u32, u32)> = prompt.positives.iter().map(|p| (p.u, p.v)).collect();
            let outside = pixels.iter().any(|&(u, v)| !half.contains(u, v));
            let spread = max_pairwise_distance(&pixels);
            if outside || spread >= SPREAD_FRACTION * principal_extent(&half) {
                // promote the smallest candidate larger than the half that
                // covers every positive point
                let promote = candidates
                    .iter()
                    .enumerate()
                    .filter(|(_, (m, conf))| {
                        *conf < CONF_HALF && m.contains_all(pixels.iter().copied())
                    })
                    .min_by_key(|(_, (m, _))| m.count())
                    .map(|(i, _)| i);
                if let Some(i) = promote {
                    candidates[i].1 = CONF_PROMOTED;
                }
            }
        }

        SegmenterOutput::new(
            candidates
                .into_iter()
                .map(|(m, confidence)| MaskCandidate {
                    mask: CandidateMask::Binary(m),
                    confidence,
                })
                .collect(),
        )
    }
}

impl PromptedOracleSegmenter {
    /// The same-class component nearest by centroid, excluding `own`.
    fn nearest_same_class(
        &self,
        mask: &LabelMask,
        own: &BinaryMask,
        class_id: u32,
    ) -> Option<BinaryMask> {
        let own_centroid = centroid(own);
        connected_components(mask, &self.ct)
            .into_iter()
            .filter(|inst| inst.class_id == class_id)
            .filter(|inst| inst.pixels.first_pixel() != own.first_pixel())
            .map(|inst| {
                let c = centroid(&inst.pixels);
                let d = (c.0 - own_centroid.0).powi(2) + (c.1 - own_centroid.1).powi(2);
                (d, inst.pixels)
            })
            .min_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"))
            .map(|(_, pixels)| pixels)
    }
}

fn centroid(mask: &BinaryMask) -> (f64, f64) {
    let mut su = 0.0;
    let mut sv = 0.0;
    let mut n = 0.0;
    for (u, v) in mask.iter_pixels() {
        su += u as f64;
        sv += v as f64;
        n += 1.0;
    }
    (su / n, sv / n)
}

fn max_pairwise_distance(pixels: &[(u32, u32)]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in pixels.iter().enumerate() {
        for b in &pixels[i + 1..] {
            let d = ((a.0 as f64 - b.0 as f64).powi(2) + (a.1 as f64 - b.1 as f64).powi(2)).sqrt();
            best = best.max(d);
        }
    }
    best
}
