//! Ground-truth-backed segmenter with controllable degradation.
//!
//! Holds per-frame rendered GT label masks. Label queries re-emit the mask
//! after applying the noise model per instance: drop, morphological
//! erode/dilate, and whole-instance mislabeling. Every draw comes from a
//! stream derived from (seed, frame, instance), so outputs are independent
//! of query order and instance drops are monotone in the drop probability
//! for a fixed seed.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::class_table::ClassTable;
use crate::error::{Error, Result};
use crate::mask::{component_at, connected_components, dilate, erode};
use crate::raster::LabelMask;
use crate::segmenter::{
    derive_seed, CandidateMask, MaskCandidate, NoiseSpec, Prompt, Segmenter, SegmenterOutput,
};

pub struct OracleSegmenter {
    frames: BTreeMap<u32, LabelMask>,
    noise: NoiseSpec,
    ct: ClassTable,
}

pub fn oracle_segmenter(
    frames: BTreeMap<u32, LabelMask>,
    noise: NoiseSpec,
    ct: &ClassTable,
) -> Result<OracleSegmenter> {
    noise.validate()?;
    Ok(OracleSegmenter { frames, noise, ct: ct.clone() })
}

impl OracleSegmenter {
    fn frame(&self, index: u32) -> Result<&LabelMask> {
        self.frames.get(&index).ok_or_else(|| Error::MissingFrame {
            index,
            path: format!("oracle frame {index}").into(),
        })
    }

    fn degraded(&self, frame_index: u32, gt: &LabelMask) -> Result<LabelMask> {
        let mut out = LabelMask::ignore(gt.width(), gt.height(), &self.ct);
        let m = self.ct.len() as u32;
        for (k, instance) in connected_components(gt, &self.ct).into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                self.noise.rng_seed,
                frame_index as u64,
                k as u64,
            ));
            // one uniform draw per decision keeps drops monotone in the probability
            let u_drop: f64 = rng.random();
            if u_drop < self.noise.drop_instance_prob {
                continue;
            }
            let pixels = match self.noise.morph_radius_px {
                0 => instance.pixels,
                r if r < 0 => erode(&instance.pixels, r.unsigned_abs()),
                r => dilate(&instance.pixels, r as u32),
            };
            let u_mislabel: f64 = rng.random();
            let class = if u_mislabel < self.noise.mislabel_prob && m > 1 {
                (instance.class_id + rng.random_range(1..m)) % m
            } else {
                instance.class_id
            };
            for (u, v) in pixels.iter_pixels() {
                out.set(u, v, class);
            }
        }
        Ok(out)
    }
}

impl Segmenter for OracleSegmenter {
    fn query_labels(&self, frame_index: u32) -> Result<SegmenterOutput> {
        let gt = self.frame(frame_index)?;
        let mask = self.degraded(frame_index, gt)?;
        SegmenterOutput::new(vec![MaskCandidate {
            mask: CandidateMask::Labeled(mask),
            confidence: 1.0,
        }])
    }

    /// The exact connected component under the first positive point of the
    /// (noise-applied) mask, confidence 1.0.
    fn query_prompt(&self, frame_index: u32, prompt: &Prompt) -> Result<SegmenterOutput> {
        let first = prompt
            .positives
            .first()
            .ok_or_else(|| Error::InvalidData("prompt needs at least one positive point".into()))?;
        let gt = self.frame(frame_index)?;
        let mask = self.degraded(frame_index, gt)?;
        let instance = component_at(&mask, first.u, first.v, &self.ct)?;
        SegmenterOutput::new(vec![MaskCandidate {
            mask: CandidateMask::Binary(instance.pixels),
            confidence: 1.0,
        }])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ct() -> ClassTable {
        ClassTable::scannet20()
    }

    fn gt_with_square(class: u32) -> LabelMask {
        let ctab = ct();
        let mut mask = LabelMask::ignore(20, 20, &ctab);
        for v in 5..15 {
            for u in 5..15 {
                mask.set(u, v, class);
            }
        }
        mask
    }

    #[test]
    fn zero_noise_is_identity() {
        let ctab = ct();
        let mut gt = gt_with_square(4);
        gt.set(0, 0, 9);
        gt.set(19, 19, 2);
        let seg = oracle_segmenter(
            BTreeMap::from([(3u32, gt.clone())]),
            NoiseSpec::none(77),
            &ctab,
        )
        .unwrap();
        let out = seg.query_labels(3).unwrap();
        match &out.best().mask {
            CandidateMask::Labeled(m) => assert_eq!(m, &gt),
            _ => panic!("expected labeled output"),
        }
    }

    #[test]
    fn erode_one_shrinks_square_to_8x8() {
        let ctab = ct();
        let seg = oracle_segmenter(
            BTreeMap::from([(0u32, gt_with_square(4))]),
            NoiseSpec { morph_radius_px: -1, ..NoiseSpec::none(1) },
            &ctab,
        )
        .unwrap();
        let out = seg.query_labels(0).unwrap();
        let CandidateMask::Labeled(m) = &out.best().mask else {
            panic!()
        };
        let count = m.values().iter().filter(|&&v| v == 4).count();
        assert_eq!(count, 64);
        assert_eq!(m.get(6, 6), 4);
        assert_eq!(m.get(5, 5), ctab.ignore_id());
    }

    #[test]
    fn drop_probability_one_empties_the_mask() {
        let ctab = ct();
        let seg = oracle_segmenter(
            BTreeMap::from([(0u32, gt_with_square(4))]),
            NoiseSpec { drop_instance_prob: 1.0, ..NoiseSpec::none(5) },
            &ctab,
        )
        .unwrap();
        let out = seg.query_labels(0).unwrap();
        let CandidateMask::Labeled(m) = &out.best().mask else {
            panic!()
        };
        assert!(m.values().iter().all(|&v| v == ctab.ignore_id()));
    }

    #[test]
    fn drop_rate_is_statistically_correct() {
        // a checkerboard of two classes: every pixel is its own instance
        let ctab = ct();
        let side = 100u32;
        let mut gt = LabelMask::ignore(side, side, &ctab);
        for v in 0..side {
            for u in 0..side {
                gt.set(u, v, (u + v) % 2);
            }
        }
        let n = (side * side) as f64;
        let seg = oracle_segmenter(
            BTreeMap::from([(0u32, gt)]),
            NoiseSpec { drop_instance_prob: 0.5, ..NoiseSpec::none(12) },
            &ctab,
        )
        .unwrap();
        let out = seg.query_labels(0).unwrap();
        let CandidateMask::Labeled(m) = &out.best().mask else {
            panic!()
        };
        let surviving = m.values().iter().filter(|&&v| v != ctab.ignore_id()).count() as f64;
        let sigma = (n * 0.25).sqrt();
        assert!(
            (surviving - n * 0.5).abs() <= 3.0 * sigma,
            "{surviving} survivors of {n}"
        );
    }

    #[test]
    fn drops_are_monotone_in_probability_for_fixed_seed() {
        let ctab = ct();
        let side = 40u32;
        let mut gt = LabelMask::ignore(side, side, &ctab);
        for v in 0..side {
            for u in 0..side {
                gt.set(u, v, (u + v) % 2);
            }
        }
        let survivors = |p: f64| -> Vec<bool> {
            let seg = oracle_segmenter(
                BTreeMap::from([(0u32, gt.clone())]),
                NoiseSpec { drop_instance_prob: p, ..NoiseSpec::none(9) },
                &ctab,
            )
            .unwrap();
            let out = seg.query_labels(0).unwrap();
            let CandidateMask::Labeled(m) = &out.best().mask else {
                panic!()
            };
            m.values().iter().map(|&v| v != ctab.ignore_id()).collect()
        };
        let s0 = survivors(0.0);
        let s25 = survivors(0.25);
        let s50 = survivors(0.5);
        assert!(s0.iter().all(|&b| b));
        for i in 0..s0.len() {
            // a pixel surviving at 0.5 must survive at 0.25
            assert!(!s50[i] || s25[i]);
        }
    }

    #[test]
    fn mislabel_swaps_whole_instance_to_another_class() {
        let ctab = ct();
        let seg = oracle_segmenter(
            BTreeMap::from([(0u32, gt_with_square(4))]),
            NoiseSpec { mislabel_prob: 1.0, ..NoiseSpec::none(2) },
            &ctab,
        )
        .unwrap();
        let out = seg.query_labels(0).unwrap();
        let CandidateMask::Labeled(m) = &out.best().mask else {
            panic!()
        };
        let classes: std::collections::BTreeSet<u32> = m
            .values()
            .iter()
            .copied()
            .filter(|&v| v != ctab.ignore_id())
            .collect();
        assert_eq!(classes.len(), 1);
        let swapped = *classes.iter().next().unwrap();
        assert_ne!(swapped, 4);
        assert!(swapped < 20);
    }

    #[test]
    fn noisy_output_is_deterministic_per_frame_and_seed() {
        let ctab = ct();
        let noise = NoiseSpec {
            morph_radius_px: 1,
            drop_instance_prob: 0.3,
            mislabel_prob: 0.3,
            rng_seed: 31,
        };
        let frames = BTreeMap::from([(0u32, gt_with_square(4)), (50u32, gt_with_square(9))]);
        let seg = oracle_segmenter(frames.clone(), noise, &ctab).unwrap();
        let seg2 = oracle_segmenter(frames, noise, &ctab).unwrap();
        // query in different orders
        let a0 = seg.query_labels(0).unwrap();
        let a50 = seg.query_labels(50).unwrap();
        let b50 = seg2.query_labels(50).unwrap();
        let b0 = seg2.query_labels(0).unwrap();
        assert_eq!(a0, b0);
        assert_eq!(a50, b50);
    }

    #[test]
    fn prompt_returns_exact_component() {
        use crate::prompting::{PromptPoint, PromptRole};
        let ctab = ct();
        let seg = oracle_segmenter(
            BTreeMap::from([(0u32, gt_with_square(4))]),
            NoiseSpec::none(0),
            &ctab,
        )
        .unwrap();
        let prompt = Prompt {
            positives: vec![PromptPoint { u: 7, v: 7, class_id: 4, role: PromptRole::Positive }],
            negatives: vec![],
        };
        let out = seg.query_prompt(0, &prompt).unwrap();
        assert_eq!(out.best().confidence, 1.0);
        let CandidateMask::Binary(m) = &out.best().mask else {
            panic!()
        };
        assert_eq!(m.count(), 100);
        assert!(m.contains(5, 5) && m.contains(14, 14) && !m.contains(4, 5));
    }
}
