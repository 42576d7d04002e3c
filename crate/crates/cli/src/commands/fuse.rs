use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use semfuse_core::class_table::ClassTable;
use semfuse_core::cloud::ScenePointCloud;
use semfuse_core::error::Error as CoreError;
use semfuse_core::frame::{select_frames, FrameRecord};
use semfuse_core::fusion::{run_fusion, FusionOutcome};
use semfuse_core::io::{frames as frame_io, ply};
use semfuse_core::prompting::{run_augmented_prompt, sample_sparse_prompts, AugmentStrategy};
use semfuse_core::raster::LabelMask;
use semfuse_core::segmenter::{
    load_mask_directory, oracle_segmenter, prompted_oracle_segmenter, CandidateMask,
    GranularityMode, Segmenter,
};

use crate::config::{MaskSourceSpec, OverrideFlags, PipelineConfig};

/// Fuse per-frame masks into per-point pseudo-labels.
#[derive(Debug, Args)]
pub struct FuseArgs {
    #[command(flatten)]
    pub overrides: OverrideFlags,
}

pub fn run(args: &FuseArgs) -> Result<()> {
    let cfg = PipelineConfig::load(&args.overrides)?;
    cfg.validate_paths(false)?;
    let ct = crate::commands::load_class_table(&cfg)?;
    let outcome = fuse_dataset(&cfg, &ct)?;
    print_stats(&outcome.outcome, &ct);
    Ok(())
}

pub struct FuseResult {
    pub cloud: ScenePointCloud,
    pub outcome: FusionOutcome,
}

/// Loads the scene and the selected frames, attaches masks per the
/// configured source, runs the fusion, and writes the outputs.
pub fn fuse_dataset(cfg: &PipelineConfig, ct: &ClassTable) -> Result<FuseResult> {
    let scene_path = cfg.scene.as_ref().ok_or_else(|| anyhow!("no scene path configured"))?;
    let frames_dir = cfg.frames.as_ref().ok_or_else(|| anyhow!("no frame directory configured"))?;
    let out_path = cfg.out.as_ref().ok_or_else(|| anyhow!("no output path configured"))?;

    let cloud = ply::load_scene(scene_path, ct)
        .with_context(|| format!("loading scene {}", scene_path.display()))?;

    let available = frame_io::list_frame_indices(frames_dir)?;
    let total = available.iter().max().map_or(0, |&m| m as usize + 1);
    let selected: Vec<u32> = if cfg.frame_stride as usize > total {
        eprintln!(
            "warning: frame stride {} exceeds frame count {total}; no frames selected",
            cfg.frame_stride
        );
        Vec::new()
    } else {
        select_frames(total, cfg.frame_stride as usize)
            .into_iter()
            .filter(|i| {
                let present = available.binary_search(i).is_ok();
                if !present && cfg.skip_missing {
                    eprintln!("warning: skipping missing frame {i}");
                }
                present || !cfg.skip_missing
            })
            .collect()
    };

    let mut frames = Vec::with_capacity(selected.len());
    for &index in &selected {
        frames.push(
            frame_io::load_frame(frames_dir, index, ct)
                .with_context(|| format!("loading frame {index}"))?,
        );
    }

    let frames = attach_masks(frames, cfg, ct)?;
    let outcome = run_fusion(&cloud, &frames, ct, &cfg.fusion_config())?;

    ply::save_scene(&cloud, Some(&outcome.labels), out_path, ct)
        .with_context(|| format!("writing fused labels to {}", out_path.display()))?;
    if let Some(acc_path) = &cfg.acc_out {
        outcome.accumulator.dump(acc_path)?;
    }
    Ok(FuseResult { cloud, outcome })
}

/// Replaces each frame's mask with one obtained from the configured
/// source. Ground-truth masks loaded from the dataset feed the oracle
/// sources; directory sources ignore them.
fn attach_masks(
    frames: Vec<FrameRecord>,
    cfg: &PipelineConfig,
    ct: &ClassTable,
) -> Result<Vec<FrameRecord>> {
    match &cfg.masks {
        MaskSourceSpec::Directory(dir) => {
            let segmenter = load_mask_directory(dir.clone(), ct)?;
            let mut out = Vec::with_capacity(frames.len());
            for mut frame in frames {
                match segmenter.query_labels(frame.frame_index) {
                    Ok(result) => {
                        let CandidateMask::Labeled(mask) = result.best().mask.clone() else {
                            bail!("mask directory returned a non-label candidate");
                        };
                        frame = FrameRecord::new(
                            frame.frame_index,
                            frame.intrinsics,
                            frame.pose,
                            frame.depth,
                            frame.color,
                            Some(mask),
                        )?;
                        out.push(frame);
                    }
                    Err(CoreError::MissingFrame { index, .. }) if cfg.skip_missing => {
                        eprintln!("warning: skipping frame {index} with no mask");
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(out)
        }
        MaskSourceSpec::Oracle => {
            let gt = collect_gt_masks(&frames)?;
            let segmenter = oracle_segmenter(gt, cfg.noise_spec(), ct)?;
            frames
                .into_iter()
                .map(|frame| {
                    let result = segmenter.query_labels(frame.frame_index)?;
                    let CandidateMask::Labeled(mask) = result.best().mask.clone() else {
                        bail!("oracle returned a non-label candidate");
                    };
                    Ok(FrameRecord::new(
                        frame.frame_index,
                        frame.intrinsics,
                        frame.pose,
                        frame.depth,
                        frame.color,
                        Some(mask),
                    )?)
                })
                .collect()
        }
        MaskSourceSpec::PromptedOracle => {
            let gt = collect_gt_masks(&frames)?;
            let segmenter = prompted_oracle_segmenter(gt, GranularityMode::Ambiguous, ct);
            frames
                .into_iter()
                .map(|frame| prompt_frame(frame, &segmenter, cfg, ct))
                .collect()
        }
    }
}

fn collect_gt_masks(frames: &[FrameRecord]) -> Result<BTreeMap<u32, LabelMask>> {
    frames
        .iter()
        .map(|f| {
            let mask = f.mask.clone().ok_or_else(|| {
                anyhow!(
                    "frame {} has no ground-truth label file; oracle mask sources need them",
                    f.frame_index
                )
            })?;
            Ok((f.frame_index, mask))
        })
        .collect()
}

/// Builds a frame's pseudo-mask by prompting the segmenter once per class
/// present in the ground truth, painting the returned binary masks in
/// ascending class order.
fn prompt_frame(
    frame: FrameRecord,
    segmenter: &dyn Segmenter,
    cfg: &PipelineConfig,
    ct: &ClassTable,
) -> Result<FrameRecord> {
    let gt_mask = frame.mask.as_ref().expect("collect_gt_masks checked presence");
    let frame_seed = cfg
        .seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(frame.frame_index as u64);
    let mut pseudo = LabelMask::ignore(frame.width(), frame.height(), ct);

    match sample_sparse_prompts(gt_mask, ct, frame_seed) {
        Ok(prompts) => {
            if cfg.strategy == AugmentStrategy::MaxEntropy && frame.color.is_none() {
                bail!(
                    "frame {} has no color image; max_entropy augmentation needs one",
                    frame.frame_index
                );
            }
            for class in prompts.classes().collect::<Vec<_>>() {
                let mask = run_augmented_prompt(
                    segmenter,
                    frame.frame_index,
                    frame.color.as_ref(),
                    &prompts,
                    class,
                    cfg.strategy,
                    frame_seed.wrapping_add(class as u64),
                )?;
                for (u, v) in mask.iter_pixels() {
                    pseudo.set(u, v, class);
                }
            }
        }
        Err(CoreError::EmptyMask) => {
            // a frame that sees nothing contributes an all-ignore mask
        }
        Err(e) => return Err(e.into()),
    }

    Ok(FrameRecord::new(
        frame.frame_index,
        frame.intrinsics,
        frame.pose,
        frame.depth,
        frame.color,
        Some(pseudo),
    )?)
}

pub fn print_stats(outcome: &FusionOutcome, ct: &ClassTable) {
    let stats = &outcome.stats;
    println!("frames used: {}", stats.frames_used);
    println!("fragment points: {}", stats.fragment_points);
    println!("transferred votes: {}", stats.transferred_votes);
    println!("ignore fraction: {:.4}", stats.ignore_fraction);
    println!("votes per class:");
    for (class, votes) in stats.per_class_votes.iter().enumerate() {
        if *votes > 0 {
            println!("  {:<16} {votes}", ct.name(class as u32).unwrap_or("?"));
        }
    }
}
