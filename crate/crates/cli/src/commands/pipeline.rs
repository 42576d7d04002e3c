use anyhow::{anyhow, Result};
use clap::Args;
use semfuse_core::camera::CameraIntrinsics;
use semfuse_core::evaluation::{evaluate, format_report, IgnorePolicy};
use semfuse_core::synthetic::{emit_dataset, SceneSpec};

use crate::commands::fuse::{fuse_dataset, print_stats};
use crate::config::{OverrideFlags, PipelineConfig};
use crate::manifest::RunManifest;

/// Run synth (optional) -> fuse -> eval in one invocation and write a
/// run manifest.
#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub overrides: OverrideFlags,
    /// Generate the synthetic dataset into the frame directory first.
    #[arg(long)]
    pub synth: bool,
    /// Run manifest path (JSON).
    #[arg(long)]
    pub manifest: Option<std::path::PathBuf>,
}

pub fn run(args: &PipelineArgs) -> Result<()> {
    let mut cfg = PipelineConfig::load(&args.overrides)?;
    if args.synth {
        cfg.synth = true;
    }
    if let Some(path) = &args.manifest {
        cfg.manifest = Some(path.clone());
    }
    let ct = crate::commands::load_class_table(&cfg)?;
    cfg.validate_paths(cfg.synth)?;

    if cfg.synth {
        let frames_dir = cfg
            .frames
            .as_ref()
            .ok_or_else(|| anyhow!("pipeline with synth needs a frame directory"))?
            .clone();
        let spec = SceneSpec {
            room: cfg.synth_room,
            object_count: cfg.synth_objects,
            density: cfg.synth_density,
            seed: cfg.seed,
            ..SceneSpec::default()
        };
        let k = default_square_intrinsics(320)?;
        let emitted =
            emit_dataset(&spec, cfg.synth_frames, &k, &frames_dir, cfg.frame_stride.max(1), &ct)?;
        println!("synth: {} points, {} frames", emitted.n_points, emitted.frame_indices.len());
        // the emitted scene is both fusion input and evaluation ground truth
        cfg.scene = Some(frames_dir.join("scene.ply"));
    }

    let result = fuse_dataset(&cfg, &ct)?;
    print_stats(&result.outcome, &ct);

    let gt = result
        .cloud
        .gt_labels()
        .ok_or_else(|| anyhow!("scene cloud carries no ground-truth labels to evaluate against"))?;
    let report = evaluate(&result.outcome.labels, gt, &ct, cfg.policy)?;
    print!("{}", format_report(&report, &ct));
    println!("coverage: {:.1}", report.coverage() * 100.0);

    if let Some(path) = &cfg.manifest {
        let policy_name = match cfg.policy {
            IgnorePolicy::Penalize => "penalize",
            IgnorePolicy::Exclude => "exclude",
        };
        let manifest = RunManifest::new(
            cfg.effective_map(),
            result.cloud.len(),
            &result.outcome.stats,
            &report,
            policy_name,
            &ct,
        );
        manifest.write(path)?;
        println!("manifest: {}", path.display());
    }
    Ok(())
}

fn default_square_intrinsics(size: u32) -> Result<CameraIntrinsics> {
    let focal = size as f64 / 2.0;
    Ok(CameraIntrinsics::new(
        focal,
        focal,
        (size as f64 - 1.0) / 2.0,
        (size as f64 - 1.0) / 2.0,
        size,
        size,
    )?)
}
