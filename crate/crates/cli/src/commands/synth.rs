use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use semfuse_core::camera::CameraIntrinsics;
use semfuse_core::synthetic::{emit_dataset, SceneSpec};

use crate::commands::load_class_table_from;

/// Generate a synthetic ground-truth dataset (scene + posed frames).
#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output dataset directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Number of cuboid objects on the floor.
    #[arg(long, default_value_t = 8)]
    pub objects: usize,
    /// Surface sampling density, points per square meter.
    #[arg(long, default_value_t = 3400.0)]
    pub density: f64,
    /// Room size as WxDxH in meters.
    #[arg(long, default_value = "4x4x2.5")]
    pub room: String,
    /// Number of rendered orbit frames.
    #[arg(long, default_value_t = 30)]
    pub frames: usize,
    /// Gap between consecutive frame indices on disk.
    #[arg(long, default_value_t = 50)]
    pub index_spacing: u32,
    /// Rendered image width and height in pixels.
    #[arg(long, default_value_t = 320)]
    pub image_size: u32,
    /// Class table file (default: the 20 ScanNet classes).
    #[arg(long)]
    pub classes: Option<PathBuf>,
}

pub fn run(args: &SynthArgs) -> Result<()> {
    let ct = load_class_table_from(args.classes.as_deref())?;
    let room = crate::config::parse_room_arg(&args.room)?;
    let spec = SceneSpec {
        room,
        object_count: args.objects,
        density: args.density,
        seed: args.seed,
        ..SceneSpec::default()
    };
    let size = args.image_size;
    let focal = size as f64 / 2.0;
    let k = CameraIntrinsics::new(
        focal,
        focal,
        (size as f64 - 1.0) / 2.0,
        (size as f64 - 1.0) / 2.0,
        size,
        size,
    )?;
    let emitted = emit_dataset(&spec, args.frames, &k, &args.out, args.index_spacing, &ct)
        .context("emitting synthetic dataset")?;

    println!("points: {}", emitted.n_points);
    println!("frames: {} (indices 0..={})", emitted.frame_indices.len(), emitted.frame_indices.last().copied().unwrap_or(0));
    println!("class histogram:");
    for (class, count) in &emitted.class_histogram {
        let name = ct.name(*class).unwrap_or("?");
        println!("  {name:<16} {count}");
    }
    Ok(())
}
