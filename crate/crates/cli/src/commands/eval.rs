use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use clap::Args;
use semfuse_core::class_table::ClassTable;
use semfuse_core::evaluation::{evaluate, format_report, machine_report, EvalReport, IgnorePolicy};
use semfuse_core::io::ply;

/// Score a fused-label cloud against a ground-truth cloud.
#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted labels (PLY with a label property).
    pub pred: PathBuf,
    /// Ground truth (PLY with a label property, same point order).
    pub gt: PathBuf,
    /// penalize | exclude
    #[arg(long, default_value = "penalize")]
    pub policy: String,
    /// Class table file (default: the 20 ScanNet classes).
    #[arg(long)]
    pub classes: Option<PathBuf>,
    /// Also write the line-oriented class=iou report here.
    #[arg(long)]
    pub machine_out: Option<PathBuf>,
}

pub fn evaluate_plys(
    pred: &PathBuf,
    gt: &PathBuf,
    policy: IgnorePolicy,
    ct: &ClassTable,
) -> Result<EvalReport> {
    let pred_cloud =
        ply::load_scene(pred, ct).with_context(|| format!("loading {}", pred.display()))?;
    let gt_cloud = ply::load_scene(gt, ct).with_context(|| format!("loading {}", gt.display()))?;
    let pred_labels = pred_cloud
        .gt_labels()
        .ok_or_else(|| anyhow!("{} carries no label property", pred.display()))?;
    let gt_labels = gt_cloud
        .gt_labels()
        .ok_or_else(|| anyhow!("{} carries no label property", gt.display()))?;
    Ok(evaluate(pred_labels, gt_labels, ct, policy)?)
}

pub fn run(args: &EvalArgs) -> Result<()> {
    let policy: IgnorePolicy = args.policy.parse()?;
    let ct = crate::commands::load_class_table_from(args.classes.as_deref())?;
    let report = evaluate_plys(&args.pred, &args.gt, policy, &ct)?;
    print!("{}", format_report(&report, &ct));
    println!("coverage: {:.1}", report.coverage() * 100.0);
    if let Some(path) = &args.machine_out {
        std::fs::write(path, machine_report(&report, &ct))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
