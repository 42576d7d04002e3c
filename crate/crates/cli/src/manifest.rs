//! Machine-readable record of one pipeline run: the exact effective
//! configuration, versions, and the metric results. Manifests from
//! identical runs are byte-identical apart from the timestamp field.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use semfuse_core::class_table::ClassTable;
use semfuse_core::evaluation::EvalReport;
use semfuse_core::fusion::FusionStats;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub version: String,
    /// Unix seconds; the only field allowed to differ between reruns.
    pub timestamp: u64,
    pub config: BTreeMap<String, String>,
    pub results: RunResults,
}

#[derive(Debug, Serialize)]
pub struct RunResults {
    pub n_points: usize,
    pub frames_used: usize,
    pub fragment_points: u64,
    pub transferred_votes: u64,
    pub ignore_fraction: f64,
    pub policy: String,
    pub miou: f64,
    pub coverage: f64,
    pub per_class_iou: BTreeMap<String, Option<f64>>,
}

impl RunManifest {
    pub fn new(
        config: BTreeMap<String, String>,
        n_points: usize,
        stats: &FusionStats,
        report: &EvalReport,
        policy_name: &str,
        ct: &ClassTable,
    ) -> Self {
        let per_class_iou = ct
            .names()
            .iter()
            .cloned()
            .zip(report.per_class_iou().iter().copied())
            .collect();
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config,
            results: RunResults {
                n_points,
                frames_used: stats.frames_used,
                fragment_points: stats.fragment_points,
                transferred_votes: stats.transferred_votes,
                ignore_fraction: stats.ignore_fraction,
                policy: policy_name.to_string(),
                miou: report.miou(),
                coverage: report.coverage(),
                per_class_iou,
            },
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).context("serializing manifest")?;
        std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))
    }
}
