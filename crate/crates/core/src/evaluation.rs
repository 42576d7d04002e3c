//! Confusion-matrix bookkeeping, per-class IoU, and mean IoU.
//!
//! Points whose ground truth is the ignore id contribute no ground-truth
//! claim: they never count as hits or misses, but a class painted onto
//! them still pays as a false positive (pseudo-label pollution on
//! unlabeled territory is a real cost). Two policies handle ignore
//! `predictions` on labeled points: `penalize` counts them as false
//! negatives of the ground-truth class, `exclude` drops those points.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::class_table::ClassTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IgnorePolicy {
    Penalize,
    Exclude,
}

impl FromStr for IgnorePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "penalize" => Ok(IgnorePolicy::Penalize),
            "exclude" => Ok(IgnorePolicy::Exclude),
            other => Err(Error::InvalidData(format!(
                "unknown ignore policy '{other}' (expected penalize|exclude)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// m rows (ground-truth classes) by m+1 columns (predicted classes
    /// plus a final column for ignore predictions).
    confusion: Vec<u64>,
    /// Per-class false positives on unlabeled ground-truth points.
    unlabeled_fp: Vec<u64>,
    per_class_iou: Vec<Option<f64>>,
    miou: f64,
    coverage: f64,
    n_classes: usize,
    scored_points: u64,
    policy: IgnorePolicy,
}

impl EvalReport {
    pub fn confusion(&self, gt: u32, pred_col: u32) -> u64 {
        self.confusion[gt as usize * (self.n_classes + 1) + pred_col as usize]
    }

    pub fn per_class_iou(&self) -> &[Option<f64>] {
        &self.per_class_iou
    }

    pub fn miou(&self) -> f64 {
        self.miou
    }

    pub fn coverage(&self) -> f64 {
        self.coverage
    }

    pub fn scored_points(&self) -> u64 {
        self.scored_points
    }

    pub fn policy(&self) -> IgnorePolicy {
        self.policy
    }
}

/// Scores predictions against ground truth.
pub fn evaluate(
    pred: &[u32],
    gt: &[u32],
    ct: &ClassTable,
    policy: IgnorePolicy,
) -> Result<EvalReport> {
    if pred.len() != gt.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} ground-truth labels",
            pred.len(),
            gt.len()
        )));
    }
    let m = ct.len();
    let ignore = ct.ignore_id();
    let cols = m + 1;
    let mut confusion = vec![0u64; m * cols];
    let mut unlabeled_fp = vec![0u64; m];

    for (&p, &g) in pred.iter().zip(gt) {
        ct.check_label(p)?;
        ct.check_label(g)?;
        if g == ignore {
            if p != ignore {
                unlabeled_fp[p as usize] += 1;
            }
            continue;
        }
        let col = if p == ignore { m } else { p as usize };
        confusion[g as usize * cols + col] += 1;
    }

    let scored_points: u64 = confusion.iter().sum();
    if scored_points == 0 {
        return Err(Error::InvalidData("no labeled ground-truth points to score".into()));
    }
    let ignored_preds: u64 = (0..m).map(|g| confusion[g * cols + m]).sum();
    let coverage = 1.0 - ignored_preds as f64 / scored_points as f64;

    let mut per_class_iou = Vec::with_capacity(m);
    for c in 0..m {
        let tp = confusion[c * cols + c];
        let fp: u64 = (0..m)
            .filter(|&g| g != c)
            .map(|g| confusion[g * cols + c])
            .sum::<u64>()
            + unlabeled_fp[c];
        let row_total: u64 = (0..cols).map(|p| confusion[c * cols + p]).sum();
        let row_ignored = confusion[c * cols + m];
        let (fn_count, support) = match policy {
            IgnorePolicy::Penalize => (row_total - tp, row_total),
            IgnorePolicy::Exclude => (row_total - tp - row_ignored, row_total - row_ignored),
        };
        per_class_iou.push(if support == 0 {
            None
        } else {
            Some(tp as f64 / (tp + fp + fn_count) as f64)
        });
    }

    let defined: Vec<f64> = per_class_iou.iter().flatten().copied().collect();
    let miou = if defined.is_empty() {
        0.0
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };

    Ok(EvalReport {
        confusion,
        unlabeled_fp,
        per_class_iou,
        miou,
        coverage,
        n_classes: m,
        scored_points,
        policy,
    })
}

/// Column header usable in whitespace-separated tables.
fn column_name(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join("_")
}

/// Two-line table: one column per class plus `avg`, values as percentages
/// with one decimal, an em dash for classes without ground-truth support.
pub fn format_report(report: &EvalReport, ct: &ClassTable) -> String {
    let mut names = Vec::with_capacity(ct.len() + 1);
    let mut values = Vec::with_capacity(ct.len() + 1);
    for (name, iou) in ct.names().iter().zip(report.per_class_iou()) {
        names.push(column_name(name));
        values.push(match iou {
            Some(v) => format!("{:.1}", v * 100.0),
            None => "—".to_string(),
        });
    }
    names.push("avg".into());
    values.push(format!("{:.1}", report.miou() * 100.0));

    let mut header = String::new();
    let mut row = String::new();
    for (name, value) in names.iter().zip(&values) {
        let width = name.chars().count().max(value.chars().count()) + 2;
        let name_pad = width - name.chars().count();
        let value_pad = width - value.chars().count();
        let _ = write!(header, "{}{name}", " ".repeat(name_pad));
        let _ = write!(row, "{}{value}", " ".repeat(value_pad));
    }
    format!("{header}\n{row}\n")
}

/// Parses the per-class percentages (and trailing average) back out of a
/// `format_report` table.
pub fn parse_report_values(table: &str) -> Result<Vec<Option<f64>>> {
    let mut lines = table.lines();
    let (_, row) = match (lines.next(), lines.next()) {
        (Some(h), Some(r)) => (h, r),
        _ => return Err(Error::Format { what: "report table", path: None, detail: "expected two lines".into() }),
    };
    row.split_whitespace()
        .map(|tok| {
            if tok == "—" {
                Ok(None)
            } else {
                tok.parse::<f64>().map(Some).map_err(|_| Error::Format {
                    what: "report table",
                    path: None,
                    detail: format!("bad value '{tok}'"),
                })
            }
        })
        .collect()
}

/// Line-oriented `class=iou` text, full precision, for machine use.
pub fn machine_report(report: &EvalReport, ct: &ClassTable) -> String {
    let mut out = String::new();
    for (name, iou) in ct.names().iter().zip(report.per_class_iou()) {
        match iou {
            Some(v) => {
                let _ = writeln!(out, "{name}={v}");
            }
            None => {
                let _ = writeln!(out, "{name}=undefined");
            }
        }
    }
    let _ = writeln!(out, "avg={}", report.miou());
    let _ = writeln!(out, "coverage={}", report.coverage());
    out
}
