use crate::class_table::ClassTable;
use crate::error::{Error, Result};

/// A scene as N world-space points, with optional per-point colors and
/// optional ground-truth labels (which may include the ignore id).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenePointCloud {
    positions: Vec<[f32; 3]>,
    colors: Option<Vec<[u8; 3]>>,
    gt_labels: Option<Vec<u32>>,
}

impl ScenePointCloud {
    pub fn new(
        positions: Vec<[f32; 3]>,
        colors: Option<Vec<[u8; 3]>>,
        gt_labels: Option<Vec<u32>>,
        ct: &ClassTable,
    ) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidData("point cloud must hold at least one point".into()));
        }
        if positions.iter().any(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidData("point coordinates must be finite".into()));
        }
        if let Some(c) = &colors {
            if c.len() != positions.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} colors for {} points",
                    c.len(),
                    positions.len()
                )));
            }
        }
        if let Some(l) = &gt_labels {
            if l.len() != positions.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} labels for {} points",
                    l.len(),
                    positions.len()
                )));
            }
            for &v in l {
                ct.check_label(v)?;
            }
        }
        Ok(Self { positions, colors, gt_labels })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn positions(&self) -> &[[f32; 3]] {
        &self.positions
    }

    pub fn colors(&self) -> Option<&[[u8; 3]]> {
        self.colors.as_deref()
    }

    pub fn gt_labels(&self) -> Option<&[u32]> {
        self.gt_labels.as_deref()
    }
}
