use crate::camera::{CameraIntrinsics, CameraPose};
use crate::error::{Error, Result};
use crate::raster::{ColorImage, DepthMap, LabelMask};

/// One posed RGB-D view: intrinsics, camera-to-world pose, depth, and
/// optional color image and label mask, all sharing one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame_index: u32,
    pub intrinsics: CameraIntrinsics,
    pub pose: CameraPose,
    pub depth: DepthMap,
    pub color: Option<ColorImage>,
    pub mask: Option<LabelMask>,
}

impl FrameRecord {
    pub fn new(
        frame_index: u32,
        intrinsics: CameraIntrinsics,
        pose: CameraPose,
        depth: DepthMap,
        color: Option<ColorImage>,
        mask: Option<LabelMask>,
    ) -> Result<Self> {
        if depth.width() != intrinsics.width() || depth.height() != intrinsics.height() {
            return Err(Error::DimensionMismatch(format!(
                "depth {}x{} does not match intrinsics {}x{}",
                depth.width(),
                depth.height(),
                intrinsics.width(),
                intrinsics.height()
            )));
        }
        if let Some(c) = &color {
            if c.width() != depth.width() || c.height() != depth.height() {
                return Err(Error::DimensionMismatch(format!(
                    "color {}x{} does not match depth {}x{}",
                    c.width(),
                    c.height(),
                    depth.width(),
                    depth.height()
                )));
            }
        }
        if let Some(m) = &mask {
            if m.width() != depth.width() || m.height() != depth.height() {
                return Err(Error::DimensionMismatch(format!(
                    "mask {}x{} does not match depth {}x{}",
                    m.width(),
                    m.height(),
                    depth.width(),
                    depth.height()
                )));
            }
        }
        Ok(Self { frame_index, intrinsics, pose, depth, color, mask })
    }

    pub fn width(&self) -> u32 {
        self.depth.width()
    }

    pub fn height(&self) -> u32 {
        self.depth.height()
    }
}

/// Frame indices `0, stride, 2*stride, ...` below `total`.
///
/// # Panics
/// Panics if `stride` is zero.
pub fn select_frames(total: usize, stride: usize) -> Vec<u32> {
    assert!(stride >= 1, "frame stride must be at least 1");
    (0..total).step_by(stride).map(|i| i as u32).collect()
}
