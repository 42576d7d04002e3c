//! Pinhole projection between image and world space.
//!
//! Integer pixel coordinates address pixel centers. Depth is stored as
//! 16-bit millimeters and converted to meters at unprojection time.

use nalgebra::{Point3, Vector3};

use crate::camera::{CameraIntrinsics, CameraPose};
use crate::class_table::ClassTable;
use crate::error::{Error, Result};
use crate::frame::FrameRecord;
use crate::raster::{ColorImage, DepthMap, LabelMask};

/// World-space points labeled by the mask of one source frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFragment {
    pub points: Vec<[f64; 3]>,
    pub labels: Vec<u32>,
    pub source_frame: u32,
}

impl LabeledFragment {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A point projected into a frame: continuous pixel coordinates plus the
/// depth rounded to the nearest millimeter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelProjection {
    pub u: f64,
    pub v: f64,
    pub depth_mm: u32,
}

/// Camera-space ray through pixel center `(u, v)` at the measured depth.
///
/// Returns `(x, y, z)` meters with `z = depth_mm / 1000`,
/// `x = (u - cx) * z / fx`, `y = (v - cy) * z / fy`.
pub fn unproject_pixel(u: u32, v: u32, depth_mm: u16, k: &CameraIntrinsics) -> Result<Vector3<f64>> {
    if depth_mm == 0 {
        return Err(Error::InvalidData(format!("invalid depth 0 at pixel ({u}, {v})")));
    }
    if !k.contains_pixel(u, v) {
        return Err(Error::InvalidData(format!(
            "pixel ({u}, {v}) outside {}x{} image",
            k.width(),
            k.height()
        )));
    }
    let z = depth_mm as f64 / 1000.0;
    Ok(Vector3::new(
        (u as f64 - k.cx()) * z / k.fx(),
        (v as f64 - k.cy()) * z / k.fy(),
        z,
    ))
}

/// Projects a world point into a frame. `None` marks a point at or behind
/// the camera plane.
pub fn project_point(
    p_world: Point3<f64>,
    k: &CameraIntrinsics,
    pose: &CameraPose,
) -> Option<PixelProjection> {
    let p_cam = pose.to_camera(p_world);
    if p_cam.z <= 0.0 {
        return None;
    }
    Some(PixelProjection {
        u: k.fx() * p_cam.x / p_cam.z + k.cx(),
        v: k.fy() * p_cam.y / p_cam.z + k.cy(),
        depth_mm: (1000.0 * p_cam.z).round() as u32,
    })
}

/// Unprojects every mask-labeled, valid-depth pixel of a frame into world
/// space, sampling on a `pixel_stride` grid in row-major order.
pub fn frame_to_fragment(
    frame: &FrameRecord,
    mask: &LabelMask,
    pixel_stride: u32,
    ct: &ClassTable,
) -> Result<LabeledFragment> {
    if pixel_stride < 1 {
        return Err(Error::InvalidData("pixel stride must be at least 1".into()));
    }
    if mask.width() != frame.width() || mask.height() != frame.height() {
        return Err(Error::DimensionMismatch(format!(
            "mask {}x{} does not match frame {}x{}",
            mask.width(),
            mask.height(),
            frame.width(),
            frame.height()
        )));
    }
    let ignore = ct.ignore_id();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut v = 0;
    while v < frame.height() {
        let mut u = 0;
        while u < frame.width() {
            let depth = frame.depth.get(u, v);
            let label = mask.get(u, v);
            if depth > 0 && label != ignore {
                let p_cam = unproject_pixel(u, v, depth, &frame.intrinsics)?;
                let p_world = frame.pose.to_world(Point3::from(p_cam));
                points.push([p_world.x, p_world.y, p_world.z]);
                labels.push(label);
            }
            u += pixel_stride;
        }
        v += pixel_stride;
    }
    Ok(LabeledFragment { points, labels, source_frame: frame.frame_index })
}

/// Depth, labels, and (when the cloud has colors) color produced by
/// splatting a labeled cloud into a view.
#[derive(Debug, Clone)]
pub struct RenderedView {
    pub depth: DepthMap,
    pub labels: LabelMask,
    pub color: Option<ColorImage>,
}

/// Z-buffer point splatting: each point covers a square of side
/// `2 * splat_radius_px + 1` around its projected pixel; strictly smaller
/// depth wins. Unhit pixels keep depth 0 and the ignore label.
pub fn render_view(
    cloud: &crate::cloud::ScenePointCloud,
    k: &CameraIntrinsics,
    pose: &CameraPose,
    splat_radius_px: u32,
    ct: &ClassTable,
) -> Result<RenderedView> {
    let labels = cloud
        .gt_labels()
        .ok_or_else(|| Error::InvalidData("render requires ground-truth labels".into()))?;
    let width = k.width();
    let height = k.height();
    let mut depth = DepthMap::zeros(width, height);
    let mut mask = LabelMask::ignore(width, height, ct);
    let mut color = cloud.colors().map(|_| ColorImage::filled(width, height, [0, 0, 0]));
    let r = splat_radius_px as i64;

    for (i, p) in cloud.positions().iter().enumerate() {
        let p_world = Point3::new(p[0] as f64, p[1] as f64, p[2] as f64);
        let Some(proj) = project_point(p_world, k, pose) else {
            continue;
        };
        if proj.depth_mm == 0 || proj.depth_mm > u16::MAX as u32 {
            continue;
        }
        let mm = proj.depth_mm as u16;
        let cu = proj.u.round() as i64;
        let cv = proj.v.round() as i64;
        if cu + r < 0 || cv + r < 0 || cu - r >= width as i64 || cv - r >= height as i64 {
            continue;
        }
        let u0 = (cu - r).max(0) as u32;
        let u1 = ((cu + r).min(width as i64 - 1)) as u32;
        let v0 = (cv - r).max(0) as u32;
        let v1 = ((cv + r).min(height as i64 - 1)) as u32;
        for v in v0..=v1 {
            for u in u0..=u1 {
                let cur = depth.get(u, v);
                if cur == 0 || mm < cur {
                    depth.set(u, v, mm);
                    mask.set(u, v, labels[i]);
                    if let (Some(img), Some(colors)) = (color.as_mut(), cloud.colors()) {
                        img.set(u, v, colors[i]);
                    }
                }
            }
        }
    }

    Ok(RenderedView { depth, labels: mask, color })
}

/// `render_view` without the color plane.
pub fn render_frame(
    cloud: &crate::cloud::ScenePointCloud,
    k: &CameraIntrinsics,
    pose: &CameraPose,
    splat_radius_px: u32,
    ct: &ClassTable,
) -> Result<(DepthMap, LabelMask)> {
    let view = render_view(cloud, k, pose, splat_radius_px, ct)?;
    Ok((view.depth, view.labels))
}
