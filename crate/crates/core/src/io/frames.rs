//! On-disk frame layout:
//!
//! ```text
//! <dir>/intrinsics.txt      shared pinhole parameters
//! <dir>/depth/<index>.pgm   16-bit depth, millimeters
//! <dir>/pose/<index>.txt    4x4 row-major camera-to-world
//! <dir>/label/<index>.pgm   optional 8-bit label mask (255 = ignore)
//! <dir>/color/<index>.ppm   optional 8-bit RGB
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use crate::class_table::ClassTable;
use crate::error::{Error, Result};
use crate::frame::FrameRecord;
use crate::io::{pnm, text};

pub struct FramePaths {
    pub depth: PathBuf,
    pub pose: PathBuf,
    pub label: PathBuf,
    pub color: PathBuf,
}

pub fn frame_paths(dir: impl AsRef<Path>, index: u32) -> FramePaths {
    let dir = dir.as_ref();
    FramePaths {
        depth: dir.join("depth").join(format!("{index}.pgm")),
        pose: dir.join("pose").join(format!("{index}.txt")),
        label: dir.join("label").join(format!("{index}.pgm")),
        color: dir.join("color").join(format!("{index}.ppm")),
    }
}

pub fn intrinsics_path(dir: impl AsRef<Path>) -> PathBuf {
    dir.as_ref().join("intrinsics.txt")
}

pub fn write_dataset_intrinsics(dir: impl AsRef<Path>, k: &crate::camera::CameraIntrinsics) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    text::write_intrinsics(intrinsics_path(dir), k)
}

/// Loads one posed frame; the label mask and color image are optional on
/// disk and absent from the record when their files do not exist.
pub fn load_frame(dir: impl AsRef<Path>, index: u32, ct: &ClassTable) -> Result<FrameRecord> {
    let dir = dir.as_ref();
    let paths = frame_paths(dir, index);
    if !paths.depth.exists() {
        return Err(Error::MissingFrame { index, path: paths.depth });
    }
    if !paths.pose.exists() {
        return Err(Error::MissingFrame { index, path: paths.pose });
    }
    let intrinsics = text::read_intrinsics(intrinsics_path(dir))?;
    let pose = text::read_pose(&paths.pose)?;
    let depth = pnm::read_depth_pgm(&paths.depth)?;
    let mask = if paths.label.exists() {
        Some(pnm::read_mask_pgm(&paths.label, ct)?)
    } else {
        None
    };
    let color = if paths.color.exists() {
        Some(pnm::read_ppm(&paths.color)?)
    } else {
        None
    };
    FrameRecord::new(index, intrinsics, pose, depth, color, mask)
}

/// Writes a frame's per-index files. The shared intrinsics file is written
/// by `write_dataset_intrinsics`.
pub fn save_frame(dir: impl AsRef<Path>, frame: &FrameRecord, ct: &ClassTable) -> Result<()> {
    let dir = dir.as_ref();
    let paths = frame_paths(dir, frame.frame_index);
    for sub in ["depth", "pose", "label", "color"] {
        let p = dir.join(sub);
        fs::create_dir_all(&p).map_err(|e| Error::io(p.clone(), e))?;
    }
    pnm::write_depth_pgm(&paths.depth, &frame.depth)?;
    text::write_pose(&paths.pose, &frame.pose)?;
    if let Some(mask) = &frame.mask {
        pnm::write_mask_pgm(&paths.label, mask, ct)?;
    }
    if let Some(color) = &frame.color {
        pnm::write_ppm(&paths.color, color)?;
    }
    Ok(())
}

/// Frame indices present in `<dir>/pose`, ascending.
pub fn list_frame_indices(dir: impl AsRef<Path>) -> Result<Vec<u32>> {
    let pose_dir = dir.as_ref().join("pose");
    let entries = fs::read_dir(&pose_dir).map_err(|e| Error::io(&pose_dir, e))?;
    let mut indices = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(&pose_dir, e))?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some(stem) = name.strip_suffix(".txt") {
            if let Ok(idx) = stem.parse::<u32>() {
                indices.push(idx);
            }
        }
    }
    indices.sort_unstable();
    Ok(indices)
}
