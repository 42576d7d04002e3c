//! Pose and intrinsics text formats.
//!
//! Poses are 16 whitespace-separated numbers forming a row-major 4x4
//! camera-to-world matrix. Intrinsics files carry `key value` lines with
//! keys fx, fy, cx, cy, width, height.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Matrix4;

use crate::camera::{CameraIntrinsics, CameraPose};
use crate::error::{Error, Result};

pub fn read_pose(path: impl AsRef<Path>) -> Result<CameraPose> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let numbers: Vec<f64> = text
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::format("pose file", Some(path.into()), format!("bad number '{t}'")))
        })
        .collect::<Result<_>>()?;
    if numbers.len() != 16 {
        return Err(Error::format(
            "pose file",
            Some(path.into()),
            format!("expected 16 numbers, got {}", numbers.len()),
        ));
    }
    // input is row-major; from_row_slice preserves that layout
    CameraPose::new(Matrix4::from_row_slice(&numbers))
}

pub fn write_pose(path: impl AsRef<Path>, pose: &CameraPose) -> Result<()> {
    let path = path.as_ref();
    let m = pose.matrix();
    let mut text = String::new();
    for r in 0..4 {
        for c in 0..4 {
            if c > 0 {
                text.push(' ');
            }
            let _ = write!(text, "{}", m[(r, c)]);
        }
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_intrinsics(path: impl AsRef<Path>) -> Result<CameraIntrinsics> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut fx = None;
    let mut fy = None;
    let mut cx = None;
    let mut cy = None;
    let mut width = None;
    let mut height = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap();
        let value = parts
            .next()
            .ok_or_else(|| Error::format("intrinsics file", Some(path.into()), format!("key '{key}' has no value")))?;
        let parse = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::format("intrinsics file", Some(path.into()), format!("bad number '{v}'")))
        };
        match key {
            "fx" => fx = Some(parse(value)?),
            "fy" => fy = Some(parse(value)?),
            "cx" => cx = Some(parse(value)?),
            "cy" => cy = Some(parse(value)?),
            "width" => width = Some(parse(value)? as u32),
            "height" => height = Some(parse(value)? as u32),
            other => {
                return Err(Error::format(
                    "intrinsics file",
                    Some(path.into()),
                    format!("unknown key '{other}'"),
                ))
            }
        }
    }
    let missing = |k: &str| Error::format("intrinsics file", Some(path.into()), format!("missing key '{k}'"));
    CameraIntrinsics::new(
        fx.ok_or_else(|| missing("fx"))?,
        fy.ok_or_else(|| missing("fy"))?,
        cx.ok_or_else(|| missing("cx"))?,
        cy.ok_or_else(|| missing("cy"))?,
        width.ok_or_else(|| missing("width"))?,
        height.ok_or_else(|| missing("height"))?,
    )
}

pub fn write_intrinsics(path: impl AsRef<Path>, k: &CameraIntrinsics) -> Result<()> {
    let path = path.as_ref();
    let text = format!(
        "fx {}\nfy {}\ncx {}\ncy {}\nwidth {}\nheight {}\n",
        k.fx(),
        k.fy(),
        k.cx(),
        k.cy(),
        k.width(),
        k.height()
    );
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
