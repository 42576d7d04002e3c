use nalgebra::{Matrix3, Matrix4, Point3, Vector3};

use crate::error::{Error, Result};

/// Pinhole intrinsics. Integer pixel coordinates address pixel centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: u32,
    height: u32,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        let focals_valid = fx.is_finite() && fx > 0.0 && fy.is_finite() && fy > 0.0;
        if !focals_valid {
            return Err(Error::InvalidData(format!(
                "focal lengths must be positive (fx={fx}, fy={fy})"
            )));
        }
        if !(0.0 <= cx && cx < width as f64) || !(0.0 <= cy && cy < height as f64) {
            return Err(Error::InvalidData(format!(
                "principal point ({cx}, {cy}) outside {width}x{height} image"
            )));
        }
        Ok(Self { fx, fy, cx, cy, width, height })
    }

    pub fn fx(&self) -> f64 {
        self.fx
    }
    pub fn fy(&self) -> f64 {
        self.fy
    }
    pub fn cx(&self) -> f64 {
        self.cx
    }
    pub fn cy(&self) -> f64 {
        self.cy
    }
    pub fn width(&self) -> u32 {
        self.width
    }
    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn contains_pixel(&self, u: u32, v: u32) -> bool {
        u < self.width && v < self.height
    }
}

const RIGID_TOL: f64 = 1e-5;

/// Camera-to-world rigid transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    matrix: Matrix4<f64>,
}

impl CameraPose {
    /// Validates and wraps a 4x4 camera-to-world matrix.
    pub fn new(matrix: Matrix4<f64>) -> Result<Self> {
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::PoseNotRigid("matrix holds non-finite values".into()));
        }
        let bottom = matrix.row(3);
        if bottom[0] != 0.0 || bottom[1] != 0.0 || bottom[2] != 0.0 || bottom[3] != 1.0 {
            return Err(Error::PoseNotRigid(format!(
                "bottom row must be (0, 0, 0, 1), got ({}, {}, {}, {})",
                bottom[0], bottom[1], bottom[2], bottom[3]
            )));
        }
        let rot = matrix.fixed_view::<3, 3>(0, 0).into_owned();
        let gram = rot.transpose() * rot;
        let ortho_err = (gram - Matrix3::identity()).abs().max();
        if ortho_err > RIGID_TOL {
            return Err(Error::PoseNotRigid(format!(
                "rotation block not orthonormal (max deviation {ortho_err:.2e})"
            )));
        }
        let det = rot.determinant();
        if (det - 1.0).abs() > RIGID_TOL {
            return Err(Error::PoseNotRigid(format!(
                "rotation determinant {det} is not +1"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn identity() -> Self {
        Self { matrix: Matrix4::identity() }
    }

    /// Builds a pose from a rotation block and a translation (camera center).
    pub fn from_parts(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&translation);
        Self::new(m)
    }

    /// The camera-to-world matrix.
    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.matrix
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        self.matrix.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.matrix.fixed_view::<3, 1>(0, 3).into_owned()
    }

    /// Maps a camera-space point to world space.
    pub fn to_world(&self, p_cam: Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation() * p_cam.coords + self.translation())
    }

    /// Maps a world-space point to camera space using the rigid inverse.
    pub fn to_camera(&self, p_world: Point3<f64>) -> Point3<f64> {
        let rt = self.rotation().transpose();
        Point3::from(rt * (p_world.coords - self.translation()))
    }

    /// Returns the pose translated by `delta` (world units).
    pub fn translated(&self, delta: Vector3<f64>) -> Self {
        let mut m = self.matrix;
        m[(0, 3)] += delta[0];
        m[(1, 3)] += delta[1];
        m[(2, 3)] += delta[2];
        Self { matrix: m }
    }
}
