//! Point clouds, pinhole cameras, rigid transforms and normal estimation.

mod camera;
mod cloud;
mod normals;
mod spatial;

pub use camera::{CameraModel, PixelProjection};
pub use cloud::{rgb_intensity, PointCloud};
pub use normals::{estimate_normals, DEFAULT_NORMAL_NEIGHBORS};
pub use spatial::GridIndex;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Point3 = nalgebra::Point3<f64>;

const ROTATION_TOL: f64 = 1e-9;

/// Checks `R·Rᵀ = I` and `det(R) = +1`.
pub fn check_rotation(r: &Matrix3<f64>) -> Result<()> {
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidRotation("non-finite entry".into()));
    }
    let err = (r * r.transpose() - Matrix3::identity()).abs().max();
    if err > ROTATION_TOL {
        return Err(Error::InvalidRotation(format!(
            "not orthonormal (|RRᵀ - I| = {err:e})"
        )));
    }
    let det = r.determinant();
    if (det - 1.0).abs() > ROTATION_TOL {
        return Err(Error::InvalidRotation(format!("determinant {det}")));
    }
    Ok(())
}

/// Applies `p -> R·p + t` to every point and `n -> R·n` to every normal.
pub fn transform_cloud(
    rotation: &Matrix3<f64>,
    translation: &Vector3<f64>,
    cloud: &PointCloud,
) -> Result<PointCloud> {
    check_rotation(rotation)?;
    Ok(cloud.map_rigid(rotation, translation))
}

/// Rotation about the x axis by `deg` degrees.
pub fn rot_x(deg: f64) -> Matrix3<f64> {
    let (s, c) = deg.to_radians().sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_y(deg: f64) -> Matrix3<f64> {
    let (s, c) = deg.to_radians().sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rot_z(deg: f64) -> Matrix3<f64> {
    let (s, c) = deg.to_radians().sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}
