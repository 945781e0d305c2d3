use nalgebra::Vector3;

use super::ClusteringParams;
use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud};

/// `C_d ∧ (C_s ∨ C_c)` on raw attributes.
///
/// The shape cue compares the angle between the normals against
/// `sigma_s` degrees.
pub fn cues_connect(
    p1: &Point3,
    n1: &Vector3<f64>,
    i1: f64,
    p2: &Point3,
    n2: &Vector3<f64>,
    i2: f64,
    params: &ClusteringParams,
) -> bool {
    let distance = (p1 - p2).norm() < params.sigma_d;
    if !distance {
        return false;
    }
    let color = (i1 - i2).abs() < params.sigma_c;
    color || normal_angle_deg(n1, n2) < params.sigma_s
}

fn normal_angle_deg(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        return 180.0;
    }
    (a.dot(b) / denom).clamp(-1.0, 1.0).acos().to_degrees()
}

/// Connectability of points `a` and `b` of a cloud carrying normals and
/// intensities.
pub fn connectable(cloud: &PointCloud, a: usize, b: usize, params: &ClusteringParams) -> Result<bool> {
    let normals = cloud.normals().ok_or(Error::UnpreparedCloud("normals"))?;
    let intens = cloud.intensities().ok_or(Error::UnpreparedCloud("intensities"))?;
    let pts = cloud.points();
    if a >= pts.len() || b >= pts.len() {
        return Err(Error::InvalidValue(format!("index out of range ({a}, {b})")));
    }
    Ok(cues_connect(
        &pts[a], &normals[a], intens[a], &pts[b], &normals[b], intens[b], params,
    ))
}
