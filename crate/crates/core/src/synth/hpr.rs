use nalgebra::Vector3;

use super::hull_vertices;
use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud};

pub const DEFAULT_HPR_GAMMA: f64 = 2.0;

/// Spherical-flip hidden point removal.
///
/// Points are flipped about a sphere of radius `10^gamma · max‖p‖` centred
/// on the viewpoint; a point is visible when its flipped image lies on the
/// convex hull of the flipped set plus the viewpoint. Returns ascending
/// indices of visible points.
pub fn hidden_point_removal(cloud: &PointCloud, viewpoint: &Point3, gamma: f64) -> Result<Vec<usize>> {
    if cloud.is_empty() {
        return Err(Error::EmptyInput);
    }
    let rel: Vec<Vector3<f64>> = cloud.points().iter().map(|p| p - viewpoint).collect();
    let max_norm = rel.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max_norm <= 1e-12 {
        return Err(Error::DegenerateGeometry("all points coincide with the viewpoint".into()));
    }
    let radius = 10f64.powf(gamma) * max_norm;
    // Points sitting on the viewpoint are dropped from the flip.
    let live: Vec<usize> = (0..rel.len()).filter(|&i| rel[i].norm() > 1e-12 * max_norm).collect();
    let mut flipped: Vec<Vector3<f64>> = live
        .iter()
        .map(|&i| {
            let v = rel[i];
            let n = v.norm();
            v + v * (2.0 * (radius - n) / n)
        })
        .collect();
    flipped.push(Vector3::zeros());
    let origin = flipped.len() - 1;
    Ok(hull_vertices(&flipped)
        .into_iter()
        .filter(|&h| h != origin)
        .map(|h| live[h])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_is_visible() {
        let c = PointCloud::new(vec![Point3::new(0.0, 0.0, 1.0)]).unwrap();
        assert_eq!(hidden_point_removal(&c, &Point3::origin(), 3.0).unwrap(), vec![0]);
    }

    #[test]
    fn coincident_with_viewpoint() {
        let c = PointCloud::new(vec![Point3::origin(); 3]).unwrap();
        assert!(matches!(
            hidden_point_removal(&c, &Point3::origin(), 3.0),
            Err(Error::DegenerateGeometry(_))
        ));
    }
}
