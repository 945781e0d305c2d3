use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rayon::prelude::*;

use super::{GridIndex, Point3, PointCloud};
use crate::error::{Error, Result};

pub const DEFAULT_NORMAL_NEIGHBORS: usize = 10;

/// Rank test on the covariance spectrum: the middle eigenvalue must be a
/// non-negligible fraction of the largest one.
const RANK_TOL: f64 = 1e-12;

/// PCA normals over each point and its `k` nearest neighbours, oriented
/// toward `viewpoint`.
pub fn estimate_normals(cloud: &PointCloud, k: usize, viewpoint: &Point3) -> Result<PointCloud> {
    if k < 3 {
        return Err(Error::InvalidValue(format!("k must be at least 3, got {k}")));
    }
    if cloud.len() < k + 1 {
        return Err(Error::InsufficientPoints {
            needed: k + 1,
            got: cloud.len(),
        });
    }
    let pts = cloud.points();
    let index = GridIndex::new(pts, k);
    let normals: Vec<Vector3<f64>> = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let nbrs = index.knn(&pts[i], k + 1);
            let n = plane_normal(nbrs.iter().map(|&(j, _)| &pts[j]))
                .ok_or(Error::DegenerateNeighborhood(i))?;
            let to_view = viewpoint - pts[i];
            Ok(if n.dot(&to_view) < 0.0 { -n } else { n })
        })
        .collect::<Result<_>>()?;
    Ok(cloud.clone().replace_normals(normals))
}

/// Smallest-eigenvalue eigenvector of the neighbourhood covariance, or
/// `None` when the points are (nearly) collinear or coincident.
fn plane_normal<'p>(pts: impl Iterator<Item = &'p Point3> + Clone) -> Option<Vector3<f64>> {
    let n = pts.clone().count() as f64;
    let mean = pts.clone().fold(Vector3::zeros(), |a, p| a + p.coords) / n;
    let cov = pts.fold(Matrix3::zeros(), |a, p| {
        let d = p.coords - mean;
        a + d * d.transpose()
    }) / n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let (mid, hi) = (eig.eigenvalues[order[1]], eig.eigenvalues[order[2]]);
    if hi <= 0.0 || mid <= RANK_TOL * hi {
        return None;
    }
    Some(eig.eigenvectors.column(order[0]).normalize())
}
