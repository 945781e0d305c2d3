use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::PlaneRemovalParams;
use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud};

/// A removed support plane `normal · p + offset = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneFit {
    pub normal: Vector3<f64>,
    pub offset: f64,
    /// Inlier indices into the input cloud, ascending.
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneRemoval {
    pub remaining: PointCloud,
    /// For each remaining point, its index in the input cloud.
    pub remaining_indices: Vec<usize>,
    pub planes: Vec<PlaneFit>,
}

/// Iteratively strips the dominant RANSAC plane while it covers at least
/// `min_plane_fraction` of the input cloud.
pub fn remove_planes(cloud: &PointCloud, params: &PlaneRemovalParams, seed: u64) -> Result<PlaneRemoval> {
    if cloud.is_empty() {
        return Err(Error::EmptyInput);
    }
    params.validate().map_err(|e| Error::InvalidValue(e.to_string()))?;
    let pts = cloud.points();
    let total = pts.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut remaining: Vec<usize> = (0..total).collect();
    let mut planes = Vec::new();

    while planes.len() < params.max_planes && remaining.len() >= 3 {
        let Some((normal, offset)) = best_plane(pts, &remaining, params, &mut rng) else {
            break;
        };
        let inliers: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| (normal.dot(&pts[i].coords) + offset).abs() <= params.inlier_threshold)
            .collect();
        if (inliers.len() as f64) < params.min_plane_fraction * total as f64 {
            break;
        }
        let mut is_inlier = vec![false; total];
        inliers.iter().for_each(|&i| is_inlier[i] = true);
        remaining.retain(|&i| !is_inlier[i]);
        planes.push(PlaneFit {
            normal,
            offset,
            indices: inliers,
        });
    }

    Ok(PlaneRemoval {
        remaining: cloud.select(&remaining),
        remaining_indices: remaining,
        planes,
    })
}

fn best_plane(
    pts: &[Point3],
    candidates: &[usize],
    params: &PlaneRemovalParams,
    rng: &mut ChaCha8Rng,
) -> Option<(Vector3<f64>, f64)> {
    let n = candidates.len();
    let samples: Vec<[usize; 3]> = (0..params.max_iterations)
        .map(|_| {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            let mut c = rng.random_range(0..n - 2);
            for lo in [a.min(b), a.max(b)] {
                if c >= lo {
                    c += 1;
                }
            }
            [candidates[a], candidates[b], candidates[c]]
        })
        .collect();
    let thr = params.inlier_threshold;
    let count = |normal: &Vector3<f64>, offset: f64| {
        candidates
            .iter()
            .filter(|&&i| (normal.dot(&pts[i].coords) + offset).abs() <= thr)
            .count()
    };
    let best = samples
        .par_iter()
        .enumerate()
        .filter_map(|(it, s)| {
            let (a, b, c) = (pts[s[0]], pts[s[1]], pts[s[2]]);
            let normal = (b - a).cross(&(c - a)).try_normalize(1e-12)?;
            let offset = -normal.dot(&a.coords);
            Some((count(&normal, offset), it, normal, offset))
        })
        // Highest count wins; ties go to the earliest iteration.
        .max_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)))?;
    let (best_count, _, normal, offset) = best;

    // Least-squares refinement over the consensus set.
    let inliers: Vec<&Point3> = candidates
        .iter()
        .map(|&i| &pts[i])
        .filter(|p| (normal.dot(&p.coords) + offset).abs() <= thr)
        .collect();
    if let Some((rn, ro)) = fit_plane(&inliers) {
        if count(&rn, ro) >= best_count {
            return Some((rn, ro));
        }
    }
    Some((normal, offset))
}

fn fit_plane(pts: &[&Point3]) -> Option<(Vector3<f64>, f64)> {
    if pts.len() < 3 {
        return None;
    }
    let mean = pts.iter().fold(Vector3::zeros(), |a, p| a + p.coords) / pts.len() as f64;
    let cov = pts.iter().fold(Matrix3::zeros(), |a, p| {
        let d = p.coords - mean;
        a + d * d.transpose()
    });
    let eig = SymmetricEigen::new(cov);
    let k = eig.eigenvalues.imin();
    let normal = eig.eigenvectors.column(k).try_normalize(1e-12)?;
    Some((normal, -normal.dot(&mean)))
}
