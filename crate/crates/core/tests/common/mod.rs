#![allow(dead_code)]

use rgbd_weak::geometry::{Point3, PointCloud};

/// Brute-force ray occlusion with points as balls of `radius`: a point is
/// hidden when the segment from the viewpoint passes through the ball of
/// another point nearer the viewer. Balls within `3·radius` of the target
/// belong to its own surface patch and are not treated as occluders.
pub fn ray_visibility(cloud: &PointCloud, viewpoint: &Point3, radius: f64) -> Vec<bool> {
    let pts = cloud.points();
    pts.iter()
        .enumerate()
        .map(|(i, p)| {
            let seg = p - viewpoint;
            let len = seg.norm();
            let dir = seg / len;
            !pts.iter().enumerate().any(|(j, q)| {
                if i == j || (q - p).norm() <= 3.0 * radius {
                    return false;
                }
                let rel = q - viewpoint;
                let along = rel.dot(&dir);
                if along <= 0.0 || along >= len {
                    return false;
                }
                (rel - dir * along).norm() < radius
            })
        })
        .collect()
}

pub fn median_nn_spacing(cloud: &PointCloud) -> f64 {
    let pts = cloud.points();
    let mut d: Vec<f64> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            pts.iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| (p - q).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    d.sort_by(f64::total_cmp);
    d[d.len() / 2]
}

pub fn fibonacci_sphere(n: usize, radius: f64) -> Vec<Point3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let (s, c) = (golden * i as f64).sin_cos();
            Point3::new(r * c * radius, r * s * radius, z * radius)
        })
        .collect()
}

/// Acklam's rational approximation to Φ⁻¹, polished with one Halley step.
pub fn inv_norm_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1, 2.209460984245205e2, -2.759285104469687e2,
        1.383577518672690e2, -3.066479806614716e1, 2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1, 1.615858368580409e2, -1.556989798598866e2,
        6.680131188771972e1, -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3, -3.223964580411365e-1, -2.400758277161838,
        -2.549732539343734, 4.374664141464968, 2.938163982698783,
    ];
    const D: [f64; 4] = [7.784695709041462e-3, 3.224671290700398e-1, 2.445134137142996, 3.754408661907416];
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let x = if p < 0.02425 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p > 1.0 - 0.02425 {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let e = 0.5 * libm::erfc(-x / std::f64::consts::SQRT_2) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

fn phi(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// `P(X > 0 componentwise)` for `X ~ N(0, cov)`, by Genz's sequential
/// conditioning with a randomly shifted Richtmyer lattice.
/// Returns the estimate and its standard error over shifts.
pub fn orthant_probability(cov: &nalgebra::DMatrix<f64>, points: usize, shifts: usize, seed: u64) -> (f64, f64) {
    use rand::{Rng, SeedableRng};
    const PRIMES: [f64; 12] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0];
    let n = cov.nrows();
    assert!(n <= PRIMES.len() + 1);
    let c = cov.clone().cholesky().expect("covariance must be PD").l();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut estimates = Vec::with_capacity(shifts);
    let mut y = vec![0.0; n];
    for _ in 0..shifts {
        let shift: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let mut sum = 0.0;
        for k in 1..=points {
            let mut f = 1.0;
            for i in 0..n {
                let s: f64 = (0..i).map(|j| c[(i, j)] * y[j]).sum();
                let d = phi(-s / c[(i, i)]);
                f *= 1.0 - d;
                if i + 1 < n {
                    let w = (k as f64 * PRIMES[i].sqrt() + shift[i]).fract();
                    let w = (2.0 * w - 1.0).abs();
                    y[i] = inv_norm_cdf(d + w * (1.0 - d));
                }
            }
            sum += f;
        }
        estimates.push(sum / points as f64);
    }
    let m = estimates.iter().sum::<f64>() / shifts as f64;
    let var = estimates.iter().map(|e| (e - m) * (e - m)).sum::<f64>() / (shifts * (shifts - 1)) as f64;
    (m, var.sqrt())
}

/// Exact probit-GP evidence `p(y | K)` via the orthant identity
/// `p(y) = P(diag(y)(f + ε) > 0)`, `f ~ N(0, K)`, `ε ~ N(0, I)`.
pub fn probit_evidence(k: &nalgebra::DMatrix<f64>, y: &[f64], seed: u64) -> f64 {
    let n = y.len();
    let mut cov = k.clone();
    for i in 0..n {
        cov[(i, i)] += 1.0;
        for j in 0..n {
            cov[(i, j)] *= y[i] * y[j];
        }
    }
    orthant_probability(&cov, 20_000, 12, seed).0
}

/// Result of running plane removal and clustering on one generated scene.
pub struct SceneOutcome {
    pub objects: usize,
    pub clusters: usize,
    /// Majority-owner share per cluster; the table counts as an owner.
    pub purities: Vec<f64>,
}

pub fn cluster_scene(seed: u64) -> SceneOutcome {
    use rgbd_weak::geometry::{estimate_normals, DEFAULT_NORMAL_NEIGHBORS};
    use rgbd_weak::objectness::{cluster_proposals, remove_planes, ClusteringParams, PlaneRemovalParams};
    use rgbd_weak::synthetic::{generate_random_scene, SceneConfig};
    use std::collections::BTreeMap;

    let scene = generate_random_scene(&SceneConfig::default(), seed).unwrap();
    let cloud = scene.cloud.clone().with_intensity_from_colors();
    let removal = remove_planes(&cloud, &PlaneRemovalParams::default(), seed).unwrap();
    let rest = estimate_normals(&removal.remaining, DEFAULT_NORMAL_NEIGHBORS, &scene.camera.center()).unwrap();
    let clusters = cluster_proposals(&rest, &ClusteringParams::default()).unwrap();
    let purities = clusters
        .iter()
        .map(|c| {
            let mut tally: BTreeMap<Option<usize>, usize> = BTreeMap::new();
            for &i in c {
                *tally.entry(scene.owners[removal.remaining_indices[i]]).or_default() += 1;
            }
            *tally.values().max().unwrap() as f64 / c.len() as f64
        })
        .collect();
    SceneOutcome {
        objects: scene.objects.len(),
        clusters: clusters.len(),
        purities,
    }
}

/// Connected components of the voxel connectability graph by exhaustive
/// pair testing and union-find, with the same size filters applied.
pub fn brute_force_clusters(
    cloud: &PointCloud,
    params: &rgbd_weak::objectness::ClusteringParams,
) -> Vec<Vec<usize>> {
    use rgbd_weak::objectness::{cues_connect, voxel_representatives};

    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = x;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }

    let reps = voxel_representatives(cloud, params.voxel_leaf).unwrap();
    let mut parent: Vec<usize> = (0..reps.len()).collect();
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            let (a, b) = (&reps[i], &reps[j]);
            let adjacent = (a.key.0 - b.key.0).abs() <= 1
                && (a.key.1 - b.key.1).abs() <= 1
                && (a.key.2 - b.key.2).abs() <= 1;
            if adjacent
                && cues_connect(&a.centroid, &a.normal, a.intensity, &b.centroid, &b.normal, b.intensity, params)
            {
                let (ra, rb) = (find(&mut parent, i), find(&mut parent, j));
                parent[ra] = rb;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..reps.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().extend(reps[i].members.iter().copied());
    }
    let pts = cloud.points();
    let mut out: Vec<Vec<usize>> = groups
        .into_values()
        .map(|mut g| {
            g.sort_unstable();
            g
        })
        .filter(|g| {
            let lo = g.iter().fold(pts[g[0]], |m, &i| m.inf(&pts[i]));
            let hi = g.iter().fold(pts[g[0]], |m, &i| m.sup(&pts[i]));
            g.len() >= params.min_cluster_points && (hi - lo).max() >= params.min_cluster_extent
        })
        .collect();
    out.sort();
    out
}

/// Small random cloud with mixed normals and intensities plus clustering
/// parameters, sized for the exhaustive oracle.
pub fn random_instance(seed: u64) -> (PointCloud, rgbd_weak::objectness::ClusteringParams) {
    use nalgebra::Vector3;
    use rand::{Rng, SeedableRng};
    use rgbd_weak::geometry::rot_x;
    use rgbd_weak::objectness::ClusteringParams;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(20..=200);
    let normals = [Vector3::z(), Vector3::x(), rot_x(7.0) * Vector3::z(), rot_x(25.0) * Vector3::z()];
    let levels = [40.0, 45.0, 100.0, 200.0];
    let mut pts = Vec::with_capacity(n);
    let mut ns = Vec::with_capacity(n);
    let mut is = Vec::with_capacity(n);
    for _ in 0..n {
        pts.push(Point3::new(
            rng.random_range(0.0..0.08),
            rng.random_range(0.0..0.08),
            rng.random_range(0.0..0.04),
        ));
        ns.push(normals[rng.random_range(0..normals.len())]);
        is.push(levels[rng.random_range(0..levels.len())]);
    }
    let cloud = PointCloud::new(pts)
        .unwrap()
        .with_normals(ns)
        .unwrap()
        .with_intensities(is)
        .unwrap();
    let params = ClusteringParams {
        min_cluster_points: rng.random_range(1..=5),
        min_cluster_extent: 0.005,
        ..Default::default()
    };
    (cloud, params)
}
