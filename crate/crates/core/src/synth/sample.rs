use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::TriangleMesh;
use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud};

/// Area-weighted uniform surface samples with isotropic Gaussian noise.
pub fn sample_surface(mesh: &TriangleMesh, n: usize, noise_sigma: f64, seed: u64) -> Result<PointCloud> {
    sample_surface_with_faces(mesh, n, noise_sigma, seed).map(|(cloud, _)| cloud)
}

/// Like [`sample_surface`], also returning the source face of each sample.
pub fn sample_surface_with_faces(
    mesh: &TriangleMesh,
    n: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<(PointCloud, Vec<usize>)> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::InvalidValue(format!("noise sigma {noise_sigma}")));
    }
    let mut cdf = Vec::with_capacity(mesh.faces().len());
    let mut acc = 0.0;
    for f in 0..mesh.faces().len() {
        acc += mesh.face_area(f);
        cdf.push(acc);
    }
    let total = acc;
    let noise = Normal::new(0.0, noise_sigma).expect("sigma validated");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(n);
    let mut faces = Vec::with_capacity(n);
    for _ in 0..n {
        let target = rng.random::<f64>() * total;
        let f = cdf.partition_point(|&c| c <= target).min(cdf.len() - 1);
        let [a, b, c] = mesh.triangle(f);
        let (r1, r2): (f64, f64) = (rng.random(), rng.random());
        let s = r1.sqrt();
        let on_face = a.coords * (1.0 - s) + b.coords * (s * (1.0 - r2)) + c.coords * (s * r2);
        let jitter = if noise_sigma > 0.0 {
            Vector3::new(
                noise.sample(&mut rng),
                noise.sample(&mut rng),
                noise.sample(&mut rng),
            )
        } else {
            Vector3::zeros()
        };
        pts.push(Point3::from(on_face + jitter));
        faces.push(f);
    }
    Ok((PointCloud::new(pts)?, faces))
}
