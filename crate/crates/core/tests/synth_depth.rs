mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rgbd_weak::geometry::{Point3, PointCloud};
use rgbd_weak::synth::{
    hidden_point_removal, render_depth, DEFAULT_HPR_GAMMA, render_views, sample_surface, sample_surface_with_faces,
    RenderConfig, TriangleMesh,
};

fn random_sphere(n: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..n)
        .map(|_| loop {
            let v = nalgebra::Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 1e-3 && n <= 1.0 {
                break Point3::from(v / n);
            }
        })
        .collect();
    PointCloud::new(pts).unwrap()
}

#[test]
fn hpr_sphere_front_visible_back_hidden() {
    let cloud = random_sphere(2000, 1);
    let visible = hidden_point_removal(&cloud, &Point3::new(0.0, 0.0, 5.0), DEFAULT_HPR_GAMMA).unwrap();
    let mut vis = vec![false; cloud.len()];
    visible.iter().for_each(|&i| vis[i] = true);
    let (mut front, mut front_vis, mut back, mut back_vis) = (0, 0, 0, 0);
    for (p, v) in cloud.points().iter().zip(&vis) {
        if p.z > 0.2 {
            front += 1;
            front_vis += *v as usize;
        } else if p.z < -0.2 {
            back += 1;
            back_vis += *v as usize;
        }
    }
    let f = front_vis as f64 / front as f64;
    let b = back_vis as f64 / back as f64;
    assert!(f >= 0.95, "front visible fraction {f}");
    assert!(b <= 0.05, "back visible fraction {b}");
}

fn cube_cloud(per_face: usize) -> PointCloud {
    let mesh = TriangleMesh::cube(Point3::origin(), 0.5);
    sample_surface(&mesh, per_face * 6, 0.0, 4).unwrap()
}

#[test]
fn hpr_cube_back_face_removed() {
    let cloud = cube_cloud(400);
    let visible = hidden_point_removal(&cloud, &Point3::new(0.0, 0.0, 5.0), DEFAULT_HPR_GAMMA).unwrap();
    for &i in &visible {
        let p = cloud.points()[i];
        let back_interior = p.z < -0.499 && p.x.abs() < 0.45 && p.y.abs() < 0.45;
        assert!(!back_interior, "back-face point {p:?} marked visible");
    }
}

#[test]
fn hpr_agrees_with_ray_oracle_on_convex_shapes() {
    for (name, cloud, view) in [
        ("sphere", random_sphere(1500, 7), Point3::new(0.3, -0.2, 4.0)),
        ("cube", cube_cloud(250), Point3::new(2.0, 1.5, 3.0)),
    ] {
        let radius = 2.0 * common::median_nn_spacing(&cloud);
        let oracle = common::ray_visibility(&cloud, &view, radius);
        let visible = hidden_point_removal(&cloud, &view, DEFAULT_HPR_GAMMA).unwrap();
        let mut vis = vec![false; cloud.len()];
        visible.iter().for_each(|&i| vis[i] = true);
        let agree = vis.iter().zip(&oracle).filter(|(a, b)| a == b).count();
        let frac = agree as f64 / cloud.len() as f64;
        assert!(frac >= 0.90, "{name}: agreement {frac}");
    }
}

#[test]
fn zbuffer_is_monotone_under_insertion() {
    let cam = rgbd_weak::geometry::CameraModel::pinhole(100.0, 100.0, 50.0, 50.0, 100, 100).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut pts: Vec<Point3> = (0..300)
        .map(|_| Point3::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), rng.random_range(0.5..2.0)))
        .collect();
    let before = render_depth(&PointCloud::new(pts.clone()).unwrap(), &cam);
    pts.push(Point3::new(0.01, -0.02, 0.7));
    let after = render_depth(&PointCloud::new(pts).unwrap(), &cam);
    for (a, b) in before.data().iter().zip(after.data()) {
        assert!(*a == 0 || b <= a);
    }
}

#[test]
fn sampled_face_counts_track_area() {
    // Triangles with areas 1 : 2 : 5.
    let v = vec![
        Point3::new(0.0, 0.0, 0.0),
        Point3::new(1.0, 0.0, 0.0),
        Point3::new(0.0, 2.0, 0.0),
        Point3::new(0.0, 0.0, 1.0),
        Point3::new(2.0, 0.0, 1.0),
        Point3::new(0.0, 2.0, 1.0),
        Point3::new(0.0, 0.0, 2.0),
        Point3::new(5.0, 0.0, 2.0),
        Point3::new(0.0, 2.0, 2.0),
    ];
    let mesh = TriangleMesh::new(v, vec![[0, 1, 2], [3, 4, 5], [6, 7, 8]]).unwrap();
    let n = 20_000;
    let (_, faces) = sample_surface_with_faces(&mesh, n, 0.0, 12).unwrap();
    for (f, share) in [(0usize, 1.0 / 8.0), (1, 2.0 / 8.0), (2, 5.0 / 8.0)] {
        let count = faces.iter().filter(|&&x| x == f).count() as f64;
        let mean = n as f64 * share;
        let sd = (n as f64 * share * (1.0 - share)).sqrt();
        assert!((count - mean).abs() <= 4.0 * sd, "face {f}: {count} vs {mean}");
    }
}

#[test]
fn render_views_sphere_defaults() {
    let mesh = TriangleMesh::icosphere(Point3::origin(), 1.0, 4);
    let cfg = RenderConfig::default();
    let views = render_views(&mesh, &cfg, 5).unwrap();
    assert_eq!(views.len(), 30);
    for v in &views {
        assert_eq!((v.image.width(), v.image.height()), (224, 224));
        let center_hits = (107..117)
            .flat_map(|y| (107..117).map(move |x| (x, y)))
            .filter(|&(x, y)| v.image.get(x, y) > 0)
            .count();
        assert!(center_hits > 0);
    }
}

#[test]
fn render_views_is_deterministic() {
    let mesh = TriangleMesh::cube(Point3::origin(), 0.3);
    let cfg = RenderConfig {
        sample_count: 5000,
        ..Default::default()
    };
    assert_eq!(render_views(&mesh, &cfg, 9).unwrap(), render_views(&mesh, &cfg, 9).unwrap());
}
