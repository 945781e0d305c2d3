//! Seeded tabletop scenes: a noisy support plane carrying separated balls,
//! boxes and cans, seen by a single RGB-D camera, with exact per-point
//! ownership and ground-truth instance masks.

use std::path::Path;

use image::RgbImage;
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CameraModel, Point3, PointCloud};
use crate::io::{png, write_camera, write_off, write_ply};
use crate::metrics::{write_mask_index, IndexedFrame, IndexedMask, MaskIndex};
use crate::raster::{DepthImage, Mask};
use crate::synth::{look_at, render_depth, render_rgb, sample_surface, TriangleMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectShape {
    Ball,
    Box,
    Can,
}

impl ObjectShape {
    pub const ALL: [ObjectShape; 3] = [ObjectShape::Ball, ObjectShape::Box, ObjectShape::Can];

    pub fn name(self) -> &'static str {
        match self {
            ObjectShape::Ball => "ball",
            ObjectShape::Box => "box",
            ObjectShape::Can => "can",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    // Palettes overlap on purpose so color alone does not decide the class.
    fn palette(self) -> &'static [[u8; 3]] {
        match self {
            ObjectShape::Ball => &[[210, 40, 35], [235, 190, 40], [240, 120, 30]],
            ObjectShape::Box => &[[40, 70, 190], [150, 100, 55], [235, 190, 40]],
            ObjectShape::Can => &[[40, 160, 60], [210, 40, 35], [200, 200, 210]],
        }
    }

    /// Canonical mesh resting on `z = 0` around the origin.
    pub fn canonical_mesh(self) -> TriangleMesh {
        match self {
            ObjectShape::Ball => TriangleMesh::icosphere(Point3::new(0.0, 0.0, 0.045), 0.045, 3),
            ObjectShape::Box => TriangleMesh::cuboid(Point3::new(0.0, 0.0, 0.06), Vector3::new(0.045, 0.035, 0.06)),
            ObjectShape::Can => TriangleMesh::cylinder(Point3::new(0.0, 0.0, 0.06), 0.035, 0.12, 32),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    /// Table extent along x and y, meters.
    pub table_size: (f64, f64),
    /// Surface samples per square meter.
    pub point_density: f64,
    pub noise_sigma: f64,
    /// Minimum free space between object footprints.
    pub min_gap: f64,
    pub image_width: usize,
    pub image_height: usize,
    pub focal: f64,
    pub camera_distance: f64,
    /// Degrees above the table plane.
    pub camera_elevation: f64,
    /// Drop points the camera cannot see.
    pub visible_only: bool,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            table_size: (0.8, 0.6),
            point_density: 30_000.0,
            noise_sigma: 0.001,
            min_gap: 0.05,
            image_width: 256,
            image_height: 192,
            focal: 240.0,
            camera_distance: 1.0,
            camera_elevation: 55.0,
            visible_only: true,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("scene: {m}")));
        if !(self.table_size.0 > 0.0 && self.table_size.1 > 0.0) {
            return bad("table_size must be > 0");
        }
        if !(self.point_density > 0.0) {
            return bad("point_density must be > 0");
        }
        if !(self.noise_sigma >= 0.0 && self.min_gap >= 0.0) {
            return bad("noise_sigma and min_gap must be >= 0");
        }
        if !(self.camera_elevation > 0.0 && self.camera_elevation <= 90.0) {
            return bad("camera_elevation must be in (0, 90]");
        }
        if !(self.camera_distance > 0.0) {
            return bad("camera_distance must be > 0");
        }
        Ok(())
    }

    pub fn camera(&self) -> Result<CameraModel> {
        let target = Point3::new(0.0, 0.0, 0.04);
        let el = self.camera_elevation.to_radians();
        let eye = target + Vector3::new(0.0, -el.cos(), el.sin()) * self.camera_distance;
        let r = look_at(&eye, &target, &-Vector3::z()).transpose();
        let k = Matrix3::new(
            self.focal,
            0.0,
            (self.image_width as f64 - 1.0) / 2.0,
            0.0,
            self.focal,
            (self.image_height as f64 - 1.0) / 2.0,
            0.0,
            0.0,
            1.0,
        );
        CameraModel::new(k, r, -(r * eye.coords), self.image_width, self.image_height)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub shape: ObjectShape,
    /// Footprint center on the table.
    pub position: Point3,
    pub color: [u8; 3],
    pub mesh: TriangleMesh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub cloud: PointCloud,
    /// Owning object per point; `None` for the table.
    pub owners: Vec<Option<usize>>,
    pub objects: Vec<SceneObject>,
    pub camera: CameraModel,
}

impl SyntheticScene {
    pub fn object_indices(&self, object: usize) -> Vec<usize> {
        (0..self.owners.len())
            .filter(|&i| self.owners[i] == Some(object))
            .collect()
    }

    /// One mask per object: the pixels where that object's points are
    /// nearest to the camera.
    pub fn instance_masks(&self) -> Vec<Mask> {
        let (w, h) = (self.camera.width(), self.camera.height());
        let mut depth = vec![f64::INFINITY; w * h];
        let mut owner: Vec<Option<usize>> = vec![None; w * h];
        for (p, o) in self.cloud.points().iter().zip(&self.owners) {
            let Ok(proj) = self.camera.project(p) else {
                continue;
            };
            if let Some((u, v)) = proj.pixel(w, h) {
                if proj.d < depth[v * w + u] {
                    depth[v * w + u] = proj.d;
                    owner[v * w + u] = *o;
                }
            }
        }
        (0..self.objects.len())
            .map(|k| {
                let bits = owner.iter().map(|o| *o == Some(k)).collect();
                Mask::from_bits(w, h, bits).expect("sized from camera")
            })
            .collect()
    }

    pub fn rgb_image(&self) -> RgbImage {
        render_rgb(&self.cloud, &self.camera).expect("scene clouds carry colors")
    }

    pub fn depth_image(&self) -> DepthImage {
        render_depth(&self.cloud, &self.camera)
    }
}

fn jitter_color(base: [u8; 3], amount: i32, rng: &mut impl Rng) -> [u8; 3] {
    base.map(|c| (c as i32 + rng.random_range(-amount..=amount)).clamp(0, 255) as u8)
}

fn footprint_radius(shape: ObjectShape, half: &Vector3<f64>) -> f64 {
    match shape {
        ObjectShape::Box => (half.x * half.x + half.y * half.y).sqrt(),
        _ => half.x,
    }
}

/// Random size and orientation for one instance, placed at the origin.
fn instance_mesh(shape: ObjectShape, rng: &mut impl Rng) -> (TriangleMesh, f64) {
    match shape {
        ObjectShape::Ball => {
            let r = rng.random_range(0.035..0.055);
            (TriangleMesh::icosphere(Point3::new(0.0, 0.0, r), r, 3), r)
        }
        ObjectShape::Box => {
            let half = Vector3::new(
                rng.random_range(0.03..0.06),
                rng.random_range(0.03..0.05),
                rng.random_range(0.04..0.08),
            );
            let yaw = crate::geometry::rot_z(rng.random_range(0.0..180.0));
            let m = TriangleMesh::cuboid(Point3::new(0.0, 0.0, half.z), half);
            let v = m.vertices().iter().map(|p| Point3::from(yaw * p.coords)).collect();
            let m = TriangleMesh::new(v, m.faces().to_vec()).expect("same topology");
            (m, footprint_radius(shape, &half))
        }
        ObjectShape::Can => {
            let r = rng.random_range(0.03..0.045);
            let h = rng.random_range(0.08..0.14);
            (TriangleMesh::cylinder(Point3::new(0.0, 0.0, h / 2.0), r, h, 32), r)
        }
    }
}

/// Builds one scene holding the listed objects in random, non-overlapping
/// spots on the table.
pub fn generate_scene(config: &SceneConfig, shapes: &[ObjectShape], seed: u64) -> Result<SyntheticScene> {
    config.validate()?;
    let camera = config.camera()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (tw, th) = config.table_size;
    let margin = 0.02;

    let mut placed: Vec<(Point3, f64)> = Vec::new();
    let mut objects = Vec::with_capacity(shapes.len());
    for &shape in shapes {
        let (mesh, rho) = instance_mesh(shape, &mut rng);
        let (lx, ly) = (tw / 2.0 - rho - margin, th / 2.0 - rho - margin);
        if lx <= 0.0 || ly <= 0.0 {
            return Err(Error::DegenerateGeometry("object larger than the table".into()));
        }
        let spot = (0..5000).find_map(|_| {
            let c = Point3::new(rng.random_range(-lx..lx), rng.random_range(-ly..ly), 0.0);
            let clear = placed
                .iter()
                .all(|(q, r)| (c - q).norm() >= rho + r + config.min_gap);
            clear.then_some(c)
        });
        let position = spot.ok_or_else(|| Error::DegenerateGeometry("no free spot left on the table".into()))?;
        placed.push((position, rho));
        let palette = shape.palette();
        let color = jitter_color(palette[rng.random_range(0..palette.len())], 15, &mut rng);
        let v = mesh.vertices().iter().map(|p| p + position.coords).collect();
        objects.push(SceneObject {
            shape,
            position,
            color,
            mesh: TriangleMesh::new(v, mesh.faces().to_vec())?,
        });
    }

    let table_color = [120u8, 110, 100];
    let n_table = (tw * th * config.point_density).round() as usize;
    let noise = Normal::new(0.0, config.noise_sigma).map_err(|e| Error::InvalidValue(e.to_string()))?;
    let mut points = Vec::new();
    let mut colors = Vec::new();
    let mut owners = Vec::new();
    for _ in 0..n_table {
        let (x, y) = (rng.random_range(-tw / 2.0..tw / 2.0), rng.random_range(-th / 2.0..th / 2.0));
        points.push(Point3::new(x, y, noise.sample(&mut rng)));
        colors.push(jitter_color(table_color, 3, &mut rng));
        owners.push(None);
    }
    for (k, obj) in objects.iter().enumerate() {
        let n = (obj.mesh.surface_area() * config.point_density).round() as usize;
        let cloud = sample_surface(&obj.mesh, n, config.noise_sigma, rng.random())?;
        for p in cloud.points() {
            points.push(*p);
            colors.push(jitter_color(obj.color, 3, &mut rng));
            owners.push(Some(k));
        }
    }

    let keep: Vec<usize> = if config.visible_only {
        visible_points(&points, &objects, &camera)
    } else {
        (0..points.len()).collect()
    };
    let cloud = PointCloud::new(keep.iter().map(|&i| points[i]).collect())?
        .with_colors(keep.iter().map(|&i| colors[i]).collect())?;
    Ok(SyntheticScene {
        cloud,
        owners: keep.iter().map(|&i| owners[i]).collect(),
        objects,
        camera,
    })
}

/// Scene with 2 to 6 objects of random shapes.
pub fn generate_random_scene(config: &SceneConfig, seed: u64) -> Result<SyntheticScene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ce9e);
    let n = rng.random_range(2..=6);
    let shapes: Vec<ObjectShape> = (0..n)
        .map(|_| ObjectShape::ALL[rng.random_range(0..ObjectShape::ALL.len())])
        .collect();
    generate_scene(config, &shapes, seed)
}

// Exact ray casting against the object meshes. Hits within `SELF_TOL` of
// the target are its own (noisy) surface.
fn visible_points(points: &[Point3], objects: &[SceneObject], camera: &CameraModel) -> Vec<usize> {
    const SELF_TOL: f64 = 0.005;
    let eye = camera.center();
    let spheres: Vec<(Point3, f64)> = objects
        .iter()
        .map(|o| o.mesh.bounding_sphere().expect("object meshes are non-empty"))
        .collect();
    (0..points.len())
        .into_par_iter()
        .filter(|&i| {
            let p = points[i];
            let on_screen = camera
                .project(&p)
                .ok()
                .and_then(|q| q.pixel(camera.width(), camera.height()))
                .is_some();
            if !on_screen {
                return false;
            }
            let seg = p - eye;
            let len = seg.norm();
            let dir = seg / len;
            !objects.iter().zip(&spheres).any(|(obj, (c, r))| {
                let along = (c - eye).dot(&dir).clamp(0.0, len);
                if (eye + dir * along - c).norm() > *r {
                    return false;
                }
                (0..obj.mesh.faces().len()).any(|f| {
                    matches!(ray_triangle(&eye, &dir, &obj.mesh.triangle(f)), Some(t) if t < len - SELF_TOL)
                })
            })
        })
        .collect()
}

// Moller-Trumbore; distance along the unit ray to the hit.
fn ray_triangle(origin: &Point3, dir: &Vector3<f64>, tri: &[Point3; 3]) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let h = dir.cross(&e2);
    let det = e1.dot(&h);
    if det.abs() < 1e-14 {
        return None;
    }
    let s = origin - tri[0];
    let u = s.dot(&h) / det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) / det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) / det;
    (t > 0.0).then_some(t)
}

/// Size of a generated fixture directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixtureSpec {
    pub scene: SceneConfig,
    pub train_frames_per_category: usize,
    pub max_objects_per_train_frame: usize,
    pub test_frames: usize,
    pub write_meshes: bool,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            scene: SceneConfig::default(),
            train_frames_per_category: 8,
            max_objects_per_train_frame: 3,
            test_frames: 6,
            write_meshes: true,
        }
    }
}

/// Writes a complete dataset directory:
///
/// ```text
/// camera.txt
/// train/<category>/<frame>.ply   single-category frames
/// test/<frame>.ply               mixed frames
/// test_gt/index.json             instance masks of the test frames
/// meshes/<category>.off          (optional)
/// ```
pub fn write_fixture(dir: impl AsRef<Path>, spec: &FixtureSpec, seed: u64) -> Result<()> {
    let dir = dir.as_ref();
    spec.scene.validate()?;
    if spec.max_objects_per_train_frame == 0 {
        return Err(Error::InvalidConfig("max_objects_per_train_frame must be > 0".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_camera(dir.join("camera.txt"), &spec.scene.camera()?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for shape in ObjectShape::ALL {
        for f in 0..spec.train_frames_per_category {
            let n = rng.random_range(1..=spec.max_objects_per_train_frame);
            let scene = generate_scene(&spec.scene, &vec![shape; n], rng.random())?;
            let path = dir.join("train").join(shape.name()).join(format!("{}_{f:03}.ply", shape.name()));
            write_ply(path, &scene.cloud)?;
        }
    }

    let mut index = MaskIndex {
        version: 1,
        frames: Vec::new(),
    };
    for f in 0..spec.test_frames {
        let id = format!("test_{f:03}");
        let scene = generate_random_scene(&spec.scene, rng.random())?;
        write_ply(dir.join("test").join(format!("{id}.ply")), &scene.cloud)?;
        let mut masks = Vec::new();
        for (k, mask) in scene.instance_masks().iter().enumerate() {
            if mask.count() == 0 {
                continue;
            }
            let rel = Path::new("masks").join(format!("{id}_{k}.png"));
            png::write_mask(dir.join("test_gt").join(&rel), mask)?;
            masks.push(IndexedMask {
                category: scene.objects[k].shape.name().to_string(),
                mask: rel,
            });
        }
        index.frames.push(IndexedFrame { id, masks });
    }
    write_mask_index(dir.join("test_gt").join("index.json"), &index)?;

    if spec.write_meshes {
        for shape in ObjectShape::ALL {
            write_off(dir.join("meshes").join(format!("{}.off", shape.name())), &shape.canonical_mesh())?;
        }
    }
    Ok(())
}
