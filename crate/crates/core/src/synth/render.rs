use image::{Rgb, RgbImage};
use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{hidden_point_removal, sample_surface, TriangleMesh, DEFAULT_HPR_GAMMA};
use crate::error::{Error, Result};
use crate::geometry::{rot_x, rot_y, rot_z, CameraModel, Point3, PointCloud};
use crate::raster::DepthImage;

/// Virtual-camera rig and sampling parameters for synthetic depth views.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    pub sample_count: usize,
    /// Per-coordinate noise in meters; `None` means 0.5% of the bounding
    /// sphere radius.
    pub noise_sigma: Option<f64>,
    pub rolls: Vec<f64>,
    pub pitch: f64,
    pub yaw_start: f64,
    pub yaw_end: f64,
    pub yaw_step: f64,
    pub camera_distance_factor: f64,
    pub image_size: usize,
    pub focal: f64,
    pub principal: (f64, f64),
    pub output_size: usize,
    pub hpr_gamma: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            sample_count: 40_000,
            noise_sigma: None,
            rolls: vec![270.0, 240.0, 210.0],
            pitch: 0.0,
            yaw_start: 0.0,
            yaw_end: 360.0,
            yaw_step: 36.0,
            camera_distance_factor: 2.5,
            image_size: 500,
            focal: 500.0,
            principal: (250.0, 250.0),
            output_size: 224,
            hpr_gamma: DEFAULT_HPR_GAMMA,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("render: {m}")));
        if self.sample_count == 0 {
            return bad("sample_count must be > 0");
        }
        if !(self.yaw_step > 0.0) {
            return bad("yaw_step must be > 0");
        }
        if self.image_size == 0 || self.output_size == 0 {
            return bad("image sizes must be > 0");
        }
        if !(self.focal > 0.0) {
            return bad("focal must be > 0");
        }
        if !(self.camera_distance_factor > 1.0) {
            return bad("camera_distance_factor must exceed 1");
        }
        if self.rolls.is_empty() {
            return bad("at least one roll angle is required");
        }
        if matches!(self.noise_sigma, Some(s) if !(s >= 0.0)) {
            return bad("noise_sigma must be >= 0");
        }
        Ok(())
    }

    pub fn yaws(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0usize;
        loop {
            let yaw = self.yaw_start + k as f64 * self.yaw_step;
            if yaw >= self.yaw_end - 1e-9 {
                break;
            }
            out.push(yaw);
            k += 1;
        }
        out
    }

    fn base_camera(&self) -> Result<CameraModel> {
        CameraModel::pinhole(
            self.focal,
            self.focal,
            self.principal.0,
            self.principal.1,
            self.image_size,
            self.image_size,
        )
    }
}

/// Euler angles of one generated view, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewPose {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

/// One posed camera per `(roll, yaw)` pair, looking at the sphere center.
///
/// The camera-to-world rotation is `Rz(yaw)·Ry(pitch)·Rx(roll)` applied to a
/// camera looking down +z with +y pointing down the image; the optical
/// center sits `camera_distance_factor · radius` back along the viewing axis.
/// With z up, rolls of 270°, 240° and 210° place cameras 0°, 30° and 60°
/// above the horizon.
pub fn generate_poses(config: &RenderConfig, center: &Point3, radius: f64) -> Result<Vec<(ViewPose, CameraModel)>> {
    if !(radius > 0.0) {
        return Err(Error::InvalidValue(format!("bounding radius {radius}")));
    }
    let base = config.base_camera()?;
    let distance = config.camera_distance_factor * radius;
    let mut out = Vec::new();
    for &roll in &config.rolls {
        for yaw in config.yaws() {
            let cam_to_world = rot_z(yaw) * rot_y(config.pitch) * rot_x(roll);
            let forward = cam_to_world * Vector3::z();
            let eye = center - forward * distance;
            let r_cw = look_at(&eye, center, &(cam_to_world * Vector3::y()));
            let r = r_cw.transpose();
            let t = -(r * eye.coords);
            out.push((
                ViewPose {
                    roll,
                    pitch: config.pitch,
                    yaw,
                },
                base.with_pose(r, t)?,
            ));
        }
    }
    Ok(out)
}

/// Camera-to-world rotation whose +z axis points from `eye` to `target` and
/// whose +y axis is as close as possible to `down`.
pub fn look_at(eye: &Point3, target: &Point3, down: &Vector3<f64>) -> Matrix3<f64> {
    let z = (target - eye).normalize();
    let mut y = down - z * z.dot(down);
    if y.norm() < 1e-9 {
        let alt = if z.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        y = alt - z * z.dot(&alt);
    }
    let y = y.normalize();
    let x = y.cross(&z);
    Matrix3::from_columns(&[x, y, z])
}

/// Z-buffered point rasterization to millimeter depth.
pub fn render_depth(cloud: &PointCloud, camera: &CameraModel) -> DepthImage {
    let mut img = DepthImage::zeros(camera.clone());
    let (w, h) = (camera.width(), camera.height());
    let buf = img.data_mut();
    for p in cloud.points() {
        let Ok(proj) = camera.project(p) else {
            continue;
        };
        let Some((u, v)) = proj.pixel(w, h) else {
            continue;
        };
        let mm = (proj.d * 1000.0).round().clamp(1.0, u16::MAX as f64) as u16;
        let slot = &mut buf[v * w + u];
        if *slot == 0 || mm < *slot {
            *slot = mm;
        }
    }
    img
}

/// Z-buffered color rasterization; pixels without a return stay black.
pub fn render_rgb(cloud: &PointCloud, camera: &CameraModel) -> Result<RgbImage> {
    let colors = cloud.colors().ok_or(Error::UnpreparedCloud("colors"))?;
    let (w, h) = (camera.width(), camera.height());
    let mut depth = vec![f64::INFINITY; w * h];
    let mut img = RgbImage::new(w as u32, h as u32);
    for (p, c) in cloud.points().iter().zip(colors) {
        let Ok(proj) = camera.project(p) else {
            continue;
        };
        let Some((u, v)) = proj.pixel(w, h) else {
            continue;
        };
        if proj.d < depth[v * w + u] {
            depth[v * w + u] = proj.d;
            img.put_pixel(u as u32, v as u32, Rgb(*c));
        }
    }
    Ok(img)
}

/// Bilinear resize treating zero as missing: only nonzero neighbours
/// contribute, with their weights renormalized.
pub fn resize_depth(img: &DepthImage, out_w: usize, out_h: usize) -> Result<DepthImage> {
    let (w, h) = (img.width(), img.height());
    let (sx, sy) = (w as f64 / out_w as f64, h as f64 / out_h as f64);
    let mut out = vec![0u16; out_w * out_h];
    for y in 0..out_h {
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (h - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let ty = fy - y0 as f64;
        for x in 0..out_w {
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (w - 1) as f64);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let tx = fx - x0 as f64;
            let taps = [
                (x0, y0, (1.0 - tx) * (1.0 - ty)),
                (x1, y0, tx * (1.0 - ty)),
                (x0, y1, (1.0 - tx) * ty),
                (x1, y1, tx * ty),
            ];
            let (mut acc, mut wsum) = (0.0, 0.0);
            for (u, v, wt) in taps {
                let d = img.get(u, v);
                if d > 0 && wt > 0.0 {
                    acc += wt * d as f64;
                    wsum += wt;
                }
            }
            if wsum > 0.0 {
                out[y * out_w + x] = (acc / wsum).round().clamp(1.0, u16::MAX as f64) as u16;
            }
        }
    }
    let cam = img.camera();
    let k = cam.intrinsics();
    let scaled = Matrix3::new(
        k[(0, 0)] / sx,
        k[(0, 1)] / sx,
        (k[(0, 2)] + 0.5) / sx - 0.5,
        0.0,
        k[(1, 1)] / sy,
        (k[(1, 2)] + 0.5) / sy - 0.5,
        0.0,
        0.0,
        1.0,
    );
    let cam = CameraModel::new(scaled, *cam.rotation(), *cam.translation(), out_w, out_h)?;
    DepthImage::new(out_w, out_h, out, cam)
}

/// A rendered, resized view with its pose.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedView {
    pub pose: ViewPose,
    pub image: DepthImage,
}

/// Samples the mesh surface, then for every pose removes hidden points,
/// rasterizes and resizes to `output_size`.
pub fn render_views(mesh: &TriangleMesh, config: &RenderConfig, seed: u64) -> Result<Vec<RenderedView>> {
    config.validate()?;
    let (center, radius) = mesh.bounding_sphere().ok_or(Error::EmptyMesh)?;
    let noise = config.noise_sigma.unwrap_or(0.005 * radius);
    let cloud = sample_surface(mesh, config.sample_count, noise, seed)?;
    let poses = generate_poses(config, &center, radius)?;
    poses
        .into_par_iter()
        .map(|(pose, camera)| {
            let in_cam = crate::geometry::transform_cloud(camera.rotation(), camera.translation(), &cloud)?;
            let visible = hidden_point_removal(&in_cam, &Point3::origin(), config.hpr_gamma)?;
            let full = render_depth(&cloud.select(&visible), &camera);
            let image = resize_depth(&full, config.output_size, config.output_size)?;
            Ok(RenderedView { pose, image })
        })
        .collect()
}
