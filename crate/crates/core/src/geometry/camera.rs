use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{check_rotation, Point3};
use crate::error::{Error, Result};

const MIN_DEPTH: f64 = 1e-9;

/// Pinhole camera with world-to-camera extrinsics.
///
/// A world point `p` lands on pixel `(u, v)` at depth `d` with
/// `d·[u, v, 1]ᵀ = C·(R·p + t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    intrinsics: Matrix3<f64>,
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
    width: usize,
    height: usize,
}

/// Continuous pixel coordinates plus depth along the optical axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelProjection {
    pub u: f64,
    pub v: f64,
    pub d: f64,
}

impl PixelProjection {
    /// Nearest integer pixel, if it falls inside a `width × height` raster.
    pub fn pixel(&self, width: usize, height: usize) -> Option<(usize, usize)> {
        let (u, v) = (self.u.round(), self.v.round());
        if u < 0.0 || v < 0.0 || u >= width as f64 || v >= height as f64 {
            return None;
        }
        Some((u as usize, v as usize))
    }
}

impl CameraModel {
    pub fn new(
        intrinsics: Matrix3<f64>,
        rotation: Matrix3<f64>,
        translation: Vector3<f64>,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        check_rotation(&rotation)?;
        if !(intrinsics[(0, 0)] > 0.0 && intrinsics[(1, 1)] > 0.0) {
            return Err(Error::InvalidCamera("focal lengths must be positive".into()));
        }
        if intrinsics.try_inverse().is_none() {
            return Err(Error::InvalidCamera("singular intrinsics".into()));
        }
        if translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCamera("non-finite translation".into()));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidCamera("zero-sized image".into()));
        }
        Ok(Self {
            intrinsics,
            rotation,
            translation,
            width,
            height,
        })
    }

    /// Camera at the world origin looking down +z.
    pub fn pinhole(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        Self::new(
            Matrix3::new(fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0),
            Matrix3::identity(),
            Vector3::zeros(),
            width,
            height,
        )
    }

    pub fn with_pose(&self, rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        Self::new(self.intrinsics, rotation, translation, self.width, self.height)
    }

    pub fn intrinsics(&self) -> &Matrix3<f64> {
        &self.intrinsics
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Optical center in world coordinates, `-Rᵀt`.
    pub fn center(&self) -> Point3 {
        Point3::from(-(self.rotation.transpose() * self.translation))
    }

    pub fn to_camera_frame(&self, p: &Point3) -> Vector3<f64> {
        self.rotation * p.coords + self.translation
    }

    pub fn project(&self, p: &Point3) -> Result<PixelProjection> {
        let q = self.intrinsics * self.to_camera_frame(p);
        let d = q.z;
        if d <= MIN_DEPTH {
            return Err(Error::BehindCamera(d));
        }
        Ok(PixelProjection {
            u: q.x / d,
            v: q.y / d,
            d,
        })
    }

    /// Inverse of [`project`](Self::project) for a known depth.
    pub fn back_project(&self, u: f64, v: f64, d: f64) -> Point3 {
        let k_inv = self
            .intrinsics
            .try_inverse()
            .expect("intrinsics validated as invertible");
        let cam = k_inv * Vector3::new(u * d, v * d, d);
        Point3::from(self.rotation.transpose() * (cam - self.translation))
    }

    /// Parses the plain-text camera format: 9 intrinsic values (row-major),
    /// 12 extrinsic values (`[R|t]` row-major), then width and height.
    /// Whitespace separated; `#` starts a comment.
    pub fn from_config_str(text: &str) -> std::result::Result<Self, String> {
        let values: Vec<f64> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace)
            .map(|tok| tok.parse::<f64>().map_err(|e| format!("bad number {tok:?}: {e}")))
            .collect::<std::result::Result<_, _>>()?;
        if values.len() != 23 {
            return Err(format!("expected 23 values, found {}", values.len()));
        }
        let k = Matrix3::from_row_slice(&values[..9]);
        let ext = &values[9..21];
        let r = Matrix3::new(
            ext[0], ext[1], ext[2], ext[4], ext[5], ext[6], ext[8], ext[9], ext[10],
        );
        let t = Vector3::new(ext[3], ext[7], ext[11]);
        let (w, h) = (values[21], values[22]);
        if w.fract() != 0.0 || h.fract() != 0.0 || w < 1.0 || h < 1.0 {
            return Err("width and height must be positive integers".into());
        }
        Self::new(k, r, t, w as usize, h as usize).map_err(|e| e.to_string())
    }

    pub fn to_config_string(&self) -> String {
        let k = &self.intrinsics;
        let r = &self.rotation;
        let t = &self.translation;
        let mut s = String::from("# intrinsics (row-major)\n");
        for i in 0..3 {
            s += &format!("{} {} {}\n", k[(i, 0)], k[(i, 1)], k[(i, 2)]);
        }
        s += "# extrinsics [R|t] (row-major)\n";
        for i in 0..3 {
            s += &format!("{} {} {} {}\n", r[(i, 0)], r[(i, 1)], r[(i, 2)], t[i]);
        }
        s += &format!("# width height\n{} {}\n", self.width, self.height);
        s
    }
}
