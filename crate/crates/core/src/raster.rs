//! Binary masks and 16-bit depth rasters.

use crate::error::{Error, Result};
use crate::geometry::CameraModel;

/// Row-major binary raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::InconsistentDimension {
                expected: width * height,
                got: bits.len(),
            });
        }
        Ok(Self { width, height, bits })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, u: usize, v: usize) -> bool {
        self.bits[v * self.width + u]
    }

    pub fn set(&mut self, u: usize, v: usize, on: bool) {
        self.bits[v * self.width + u] = on;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn intersection_count(&self, other: &Mask) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| **a && **b)
            .count()
    }

    pub fn union_with(&mut self, other: &Mask) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
    }

    /// Tight `(u_min, v_min, u_max, v_max)` bounds of the set pixels.
    pub fn bbox(&self) -> Option<BoundingBox> {
        let mut bb: Option<BoundingBox> = None;
        for v in 0..self.height {
            for u in 0..self.width {
                if self.get(u, v) {
                    bb = Some(match bb {
                        None => BoundingBox::point(u, v),
                        Some(b) => b.include(u, v),
                    });
                }
            }
        }
        bb
    }
}

/// Inclusive integer pixel box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BoundingBox {
    pub u_min: usize,
    pub v_min: usize,
    pub u_max: usize,
    pub v_max: usize,
}

impl BoundingBox {
    pub fn point(u: usize, v: usize) -> Self {
        Self {
            u_min: u,
            v_min: v,
            u_max: u,
            v_max: v,
        }
    }

    pub fn include(self, u: usize, v: usize) -> Self {
        Self {
            u_min: self.u_min.min(u),
            v_min: self.v_min.min(v),
            u_max: self.u_max.max(u),
            v_max: self.v_max.max(v),
        }
    }

    pub fn width(&self) -> usize {
        self.u_max - self.u_min + 1
    }

    pub fn height(&self) -> usize {
        self.v_max - self.v_min + 1
    }
}

/// Range image in millimeters; 0 marks pixels with no return.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    width: usize,
    height: usize,
    depth_mm: Vec<u16>,
    camera: CameraModel,
}

impl DepthImage {
    pub fn new(width: usize, height: usize, depth_mm: Vec<u16>, camera: CameraModel) -> Result<Self> {
        if depth_mm.len() != width * height {
            return Err(Error::InconsistentDimension {
                expected: width * height,
                got: depth_mm.len(),
            });
        }
        Ok(Self {
            width,
            height,
            depth_mm,
            camera,
        })
    }

    pub fn zeros(camera: CameraModel) -> Self {
        let (w, h) = (camera.width(), camera.height());
        Self {
            width: w,
            height: h,
            depth_mm: vec![0; w * h],
            camera,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn camera(&self) -> &CameraModel {
        &self.camera
    }

    pub fn data(&self) -> &[u16] {
        &self.depth_mm
    }

    pub fn get(&self, u: usize, v: usize) -> u16 {
        self.depth_mm[v * self.width + u]
    }

    pub(crate) fn data_mut(&mut self) -> &mut [u16] {
        &mut self.depth_mm
    }

    pub fn valid_count(&self) -> usize {
        self.depth_mm.iter().filter(|d| **d > 0).count()
    }

    /// Copies the inclusive box `bb` out as a new `width × height` buffer.
    pub fn crop(&self, bb: &BoundingBox) -> DepthCrop {
        let mut out = Vec::with_capacity(bb.width() * bb.height());
        for v in bb.v_min..=bb.v_max {
            for u in bb.u_min..=bb.u_max {
                out.push(self.get(u, v));
            }
        }
        DepthCrop {
            width: bb.width(),
            height: bb.height(),
            depth_mm: out,
        }
    }
}

/// Depth region without camera metadata, as consumed by the depth descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthCrop {
    pub width: usize,
    pub height: usize,
    pub depth_mm: Vec<u16>,
}

impl DepthCrop {
    pub fn get(&self, u: usize, v: usize) -> u16 {
        self.depth_mm[v * self.width + u]
    }
}

impl From<&DepthImage> for DepthCrop {
    fn from(d: &DepthImage) -> Self {
        DepthCrop {
            width: d.width,
            height: d.height,
            depth_mm: d.depth_mm.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bbox_is_tight() {
        let mut m = Mask::new(10, 8);
        assert!(m.bbox().is_none());
        m.set(3, 2, true);
        m.set(7, 5, true);
        assert_eq!(
            m.bbox().unwrap(),
            BoundingBox {
                u_min: 3,
                v_min: 2,
                u_max: 7,
                v_max: 5
            }
        );
        assert_eq!(m.count(), 2);
    }

    #[test]
    fn crop_extracts_box() {
        let cam = CameraModel::pinhole(1.0, 1.0, 0.0, 0.0, 3, 2).unwrap();
        let d = DepthImage::new(3, 2, vec![1, 2, 3, 4, 5, 6], cam).unwrap();
        let c = d.crop(&BoundingBox {
            u_min: 1,
            v_min: 0,
            u_max: 2,
            v_max: 1,
        });
        assert_eq!(c.depth_mm, vec![2, 3, 5, 6]);
    }
}
