use nalgebra::{Matrix3, Vector3};

use super::Point3;
use crate::error::{Error, Result};

const UNIT_NORM_TOL: f64 = 1e-6;

/// An immutable point cloud with optional per-point attributes.
///
/// Attribute arrays are parallel to `points` whenever present.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Point3>,
    colors: Option<Vec<[u8; 3]>>,
    intensities: Option<Vec<f64>>,
    normals: Option<Vec<Vector3<f64>>>,
}

/// Luminance proxy used by the color cue: `round((r + g + b) / 3)`.
pub fn rgb_intensity(c: [u8; 3]) -> f64 {
    ((c[0] as f64 + c[1] as f64 + c[2] as f64) / 3.0).round()
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.coords.iter().all(|v| v.is_finite())) {
            return Err(Error::InvalidValue(format!("non-finite coordinate at point {i}")));
        }
        Ok(Self {
            points,
            ..Default::default()
        })
    }

    pub fn with_colors(mut self, colors: Vec<[u8; 3]>) -> Result<Self> {
        self.check_len(colors.len())?;
        self.colors = Some(colors);
        Ok(self)
    }

    pub fn with_intensities(mut self, intensities: Vec<f64>) -> Result<Self> {
        self.check_len(intensities.len())?;
        if intensities.iter().any(|v| !v.is_finite() || *v < 0.0 || *v > 255.0) {
            return Err(Error::InvalidValue("intensity outside 0..=255".into()));
        }
        self.intensities = Some(intensities);
        Ok(self)
    }

    /// Derives intensities from colors. No-op when colors are absent.
    pub fn with_intensity_from_colors(mut self) -> Self {
        if let Some(colors) = &self.colors {
            self.intensities = Some(colors.iter().copied().map(rgb_intensity).collect());
        }
        self
    }

    pub fn with_normals(mut self, normals: Vec<Vector3<f64>>) -> Result<Self> {
        self.check_len(normals.len())?;
        if let Some(i) = normals
            .iter()
            .position(|n| (n.norm() - 1.0).abs() > UNIT_NORM_TOL)
        {
            return Err(Error::InvalidValue(format!("normal {i} is not unit length")));
        }
        self.normals = Some(normals);
        Ok(self)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.points.len() {
            return Err(Error::InconsistentDimension {
                expected: self.points.len(),
                got: len,
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn colors(&self) -> Option<&[[u8; 3]]> {
        self.colors.as_deref()
    }

    pub fn intensities(&self) -> Option<&[f64]> {
        self.intensities.as_deref()
    }

    pub fn normals(&self) -> Option<&[Vector3<f64>]> {
        self.normals.as_deref()
    }

    /// Sub-cloud of the given indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            colors: self
                .colors
                .as_ref()
                .map(|c| indices.iter().map(|&i| c[i]).collect()),
            intensities: self
                .intensities
                .as_ref()
                .map(|c| indices.iter().map(|&i| c[i]).collect()),
            normals: self
                .normals
                .as_ref()
                .map(|c| indices.iter().map(|&i| c[i]).collect()),
        }
    }

    /// Concatenates two clouds. Attributes survive only if both sides carry them.
    pub fn concat(&self, other: &Self) -> Self {
        fn join<T: Clone>(a: &Option<Vec<T>>, b: &Option<Vec<T>>) -> Option<Vec<T>> {
            match (a, b) {
                (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
                _ => None,
            }
        }
        Self {
            points: self.points.iter().chain(&other.points).copied().collect(),
            colors: join(&self.colors, &other.colors),
            intensities: join(&self.intensities, &other.intensities),
            normals: join(&self.normals, &other.normals),
        }
    }

    pub fn centroid(&self) -> Option<Point3> {
        if self.points.is_empty() {
            return None;
        }
        let sum = self
            .points
            .iter()
            .fold(Vector3::zeros(), |acc, p| acc + p.coords);
        Some(Point3::from(sum / self.points.len() as f64))
    }

    /// Axis-aligned bounds `(min, max)`.
    pub fn bounds(&self) -> Option<(Point3, Point3)> {
        let first = *self.points.first()?;
        Some(self.points.iter().fold((first, first), |(lo, hi), p| {
            (lo.inf(p), hi.sup(p))
        }))
    }

    pub(crate) fn map_rigid(&self, r: &Matrix3<f64>, t: &Vector3<f64>) -> Self {
        Self {
            points: self.points.iter().map(|p| Point3::from(r * p.coords + t)).collect(),
            colors: self.colors.clone(),
            intensities: self.intensities.clone(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| ns.iter().map(|n| (r * n).normalize()).collect()),
        }
    }

    pub(crate) fn replace_normals(mut self, normals: Vec<Vector3<f64>>) -> Self {
        debug_assert_eq!(normals.len(), self.points.len());
        self.normals = Some(normals);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intensity_is_rounded_mean() {
        assert_eq!(rgb_intensity([0, 0, 0]), 0.0);
        assert_eq!(rgb_intensity([255, 255, 255]), 255.0);
        assert_eq!(rgb_intensity([10, 11, 11]), 11.0);
    }

    #[test]
    fn rejects_ragged_attributes() {
        let c = PointCloud::new(vec![Point3::origin(); 3]).unwrap();
        assert!(c.clone().with_colors(vec![[0; 3]; 2]).is_err());
        assert!(c.with_normals(vec![Vector3::x() * 2.0; 3]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(PointCloud::new(vec![Point3::new(f64::NAN, 0.0, 0.0)]).is_err());
    }

    #[test]
    fn select_keeps_attributes_aligned() {
        let c = PointCloud::new(vec![Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0)])
            .unwrap()
            .with_colors(vec![[1, 2, 3], [4, 5, 6]])
            .unwrap()
            .with_intensity_from_colors();
        let s = c.select(&[1]);
        assert_eq!(s.points()[0].x, 1.0);
        assert_eq!(s.colors().unwrap()[0], [4, 5, 6]);
        assert_eq!(s.intensities().unwrap()[0], 5.0);
    }
}
