//! Fixed-length descriptors for RGB and depth crops, plus CSV interchange
//! for feature matrices computed elsewhere.

mod depth;
mod matrix;
mod rgb;

pub use depth::{extract_depth_features, DEPTH_DIM};
pub use matrix::{load_feature_matrix, write_feature_matrix, FeatureMatrix};
pub use rgb::{extract_rgb_features, RGB_DIM};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Rgb,
    Depth,
    Fused,
}

/// Feature values tagged with their modality. Fused vectors remember where
/// the RGB block ends so the product kernel can split them again.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    values: Vec<f64>,
    modality: Modality,
    split: Option<usize>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, modality: Modality) -> Result<Self> {
        if modality == Modality::Fused {
            return Err(Error::ModalityMismatch(
                "fused vectors are built with `fused` or `concat_features`".into(),
            ));
        }
        check_finite(&values)?;
        Ok(Self {
            values,
            modality,
            split: None,
        })
    }

    /// Fused vector whose first `split` values are the RGB block.
    pub fn fused(values: Vec<f64>, split: usize) -> Result<Self> {
        if split > values.len() {
            return Err(Error::InconsistentDimension {
                expected: split,
                got: values.len(),
            });
        }
        check_finite(&values)?;
        Ok(Self {
            values,
            modality: Modality::Fused,
            split: Some(split),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn split(&self) -> Option<usize> {
        self.split
    }

    /// `(rgb, depth)` blocks of a fused vector.
    pub fn blocks(&self) -> Option<(&[f64], &[f64])> {
        self.split.map(|s| self.values.split_at(s))
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::InvalidValue(format!("non-finite feature at index {i}"))),
        None => Ok(()),
    }
}

/// Describes a source of feature vectors.
pub trait FeatureProvider {
    fn name(&self) -> &str;
    fn dimension(&self) -> usize;
    fn modality(&self) -> Modality;
}

/// Built-in color/gradient descriptor for RGB crops.
#[derive(Debug, Clone, Copy, Default)]
pub struct HandcraftedRgb;

/// Built-in depth-histogram/gradient/normal descriptor for depth crops.
#[derive(Debug, Clone, Copy, Default)]
pub struct HandcraftedDepth;

impl FeatureProvider for HandcraftedRgb {
    fn name(&self) -> &str {
        "handcrafted-rgb"
    }
    fn dimension(&self) -> usize {
        RGB_DIM
    }
    fn modality(&self) -> Modality {
        Modality::Rgb
    }
}

impl FeatureProvider for HandcraftedDepth {
    fn name(&self) -> &str {
        "handcrafted-depth"
    }
    fn dimension(&self) -> usize {
        DEPTH_DIM
    }
    fn modality(&self) -> Modality {
        Modality::Depth
    }
}

/// Joins an RGB and a depth vector, RGB block first.
pub fn concat_features(rgb: &FeatureVector, depth: &FeatureVector) -> Result<FeatureVector> {
    if rgb.modality != Modality::Rgb || depth.modality != Modality::Depth {
        return Err(Error::ModalityMismatch(format!(
            "expected (rgb, depth), got ({:?}, {:?})",
            rgb.modality, depth.modality
        )));
    }
    let mut values = Vec::with_capacity(rgb.len() + depth.len());
    values.extend_from_slice(&rgb.values);
    values.extend_from_slice(&depth.values);
    FeatureVector::fused(values, rgb.len())
}

/// Scales to unit L2 norm; all-zero input is returned unchanged.
pub(crate) fn l2_normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Bin in `0..bins` for an angle in radians, wrapping at 2π.
pub(crate) fn angle_bin(theta: f64, bins: usize) -> usize {
    let t = theta.rem_euclid(std::f64::consts::TAU);
    ((t / std::f64::consts::TAU * bins as f64) as usize).min(bins - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concat_dims_and_order() {
        let r = FeatureVector::new((0..56).map(f64::from).collect(), Modality::Rgb).unwrap();
        let d = FeatureVector::new(vec![0.5; 32], Modality::Depth).unwrap();
        let f = concat_features(&r, &d).unwrap();
        assert_eq!(f.len(), 88);
        assert_eq!(f.split(), Some(56));
        assert_eq!(&f.values()[..56], r.values());
        assert_eq!(f.modality(), Modality::Fused);
    }

    #[test]
    fn concat_zeros() {
        let r = FeatureVector::new(vec![0.0; 4], Modality::Rgb).unwrap();
        let d = FeatureVector::new(vec![0.0; 3], Modality::Depth).unwrap();
        assert!(concat_features(&r, &d).unwrap().values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn concat_rejects_swapped_modalities() {
        let r = FeatureVector::new(vec![1.0], Modality::Rgb).unwrap();
        let d = FeatureVector::new(vec![1.0], Modality::Depth).unwrap();
        assert!(matches!(concat_features(&d, &r), Err(Error::ModalityMismatch(_))));
    }

    #[test]
    fn rejects_nan() {
        assert!(matches!(
            FeatureVector::new(vec![1.0, f64::NAN], Modality::Rgb),
            Err(Error::InvalidValue(_))
        ));
    }

    #[test]
    fn angle_bins_wrap() {
        assert_eq!(angle_bin(0.0, 8), 0);
        assert_eq!(angle_bin(-1e-12, 8), 7);
        assert_eq!(angle_bin(std::f64::consts::PI, 8), 4);
    }
}
