use super::{angle_bin, l2_normalize, FeatureVector, Modality};
use crate::error::{Error, Result};
use crate::raster::DepthCrop;

const DEPTH_BINS: usize = 16;
const ORIENT_BINS: usize = 8;
const NORMAL_BINS: usize = 8;
pub const DEPTH_DIM: usize = DEPTH_BINS + ORIENT_BINS + NORMAL_BINS;

/// Min-max scaled depth histogram, magnitude-weighted gradient orientation
/// histogram, and histogram of surface tilt `atan‖∇d‖` over valid pixels.
/// Zero depth marks missing data and is excluded throughout.
pub fn extract_depth_features(crop: &DepthCrop) -> Result<FeatureVector> {
    let (w, h) = (crop.width, crop.height);
    let valid: Vec<f64> = crop.depth_mm.iter().filter(|d| **d > 0).map(|d| *d as f64).collect();
    if valid.is_empty() {
        return Err(Error::NoValidDepth);
    }
    let n = valid.len() as f64;
    let lo = valid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = valid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;

    let mut out = vec![0.0; DEPTH_DIM];
    for d in &valid {
        let s = if range > 0.0 { (d - lo) / range } else { 0.0 };
        out[((s * DEPTH_BINS as f64) as usize).min(DEPTH_BINS - 1)] += 1.0 / n;
    }

    let at = |u: usize, v: usize| -> Option<f64> {
        let d = crop.get(u, v);
        (d > 0).then_some(d as f64)
    };
    // Central difference where both neighbours are valid, one-sided otherwise.
    let diff = |prev: Option<f64>, here: f64, next: Option<f64>| match (prev, next) {
        (Some(a), Some(b)) => (b - a) / 2.0,
        (None, Some(b)) => b - here,
        (Some(a), None) => here - a,
        (None, None) => 0.0,
    };
    for v in 0..h {
        for u in 0..w {
            let Some(here) = at(u, v) else { continue };
            let left = if u > 0 { at(u - 1, v) } else { None };
            let right = if u + 1 < w { at(u + 1, v) } else { None };
            let up = if v > 0 { at(u, v - 1) } else { None };
            let down = if v + 1 < h { at(u, v + 1) } else { None };
            let gx = diff(left, here, right);
            let gy = diff(up, here, down);
            let mag = gx.hypot(gy);
            if mag > 0.0 {
                out[DEPTH_BINS + angle_bin(gy.atan2(gx), ORIENT_BINS)] += mag / n;
            }
            // Normal (-gx, -gy, 1) makes angle atan(mag) with the view axis.
            let tilt = mag.atan() / std::f64::consts::FRAC_PI_2;
            let bin = ((tilt * NORMAL_BINS as f64) as usize).min(NORMAL_BINS - 1);
            out[DEPTH_BINS + ORIENT_BINS + bin] += 1.0 / n;
        }
    }
    l2_normalize(&mut out);
    FeatureVector::new(out, Modality::Depth)
}
