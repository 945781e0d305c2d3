use image::RgbImage;

use super::{angle_bin, l2_normalize, FeatureVector, Modality};
use crate::error::{Error, Result};

const COLOR_BINS: usize = 16;
const ORIENT_BINS: usize = 8;
pub const RGB_DIM: usize = 3 * COLOR_BINS + ORIENT_BINS;

/// Per-channel 16-bin color histograms followed by a magnitude-weighted
/// 8-bin gradient orientation histogram of the luminance, L2-normalized.
pub fn extract_rgb_features(crop: &RgbImage) -> Result<FeatureVector> {
    let (w, h) = (crop.width() as usize, crop.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::EmptyCrop);
    }
    let n = (w * h) as f64;
    let mut out = vec![0.0; RGB_DIM];
    for px in crop.pixels() {
        for c in 0..3 {
            out[c * COLOR_BINS + px[c] as usize * COLOR_BINS / 256] += 1.0 / n;
        }
    }

    let lum: Vec<f64> = crop
        .pixels()
        .map(|p| (0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64) / 255.0)
        .collect();
    let at = |u: usize, v: usize| lum[v * w + u];
    let hist = &mut out[3 * COLOR_BINS..];
    for v in 0..h {
        for u in 0..w {
            let gx = (at((u + 1).min(w - 1), v) - at(u.saturating_sub(1), v)) / 2.0;
            let gy = (at(u, (v + 1).min(h - 1)) - at(u, v.saturating_sub(1))) / 2.0;
            let mag = gx.hypot(gy);
            if mag > 0.0 {
                hist[angle_bin(gy.atan2(gx), ORIENT_BINS)] += mag / n;
            }
        }
    }
    l2_normalize(&mut out);
    FeatureVector::new(out, Modality::Rgb)
}
