use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use image::RgbImage;
use rayon::prelude::*;
use serde::Serialize;

use super::{read_proposals, thread_pool, ProposalRecord};
use crate::error::{Error, Result};
use crate::features::{
    concat_features, extract_depth_features, extract_rgb_features, FeatureMatrix, FeatureVector, Modality,
};
use crate::features::{load_feature_matrix, write_feature_matrix};
use crate::io::png::{read_depth, read_mask, read_rgb};
use crate::raster::{DepthCrop, Mask};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureSummary {
    pub rows: usize,
    pub rgb: PathBuf,
    pub depth: PathBuf,
}

fn crop_rgb(img: &RgbImage, r: &ProposalRecord) -> RgbImage {
    let b = &r.bbox;
    image::imageops::crop_imm(img, b.u_min as u32, b.v_min as u32, b.width() as u32, b.height() as u32).to_image()
}

// Depth outside the proposal mask is blanked so the descriptor sees only
// the object.
fn crop_depth(depth: &DepthCrop, mask: &Mask, r: &ProposalRecord) -> DepthCrop {
    let b = &r.bbox;
    let mut out = Vec::with_capacity(b.width() * b.height());
    for v in b.v_min..=b.v_max {
        for u in b.u_min..=b.u_max {
            out.push(if mask.get(u, v) { depth.get(u, v) } else { 0 });
        }
    }
    DepthCrop {
        width: b.width(),
        height: b.height(),
        depth_mm: out,
    }
}

fn describe(base: &Path, r: &ProposalRecord) -> Result<(Vec<f64>, Vec<f64>)> {
    let rgb = read_rgb(base.join(&r.rgb))?;
    let depth = read_depth(base.join(&r.depth))?;
    let mask = read_mask(base.join(&r.mask))?;
    let dims = (rgb.width() as usize, rgb.height() as usize);
    for other in [(depth.width, depth.height), mask.dims()] {
        if other != dims {
            return Err(Error::ResolutionMismatch(dims, other));
        }
    }
    if r.bbox.u_max >= dims.0 || r.bbox.v_max >= dims.1 {
        return Err(Error::InvalidValue(format!("bbox of {} exceeds the frame", r.id)));
    }
    let f_rgb = extract_rgb_features(&crop_rgb(&rgb, r))?;
    let f_depth = extract_depth_features(&crop_depth(&depth, &mask, r))?;
    Ok((f_rgb.values().to_vec(), f_depth.values().to_vec()))
}

/// Computes the handcrafted RGB and depth descriptors of every proposal in
/// `proposals.jsonl` and writes `rgb.csv` and `depth.csv` under `out`.
pub fn cmd_features(manifest: &Path, out: &Path, jobs: Option<usize>) -> Result<FeatureSummary> {
    let records = read_proposals(manifest)?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let rows: Vec<(Vec<f64>, Vec<f64>)> = thread_pool(jobs)?.install(|| {
        records
            .par_iter()
            .map(|r| describe(base, r).map_err(|e| Error::parse(manifest, format!("{}: {e}", r.id))))
            .collect::<Result<_>>()
    })?;
    let ids: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
    let (rgb_rows, depth_rows): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let rgb = out.join("rgb.csv");
    let depth = out.join("depth.csv");
    write_feature_matrix(
        &rgb,
        &FeatureMatrix {
            ids: ids.clone(),
            rows: rgb_rows,
        },
    )?;
    write_feature_matrix(
        &depth,
        &FeatureMatrix {
            ids,
            rows: depth_rows,
        },
    )?;
    Ok(FeatureSummary {
        rows: records.len(),
        rgb,
        depth,
    })
}

/// Reads `rgb.csv` and `depth.csv` from `dir` and joins them per id.
pub fn load_fused_features(dir: &Path) -> Result<BTreeMap<String, FeatureVector>> {
    let rgb_path = dir.join("rgb.csv");
    let rgb = load_feature_matrix(&rgb_path)?;
    let depth = load_feature_matrix(dir.join("depth.csv"))?;
    let depth_rows: BTreeMap<&str, &Vec<f64>> = depth.ids.iter().map(String::as_str).zip(&depth.rows).collect();
    if depth_rows.len() != rgb.len() {
        return Err(Error::parse(&rgb_path, "rgb.csv and depth.csv list different ids"));
    }
    let mut out = BTreeMap::new();
    for (id, row) in rgb.ids.iter().zip(&rgb.rows) {
        let d = depth_rows
            .get(id.as_str())
            .ok_or_else(|| Error::parse(&rgb_path, format!("{id} has no depth row")))?;
        let fused = concat_features(
            &FeatureVector::new(row.clone(), Modality::Rgb)?,
            &FeatureVector::new((*d).clone(), Modality::Depth)?,
        )?;
        out.insert(id.clone(), fused);
    }
    Ok(out)
}
