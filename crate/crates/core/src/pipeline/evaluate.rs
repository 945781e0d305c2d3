use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{load_fused_features, read_categories, read_proposals, rel_path, MANIFEST_VERSION};
use crate::error::{Error, Result};
use crate::io::{png, write_atomic, write_json};
use crate::metrics::{
    instance_metrics, load_annotated_frames, pixel_metrics, write_mask_index, EvaluationReport, IndexedFrame,
    IndexedMask, MaskIndex,
};
use crate::propagate::{predict_class, LinearSoftmaxModel};

/// One row of `predictions.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub frame: String,
    pub category: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluateSummary {
    pub frames: usize,
    pub predictions: usize,
    pub report: PathBuf,
    pub table: PathBuf,
    pub instance_f_score: f64,
    pub pixel_f_score: f64,
}

/// Labels every test proposal with the classifier, writes the predicted
/// masks as a mask index, and scores them against the ground-truth index.
///
/// Outputs under `out`: `pred/index.json` with its masks,
/// `predictions.csv`, `report.json` and the plain-text `report.txt`.
pub fn cmd_evaluate(
    proposals: &Path,
    features_dir: &Path,
    classifier: &Path,
    categories: &Path,
    ground_truth: &Path,
    out: &Path,
) -> Result<EvaluateSummary> {
    let names = read_categories(categories)?;
    let model = LinearSoftmaxModel::load(classifier)?;
    if model.classes() != names.len() {
        return Err(Error::InconsistentDimension {
            expected: names.len(),
            got: model.classes(),
        });
    }
    let records = read_proposals(proposals)?;
    let features = load_fused_features(features_dir)?;
    let base = proposals.parent().unwrap_or(Path::new("."));

    let mut frames: BTreeMap<String, Vec<IndexedMask>> = BTreeMap::new();
    let mut predictions = Vec::with_capacity(records.len());
    for r in &records {
        let x = features
            .get(&r.id)
            .ok_or_else(|| Error::parse(features_dir, format!("no features for {}", r.id)))?;
        let (class, probs) = predict_class(&model, x)?;
        let mask = png::read_mask(base.join(&r.mask))?;
        let rel = rel_path(&["pred", "masks", &r.frame, &format!("{}.png", r.proposal)]);
        png::write_mask(out.join(&rel), &mask)?;
        frames.entry(r.frame.clone()).or_default().push(IndexedMask {
            category: names[class].clone(),
            mask: rel.strip_prefix("pred").expect("built under pred").to_path_buf(),
        });
        predictions.push(PredictionRecord {
            id: r.id.clone(),
            frame: r.frame.clone(),
            category: names[class].clone(),
            confidence: probs[class],
        });
    }
    let index = MaskIndex {
        version: MANIFEST_VERSION,
        frames: frames
            .into_iter()
            .map(|(id, masks)| IndexedFrame { id, masks })
            .collect(),
    };
    let pred_index = out.join("pred").join("index.json");
    write_mask_index(&pred_index, &index)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    for p in &predictions {
        w.serialize(p)?;
    }
    let csv_path = out.join("predictions.csv");
    let bytes = w.into_inner().map_err(|e| Error::io(&csv_path, e.into_error()))?;
    write_atomic(&csv_path, &bytes)?;

    let annotated = load_annotated_frames(ground_truth, &pred_index)?;
    let report = EvaluationReport {
        version: MANIFEST_VERSION,
        frames: annotated.len(),
        instance: instance_metrics(&annotated)?,
        pixel: pixel_metrics(&annotated)?,
    };
    let report_path = out.join("report.json");
    let table_path = out.join("report.txt");
    write_json(&report_path, &report)?;
    write_atomic(&table_path, report.to_table().as_bytes())?;
    Ok(EvaluateSummary {
        frames: report.frames,
        predictions: predictions.len(),
        report: report_path,
        table: table_path,
        instance_f_score: report.instance.overall.f_score,
        pixel_f_score: report.pixel.overall.f_score,
    })
}
