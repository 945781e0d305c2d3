//! Instance-wise and pixel-wise precision, recall and F-score against
//! dense ground-truth masks.

mod index;
mod report;

pub use index::{load_annotated_frames, read_mask_index, write_mask_index, IndexedFrame, IndexedMask, MaskIndex};
pub use report::{CategoryMetrics, EvaluationReport, MetricsReport};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::raster::Mask;

/// A categorised binary mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub category: String,
    pub mask: Mask,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedFrame {
    pub frame_id: String,
    pub ground_truth: Vec<Instance>,
    pub predictions: Vec<Instance>,
}

impl AnnotatedFrame {
    fn check_resolution(&self) -> Result<Option<(usize, usize)>> {
        let mut dims = None;
        for inst in self.ground_truth.iter().chain(&self.predictions) {
            let d = inst.mask.dims();
            match dims {
                None => dims = Some(d),
                Some(e) if e != d => return Err(Error::ResolutionMismatch(e, d)),
                _ => {}
            }
        }
        Ok(dims)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

/// `2pr/(p+r)`, or 0 when both are 0.
pub fn f_score(p: f64, r: f64) -> Result<f64> {
    for v in [p, r] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidValue(format!("precision/recall {v} outside [0, 1]")));
        }
    }
    Ok(if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 })
}

fn iou(a: &Mask, b: &Mask) -> f64 {
    let inter = a.intersection_count(b);
    let union = a.count() + b.count() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Greedy one-to-one matching in descending IoU; a pair counts only if the
/// categories agree and IoU exceeds 0.5.
pub fn match_instances(frame: &AnnotatedFrame) -> Result<BTreeMap<String, Counts>> {
    frame.check_resolution()?;
    let mut pairs = Vec::new();
    for (pi, p) in frame.predictions.iter().enumerate() {
        for (gi, g) in frame.ground_truth.iter().enumerate() {
            if p.category == g.category {
                let o = iou(&p.mask, &g.mask);
                if o > 0.5 {
                    pairs.push((o, pi, gi));
                }
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut pred_used = vec![false; frame.predictions.len()];
    let mut gt_used = vec![false; frame.ground_truth.len()];
    let mut out: BTreeMap<String, Counts> = BTreeMap::new();
    for (_, pi, gi) in pairs {
        if !pred_used[pi] && !gt_used[gi] {
            pred_used[pi] = true;
            gt_used[gi] = true;
            out.entry(frame.predictions[pi].category.clone()).or_default().tp += 1;
        }
    }
    for (p, used) in frame.predictions.iter().zip(&pred_used) {
        let e = out.entry(p.category.clone()).or_default();
        if !used {
            e.fp += 1;
        }
    }
    for (g, used) in frame.ground_truth.iter().zip(&gt_used) {
        let e = out.entry(g.category.clone()).or_default();
        if !used {
            e.fn_ += 1;
        }
    }
    Ok(out)
}

pub fn instance_metrics(frames: &[AnnotatedFrame]) -> Result<MetricsReport> {
    let mut total: BTreeMap<String, Counts> = BTreeMap::new();
    for f in frames {
        for (cat, c) in match_instances(f)? {
            *total.entry(cat).or_default() += c;
        }
    }
    Ok(MetricsReport::from_counts("instance", total))
}

/// Per category, compares the union of predicted masks with the union of
/// ground-truth masks pixel by pixel, summed over frames.
pub fn pixel_metrics(frames: &[AnnotatedFrame]) -> Result<MetricsReport> {
    if frames.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut total: BTreeMap<String, Counts> = BTreeMap::new();
    for f in frames {
        let Some((w, h)) = f.check_resolution()? else { continue };
        let mut unions: BTreeMap<&str, (Mask, Mask)> = BTreeMap::new();
        for (inst, is_gt) in f
            .ground_truth
            .iter()
            .map(|i| (i, true))
            .chain(f.predictions.iter().map(|i| (i, false)))
        {
            let e = unions
                .entry(inst.category.as_str())
                .or_insert_with(|| (Mask::new(w, h), Mask::new(w, h)));
            if is_gt {
                e.0.union_with(&inst.mask);
            } else {
                e.1.union_with(&inst.mask);
            }
        }
        for (cat, (gt, pred)) in unions {
            let tp = gt.intersection_count(&pred) as u64;
            *total.entry(cat.to_string()).or_default() += Counts {
                tp,
                fp: pred.count() as u64 - tp,
                fn_: gt.count() as u64 - tp,
            };
        }
    }
    Ok(MetricsReport::from_counts("pixel", total))
}
