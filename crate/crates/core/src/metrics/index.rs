use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{AnnotatedFrame, Instance};
use crate::error::{Error, Result};
use crate::io::png::read_mask;

/// JSON index of per-frame mask PNGs. Mask paths are relative to the
/// index file's directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MaskIndex {
    pub version: u32,
    pub frames: Vec<IndexedFrame>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedFrame {
    pub id: String,
    pub masks: Vec<IndexedMask>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedMask {
    pub category: String,
    pub mask: PathBuf,
}

pub fn read_mask_index(path: impl AsRef<Path>) -> Result<MaskIndex> {
    crate::io::read_json(path)
}

pub fn write_mask_index(path: impl AsRef<Path>, index: &MaskIndex) -> Result<()> {
    crate::io::write_json(path, index)
}

fn load_instances(base: &Path, frame: &IndexedFrame) -> Result<Vec<Instance>> {
    frame
        .masks
        .iter()
        .map(|m| {
            Ok(Instance {
                category: m.category.clone(),
                mask: read_mask(base.join(&m.mask))?,
            })
        })
        .collect()
}

/// Pairs ground truth and prediction indices by frame id. Frames without
/// predictions get an empty list; predictions for unknown frames are an error.
pub fn load_annotated_frames(gt_index: impl AsRef<Path>, pred_index: impl AsRef<Path>) -> Result<Vec<AnnotatedFrame>> {
    let (gt_path, pred_path) = (gt_index.as_ref(), pred_index.as_ref());
    let gt = read_mask_index(gt_path)?;
    let pred = read_mask_index(pred_path)?;
    let gt_base = gt_path.parent().unwrap_or(Path::new("."));
    let pred_base = pred_path.parent().unwrap_or(Path::new("."));
    let mut preds: BTreeMap<&str, &IndexedFrame> = BTreeMap::new();
    for f in &pred.frames {
        if !gt.frames.iter().any(|g| g.id == f.id) {
            return Err(Error::parse(pred_path, format!("prediction for unknown frame {:?}", f.id)));
        }
        preds.insert(&f.id, f);
    }
    gt.frames
        .iter()
        .map(|g| {
            Ok(AnnotatedFrame {
                frame_id: g.id.clone(),
                ground_truth: load_instances(gt_base, g)?,
                predictions: match preds.get(g.id.as_str()) {
                    Some(p) => load_instances(pred_base, p)?,
                    None => Vec::new(),
                },
            })
        })
        .collect()
}
