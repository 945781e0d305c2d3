//! Stage commands wired through files on disk, plus the end-to-end run.
//!
//! Each `cmd_*` function reads its inputs from paths, writes its outputs
//! under an output directory and returns a small summary. Stages never
//! share in-memory state, so any of them can be rerun on its own.

mod config;
mod detect;
mod evaluate;
mod features;
mod render;
mod run;
mod train;

pub use config::{GpcSettings, PipelineConfig, TrainingSettings};
pub use detect::{cmd_detect, discover_clouds, read_proposals, CloudSource, DetectSummary, ProposalRecord};
pub use evaluate::{cmd_evaluate, EvaluateSummary, PredictionRecord};
pub use features::{cmd_features, load_fused_features, FeatureSummary};
pub use render::{cmd_render, RenderSummary, ViewRecord, ViewsManifest};
pub use run::{cmd_pipeline, RunManifest, StageTiming};
pub use train::{
    cmd_propagate, cmd_train_classifier, cmd_train_gpc, read_categories, seed_manual_labels, write_categories,
    CategoryList, ClassifierSummary, GpcIndex, GpcSummary, PropagateSummary,
};

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Per-item seed that does not depend on processing order.
pub(crate) fn derive_seed(seed: u64, key: &str) -> u64 {
    seed ^ fnv1a(key.as_bytes())
}

/// Thread pool bounded by `--jobs`; `None` or 0 uses every core.
pub(crate) fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
}

pub(crate) fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut out = String::new();
    for item in items {
        out += &serde_json::to_string(item)?;
        out.push('\n');
    }
    crate::io::write_atomic(path, out.as_bytes())
}

pub(crate) fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(path, format!("line {}: {e}", i + 1))))
        .collect()
}

pub(crate) fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Joins `/`-separated relative components onto `base`.
pub(crate) fn rel_path(parts: &[&str]) -> PathBuf {
    parts.iter().flat_map(|p| p.split('/')).collect()
}
