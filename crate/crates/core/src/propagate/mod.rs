//! Confidence-gated label propagation from per-category GPC models, and the
//! weighted softmax classifier trained on manual plus propagated pools.

mod labels;
mod softmax;

pub use labels::{read_labels, write_labels, LabelRecord};
pub use softmax::{
    aggregate_view_predictions, predict_class, train_weighted_classifier, weighted_loss, weighted_loss_gradient,
    LinearSoftmaxModel, TrainConfig, TrainOutcome,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::gpc::GpcModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Manual,
    Propagated,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Manual => "manual",
            Provenance::Propagated => "propagated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub id: String,
    pub features: FeatureVector,
    pub label: usize,
    pub provenance: Provenance,
    pub confidence: f64,
}

impl LabeledExample {
    pub fn manual(id: impl Into<String>, features: FeatureVector, label: usize) -> Self {
        Self {
            id: id.into(),
            features,
            label,
            provenance: Provenance::Manual,
            confidence: 1.0,
        }
    }
}

/// What to do with an item that clears `tau` under its best category while
/// another category model also claims it (probability above 0.5).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConflictPolicy {
    #[default]
    Abandon,
    HighestConfidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationConfig {
    pub tau: f64,
    pub conflict_policy: ConflictPolicy,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            tau: 0.7,
            conflict_policy: ConflictPolicy::Abandon,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tau > 0.5 && self.tau <= 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("tau must lie in (0.5, 1], got {}", self.tau)))
        }
    }
}

/// Unlabeled proposal. `source` optionally names the category of the
/// recording it came from, used only for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolItem {
    pub id: String,
    pub features: FeatureVector,
    pub source: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCounts {
    pub category: String,
    pub unlabeled_count: usize,
    pub propagated_count: usize,
    pub abandoned_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationReport {
    pub version: u32,
    pub tau: f64,
    pub conflict_policy: ConflictPolicy,
    pub pool_size: usize,
    pub propagated: usize,
    pub abandoned: usize,
    pub conflicts: usize,
    pub categories: Vec<CategoryCounts>,
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub examples: Vec<LabeledExample>,
    /// Per item, per category predictive probability.
    pub confidences: Vec<Vec<f64>>,
    pub report: PropagationReport,
}

/// Scores every pool item under every category model and labels the items
/// whose confidence reaches `tau`.
pub fn propagate_labels(
    models: &[GpcModel],
    category_names: &[String],
    pool: &[PoolItem],
    config: &PropagationConfig,
) -> Result<Propagation> {
    config.validate()?;
    if models.is_empty() {
        return Err(Error::EmptyInput);
    }
    if category_names.len() != models.len() {
        return Err(Error::InconsistentDimension {
            expected: models.len(),
            got: category_names.len(),
        });
    }
    let confidences = pool
        .par_iter()
        .map(|item| {
            models
                .iter()
                .map(|m| m.predict(&item.features).map(|p| p.probability))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    propagate_scored(pool, confidences, category_names, config)
}

/// Applies the `tau` gate and conflict policy to precomputed per-category
/// confidences (`confidences[item][category]`).
pub fn propagate_scored(
    pool: &[PoolItem],
    confidences: Vec<Vec<f64>>,
    category_names: &[String],
    config: &PropagationConfig,
) -> Result<Propagation> {
    config.validate()?;
    let c = category_names.len();
    if confidences.len() != pool.len() {
        return Err(Error::InconsistentDimension {
            expected: pool.len(),
            got: confidences.len(),
        });
    }
    if let Some(row) = confidences.iter().find(|r| r.len() != c) {
        return Err(Error::InconsistentDimension {
            expected: c,
            got: row.len(),
        });
    }
    let has_source = pool.iter().any(|p| p.source.is_some());
    let mut counts: Vec<CategoryCounts> = category_names
        .iter()
        .map(|name| CategoryCounts {
            category: name.clone(),
            unlabeled_count: if has_source { 0 } else { pool.len() },
            ..CategoryCounts::default()
        })
        .collect();
    let mut examples = Vec::new();
    let mut conflicts = 0;
    for (item, conf) in pool.iter().zip(&confidences) {
        if let Some(s) = item.source.filter(|s| *s < c) {
            counts[s].unlabeled_count += 1;
        }
        let best = argmax(conf);
        let claims = conf.iter().filter(|p| **p > 0.5).count();
        let chosen = if conf[best] < config.tau {
            None
        } else if claims > 1 {
            conflicts += 1;
            match config.conflict_policy {
                ConflictPolicy::Abandon => None,
                ConflictPolicy::HighestConfidence => Some(best),
            }
        } else {
            Some(best)
        };
        match chosen {
            Some(label) => {
                counts[label].propagated_count += 1;
                examples.push(LabeledExample {
                    id: item.id.clone(),
                    features: item.features.clone(),
                    label,
                    provenance: Provenance::Propagated,
                    confidence: conf[label],
                });
            }
            None => {
                let slot = if has_source { item.source.filter(|s| *s < c) } else { Some(best) };
                if let Some(s) = slot {
                    counts[s].abandoned_count += 1;
                }
            }
        }
    }
    let report = PropagationReport {
        version: 1,
        tau: config.tau,
        conflict_policy: config.conflict_policy,
        pool_size: pool.len(),
        propagated: examples.len(),
        abandoned: pool.len() - examples.len(),
        conflicts,
        categories: counts,
    };
    Ok(Propagation {
        examples,
        confidences,
        report,
    })
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}
