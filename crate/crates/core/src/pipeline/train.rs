use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, load_fused_features, thread_pool, PipelineConfig, ProposalRecord, MANIFEST_VERSION};
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::gpc::{ep_posterior, optimize_hyperparams_with, EpOptions, GpcModel, KernelHyperparams, OptimizeOptions, TrainingSet};
use crate::io::{read_json, write_json};
use crate::propagate::{
    propagate_labels, read_labels, train_weighted_classifier, write_labels, LabelRecord, LabeledExample, PoolItem,
    Provenance, TrainConfig,
};

/// `categories.json`: class names in label-index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryList {
    pub version: u32,
    pub categories: Vec<String>,
}

pub fn read_categories(path: &Path) -> Result<Vec<String>> {
    let list: CategoryList = read_json(path)?;
    if list.categories.is_empty() {
        return Err(Error::parse(path, "no categories"));
    }
    Ok(list.categories)
}

pub fn write_categories(path: &Path, categories: &[String]) -> Result<()> {
    write_json(
        path,
        &CategoryList {
            version: MANIFEST_VERSION,
            categories: categories.to_vec(),
        },
    )
}

/// Stands in for the human annotator: the first `per_category` proposals
/// of each group are labeled with the group name. Categories are the
/// sorted group names.
pub fn seed_manual_labels(records: &[ProposalRecord], per_category: usize) -> (Vec<String>, Vec<LabelRecord>) {
    let categories: Vec<String> = records
        .iter()
        .filter_map(|r| r.group.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut labels = Vec::new();
    for (c, name) in categories.iter().enumerate() {
        labels.extend(
            records
                .iter()
                .filter(|r| r.group.as_deref() == Some(name))
                .take(per_category)
                .map(|r| LabelRecord {
                    id: r.id.clone(),
                    label: c,
                    provenance: Provenance::Manual,
                    confidence: 1.0,
                }),
        );
    }
    (categories, labels)
}

fn examples(
    records: &[LabelRecord],
    features: &BTreeMap<String, FeatureVector>,
    classes: usize,
    source: &Path,
) -> Result<Vec<LabeledExample>> {
    records
        .iter()
        .map(|r| {
            let f = features
                .get(&r.id)
                .ok_or_else(|| Error::parse(source, format!("no features for {}", r.id)))?;
            if r.label >= classes {
                return Err(Error::parse(source, format!("label {} of {} out of range", r.label, r.id)));
            }
            Ok(LabeledExample {
                id: r.id.clone(),
                features: f.clone(),
                label: r.label,
                provenance: r.provenance,
                confidence: r.confidence,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpcIndexEntry {
    pub category: String,
    pub model: PathBuf,
    pub hyperparams: KernelHyperparams,
    pub log_marginal_likelihood: f64,
    pub sweeps: usize,
}

/// `index.json` of a directory of one-vs-rest GPC models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpcIndex {
    pub version: u32,
    pub models: Vec<GpcIndexEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GpcSummary {
    pub categories: usize,
    pub training_examples: usize,
    pub index: PathBuf,
}

/// Fits one binary GPC per category (its manual examples against all
/// others), with hyperparameters chosen by maximizing the EP evidence.
pub fn cmd_train_gpc(
    features_dir: &Path,
    labels: &Path,
    categories: &Path,
    config: &PipelineConfig,
    out: &Path,
    jobs: Option<usize>,
) -> Result<GpcSummary> {
    config.validate()?;
    let names = read_categories(categories)?;
    let features = load_fused_features(features_dir)?;
    let manual = examples(&read_labels(labels)?, &features, names.len(), labels)?;
    if manual.is_empty() {
        return Err(Error::NoSupervision);
    }
    let opts = OptimizeOptions {
        restarts: config.gpc.restarts,
        ep: EpOptions {
            tol: config.gpc.tol,
            max_sweeps: config.gpc.max_sweeps,
            ..EpOptions::default()
        },
        ..OptimizeOptions::default()
    };
    let xs: Vec<FeatureVector> = manual.iter().map(|e| e.features.clone()).collect();
    let models: Vec<GpcModel> = thread_pool(jobs)?.install(|| {
        names
            .par_iter()
            .enumerate()
            .map(|(c, name)| {
                let ys = manual.iter().map(|e| if e.label == c { 1.0 } else { -1.0 }).collect();
                let ts = TrainingSet::new(xs.clone(), ys)?;
                let seed = derive_seed(config.seed, name);
                let (h, _) = optimize_hyperparams_with(&ts, &KernelHyperparams::default(), seed, &opts)?;
                ep_posterior(&ts, &h, config.gpc.tol, config.gpc.max_sweeps)
            })
            .collect::<Result<_>>()
    })?;

    let mut entries = Vec::with_capacity(models.len());
    for (name, model) in names.iter().zip(&models) {
        let file = PathBuf::from(format!("{name}.json"));
        model.save(out.join(&file))?;
        entries.push(GpcIndexEntry {
            category: name.clone(),
            model: file,
            hyperparams: *model.hyperparams(),
            log_marginal_likelihood: model.log_marginal_likelihood(),
            sweeps: model.sweeps(),
        });
    }
    let index = out.join("index.json");
    write_json(
        &index,
        &GpcIndex {
            version: MANIFEST_VERSION,
            models: entries,
        },
    )?;
    Ok(GpcSummary {
        categories: names.len(),
        training_examples: manual.len(),
        index,
    })
}

fn load_gpc_dir(dir: &Path) -> Result<(Vec<String>, Vec<GpcModel>)> {
    let index: GpcIndex = read_json(dir.join("index.json"))?;
    let mut names = Vec::new();
    let mut models = Vec::new();
    for e in index.models {
        models.push(GpcModel::load(dir.join(&e.model))?);
        names.push(e.category);
    }
    Ok((names, models))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropagateSummary {
    pub pool: usize,
    pub propagated: usize,
    pub labels: PathBuf,
    pub report: PathBuf,
}

/// Scores every unlabeled proposal with the GPC models and writes the ones
/// that pass the confidence gate to `propagated.csv`, with
/// `propagation_report.json` alongside.
pub fn cmd_propagate(
    features_dir: &Path,
    gpc_dir: &Path,
    manual: &Path,
    config: &PipelineConfig,
    out: &Path,
) -> Result<PropagateSummary> {
    config.propagation.validate()?;
    let (names, models) = load_gpc_dir(gpc_dir)?;
    let features = load_fused_features(features_dir)?;
    let labeled: BTreeSet<String> = read_labels(manual)?.into_iter().map(|r| r.id).collect();
    let pool: Vec<PoolItem> = features
        .into_iter()
        .filter(|(id, _)| !labeled.contains(id))
        .map(|(id, features)| PoolItem {
            id,
            features,
            source: None,
        })
        .collect();
    let result = propagate_labels(&models, &names, &pool, &config.propagation)?;
    let records: Vec<LabelRecord> = result.examples.iter().map(LabelRecord::from).collect();
    let labels = out.join("propagated.csv");
    let report = out.join("propagation_report.json");
    write_labels(&labels, &records)?;
    write_json(&report, &result.report)?;
    Ok(PropagateSummary {
        pool: pool.len(),
        propagated: records.len(),
        labels,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifierSummary {
    pub manual: usize,
    pub propagated: usize,
    pub loss: f64,
    pub model: PathBuf,
}

/// Trains the linear softmax head on the manual labels plus, when given,
/// the propagated labels weighted by `train.eta`.
pub fn cmd_train_classifier(
    features_dir: &Path,
    manual: &Path,
    propagated: Option<&Path>,
    categories: &Path,
    train: &TrainConfig,
    out: &Path,
) -> Result<ClassifierSummary> {
    train.validate()?;
    let names = read_categories(categories)?;
    let features = load_fused_features(features_dir)?;
    let manual_ex = examples(&read_labels(manual)?, &features, names.len(), manual)?;
    let prop_ex = match propagated {
        Some(p) => examples(&read_labels(p)?, &features, names.len(), p)?,
        None => Vec::new(),
    };
    let outcome = train_weighted_classifier(&manual_ex, &prop_ex, names.len(), train)?;
    outcome.model.save(out)?;
    Ok(ClassifierSummary {
        manual: manual_ex.len(),
        propagated: prop_ex.len(),
        loss: outcome.loss,
        model: out.to_path_buf(),
    })
}
