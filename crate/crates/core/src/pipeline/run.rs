use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{
    cmd_detect, cmd_evaluate, cmd_features, cmd_propagate, cmd_render, cmd_train_classifier, cmd_train_gpc,
    read_proposals, seed_manual_labels, write_categories, PipelineConfig, MANIFEST_VERSION,
};
use crate::error::{Error, Result};
use crate::io::write_json;
use crate::propagate::{read_labels, write_labels, TrainConfig};

/// `run_manifest.json`, written after every stage has finished.
///
/// Output paths are relative to the run directory. Wall-clock timings go
/// to the `timings.json` sidecar so that identical runs produce identical
/// manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub data: PathBuf,
    pub stages: Vec<String>,
    pub counts: BTreeMap<String, f64>,
    pub outputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

struct Stages {
    names: Vec<String>,
    timings: Vec<StageTiming>,
}

impl Stages {
    fn run<T>(&mut self, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().map_err(|e| e.in_stage(stage))?;
        self.names.push(stage.to_string());
        self.timings.push(StageTiming {
            stage: stage.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        Ok(out)
    }
}

/// Runs the whole weakly supervised chain on a data directory laid out as
///
/// ```text
/// camera.txt
/// train/<category>/*.ply   single-category recordings
/// test/*.ply               frames to evaluate on
/// test_gt/index.json       ground-truth masks of the test frames
/// meshes/*.off             optional CAD models for depth rendering
/// ```
///
/// Stages: render, detect, features, manual seed labels, GPC training,
/// propagation, weighted classifier training, and evaluation. A
/// manual-only baseline classifier is trained and evaluated alongside for
/// comparison.
pub fn cmd_pipeline(config: &PipelineConfig, data: &Path, out: &Path, jobs: Option<usize>) -> Result<RunManifest> {
    config.validate()?;
    let camera = data.join("camera.txt");
    let mut st = Stages {
        names: Vec::new(),
        timings: Vec::new(),
    };
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    let mut outputs: Vec<PathBuf> = Vec::new();
    let rel = |p: &Path| p.strip_prefix(out).unwrap_or(p).to_path_buf();

    let meshes = data.join("meshes");
    if config.render_meshes && meshes.is_dir() {
        let r = st.run("render", || cmd_render(&meshes, config, &out.join("render"), jobs))?;
        counts.insert("rendered_views".into(), r.views as f64);
        outputs.extend(r.manifests.iter().map(|p| rel(p)));
    }

    let train_det = st.run("detect", || {
        cmd_detect(&data.join("train"), &camera, config, &out.join("detect").join("train"), jobs)
    })?;
    let test_det = st.run("detect", || {
        cmd_detect(&data.join("test"), &camera, config, &out.join("detect").join("test"), jobs)
    })?;
    counts.insert("train_frames".into(), train_det.frames as f64);
    counts.insert("train_proposals".into(), train_det.proposals as f64);
    counts.insert("test_frames".into(), test_det.frames as f64);
    counts.insert("test_proposals".into(), test_det.proposals as f64);
    outputs.push(rel(&train_det.manifest));
    outputs.push(rel(&test_det.manifest));

    let train_feat = out.join("features").join("train");
    let test_feat = out.join("features").join("test");
    let f1 = st.run("features", || cmd_features(&train_det.manifest, &train_feat, jobs))?;
    let f2 = st.run("features", || cmd_features(&test_det.manifest, &test_feat, jobs))?;
    outputs.extend([&f1.rgb, &f1.depth, &f2.rgb, &f2.depth].map(|p| rel(p)));

    let labels_dir = out.join("labels");
    let manual = labels_dir.join("manual.csv");
    let categories = labels_dir.join("categories.json");
    let train_records = st.run("label", || {
        let records = read_proposals(&train_det.manifest)?;
        let (names, labels) = seed_manual_labels(&records, config.manual_per_category);
        if names.len() < 2 {
            return Err(Error::InvalidValue(format!(
                "need at least two categories under train/, found {}",
                names.len()
            )));
        }
        write_categories(&categories, &names)?;
        write_labels(&manual, &labels)?;
        counts.insert("categories".into(), names.len() as f64);
        counts.insert("manual_labels".into(), labels.len() as f64);
        Ok((records, names))
    })?;
    outputs.extend([rel(&categories), rel(&manual)]);

    let gpc_dir = out.join("gpc");
    let gpc = st.run("train-gpc", || cmd_train_gpc(&train_feat, &manual, &categories, config, &gpc_dir, jobs))?;
    outputs.push(rel(&gpc.index));

    let prop = st.run("propagate", || cmd_propagate(&train_feat, &gpc_dir, &manual, config, &labels_dir))?;
    counts.insert("pool".into(), prop.pool as f64);
    counts.insert("propagated_labels".into(), prop.propagated as f64);
    outputs.extend([rel(&prop.labels), rel(&prop.report)]);
    // Recording groups double as a check on the propagated labels.
    let (records, names) = &train_records;
    let group_of: BTreeMap<&str, Option<&str>> = records.iter().map(|r| (r.id.as_str(), r.group.as_deref())).collect();
    let propagated = read_labels(&prop.labels).map_err(|e| e.in_stage("propagate"))?;
    let agreeing = propagated
        .iter()
        .filter(|l| group_of.get(l.id.as_str()).copied().flatten() == Some(names[l.label].as_str()))
        .count();
    counts.insert("propagated_agreeing_with_group".into(), agreeing as f64);

    let weak_model = out.join("classifier").join("weak.json");
    let base_model = out.join("classifier").join("manual_only.json");
    let train_cfg = config.train_config();
    let baseline_cfg = TrainConfig { eta: 0.0, ..train_cfg };
    let weak = st.run("train-classifier", || {
        cmd_train_classifier(&train_feat, &manual, Some(&prop.labels), &categories, &train_cfg, &weak_model)
    })?;
    st.run("train-classifier", || {
        cmd_train_classifier(&train_feat, &manual, None, &categories, &baseline_cfg, &base_model)
    })?;
    counts.insert("classifier_training_examples".into(), (weak.manual + weak.propagated) as f64);
    outputs.extend([rel(&weak_model), rel(&base_model)]);

    let gt = data.join("test_gt").join("index.json");
    for (name, model) in [("weak", &weak_model), ("manual_only", &base_model)] {
        let dir = out.join("eval").join(name);
        let e = st.run("evaluate", || cmd_evaluate(&test_det.manifest, &test_feat, model, &categories, &gt, &dir))?;
        counts.insert(format!("{name}_instance_f_score"), e.instance_f_score);
        counts.insert(format!("{name}_pixel_f_score"), e.pixel_f_score);
        outputs.extend([rel(&e.report), rel(&e.table)]);
    }

    st.names.dedup();
    let manifest = RunManifest {
        version: MANIFEST_VERSION,
        config_hash: config.hash(),
        seed: config.seed,
        data: data.to_path_buf(),
        stages: st.names,
        counts,
        outputs,
    };
    for p in &manifest.outputs {
        if !out.join(p).is_file() {
            return Err(Error::io(out.join(p), std::io::ErrorKind::NotFound.into()));
        }
    }
    write_json(out.join("timings.json"), &st.timings)?;
    write_json(out.join("run_manifest.json"), &manifest)?;
    Ok(manifest)
}
