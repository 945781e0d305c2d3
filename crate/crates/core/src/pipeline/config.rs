use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectness::{ClusteringParams, PlaneRemovalParams};
use crate::propagate::{PropagationConfig, TrainConfig};
use crate::synth::RenderConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpcSettings {
    pub tol: f64,
    pub max_sweeps: usize,
    pub restarts: usize,
}

impl Default for GpcSettings {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_sweeps: 100,
            restarts: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSettings {
    pub eta: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: Option<usize>,
}

impl Default for TrainingSettings {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            eta: t.eta,
            epochs: t.epochs,
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
        }
    }
}

/// Every tunable of a run, read from one TOML file.
///
/// ```toml
/// seed = 7
/// manual_per_category = 3
///
/// [propagation]
/// tau = 0.7
///
/// [training]
/// eta = 1.0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Proposals per category labeled by hand before propagation.
    pub manual_per_category: usize,
    /// Render depth views of `meshes/*.off` when the data directory has them.
    pub render_meshes: bool,
    pub clustering: ClusteringParams,
    pub plane_removal: PlaneRemovalParams,
    pub render: RenderConfig,
    pub gpc: GpcSettings,
    pub propagation: PropagationConfig,
    pub training: TrainingSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            manual_per_category: 3,
            render_meshes: true,
            clustering: ClusteringParams::default(),
            plane_removal: PlaneRemovalParams::default(),
            render: RenderConfig::default(),
            gpc: GpcSettings::default(),
            propagation: PropagationConfig::default(),
            training: TrainingSettings::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.clustering.validate()?;
        self.plane_removal.validate()?;
        self.render.validate()?;
        self.propagation.validate()?;
        self.train_config().validate()?;
        if !(self.gpc.tol > 0.0) || self.gpc.max_sweeps == 0 || self.gpc.restarts == 0 {
            return Err(Error::InvalidConfig(
                "gpc: tol, max_sweeps and restarts must be > 0".into(),
            ));
        }
        if self.manual_per_category == 0 {
            return Err(Error::InvalidConfig("manual_per_category must be > 0".into()));
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            eta: self.training.eta,
            epochs: self.training.epochs,
            learning_rate: self.training.learning_rate,
            seed: self.seed,
            batch_size: self.training.batch_size,
        }
    }

    /// Stable 64-bit FNV-1a digest of the canonical JSON form, as hex.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        format!("{:016x}", super::fnv1a(json.as_bytes()))
    }
}
