use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the pipeline.
///
/// Variants are grouped by the exit code the CLI maps them to: bad input
/// data, numerical failure, or caller misuse.
#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient points: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("degenerate neighborhood around point {0}")]
    DegenerateNeighborhood(usize),
    #[error("behind camera (depth {0})")]
    BehindCamera(f64),
    #[error("invalid rotation: {0}")]
    InvalidRotation(String),
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("empty input")]
    EmptyInput,
    #[error("unprepared cloud: missing {0}")]
    UnpreparedCloud(&'static str),
    #[error("off-screen proposal")]
    OffScreenProposal,
    #[error("empty mesh")]
    EmptyMesh,
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("empty crop")]
    EmptyCrop,
    #[error("no valid depth")]
    NoValidDepth,
    #[error("inconsistent dimension: expected {expected}, got {got}")]
    InconsistentDimension { expected: usize, got: usize },
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("modality mismatch: {0}")]
    ModalityMismatch(String),
    #[error("split mismatch: {0} vs {1}")]
    SplitMismatch(usize, usize),
    #[error("ill-conditioned kernel")]
    IllConditionedKernel,
    #[error("degenerate labels: training set needs both classes")]
    DegenerateLabels,
    #[error("EP did not converge after {sweeps} sweeps (max site change {change:e})")]
    NotConverged { sweeps: usize, change: f64 },
    #[error("optimization failed: {0}")]
    OptimizationFailed(String),
    #[error("no supervision: manual pool is empty")]
    NoSupervision,
    #[error("resolution mismatch: {0:?} vs {1:?}")]
    ResolutionMismatch((usize, usize), (usize, usize)),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("parse error in {path}: {msg}")]
    Parse { path: PathBuf, msg: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidConfig(_) => ErrorKind::Usage,
            Error::IllConditionedKernel
            | Error::NotConverged { .. }
            | Error::OptimizationFailed(_)
            | Error::DegenerateNeighborhood(_)
            | Error::DegenerateGeometry(_) => ErrorKind::Numerical,
            Error::Stage { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }

    /// Process exit code: 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Usage => 1,
            ErrorKind::Data => 2,
            ErrorKind::Numerical => 3,
        }
    }
}
