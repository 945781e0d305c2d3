//! Command-line front end. Every subcommand is a thin wrapper over a
//! `rgbd_weak::pipeline::cmd_*` function and prints its summary as JSON.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rgbd_weak::pipeline::{self, PipelineConfig};
use rgbd_weak::propagate::ConflictPolicy;
use rgbd_weak::Result;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "rgbd-weak", version, about = "Weakly supervised RGB-D object detection and recognition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for per-frame and per-model fan-out.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Render synthetic depth views of OFF meshes.
    Render {
        #[command(flatten)]
        common: Common,
        /// An .off file or a directory of them.
        #[arg(long)]
        meshes: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Detect objectness proposals in PLY clouds.
    Detect {
        #[command(flatten)]
        common: Common,
        /// A .ply file or a directory searched recursively.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        camera: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract RGB and depth descriptors for each proposal.
    Features {
        #[arg(long)]
        proposals: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Fit one binary GP classifier per category on the manual labels.
    TrainGpc {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        categories: PathBuf,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Label confident pool items with the GP classifiers.
    Propagate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        gpc: PathBuf,
        /// Manual labels; these ids are excluded from the pool.
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, value_enum)]
        conflict_policy: Option<Policy>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the softmax classifier on manual plus propagated labels.
    TrainClassifier {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        propagated: Option<PathBuf>,
        #[arg(long)]
        categories: PathBuf,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        /// Output model file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify test proposals and score them against ground-truth masks.
    Evaluate {
        #[arg(long)]
        proposals: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        classifier: PathBuf,
        #[arg(long)]
        categories: PathBuf,
        #[arg(long)]
        ground_truth: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every stage on a data directory.
    Pipeline {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Policy {
    Abandon,
    HighestConfidence,
}

fn load_config(common: &Common) -> Result<PipelineConfig> {
    let mut cfg = match &common.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

// A closed stdout (e.g. piped into `head`) is not an error worth reporting.
fn print<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    Ok(())
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Render { common, meshes, out } => {
            let cfg = load_config(&common)?;
            print(&pipeline::cmd_render(&meshes, &cfg, &out, common.jobs)?)
        }
        Command::Detect {
            common,
            input,
            camera,
            out,
        } => {
            let cfg = load_config(&common)?;
            print(&pipeline::cmd_detect(&input, &camera, &cfg, &out, common.jobs)?)
        }
        Command::Features { proposals, out, jobs } => print(&pipeline::cmd_features(&proposals, &out, jobs)?),
        Command::TrainGpc {
            common,
            features,
            labels,
            categories,
            restarts,
            out,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(r) = restarts {
                cfg.gpc.restarts = r;
            }
            print(&pipeline::cmd_train_gpc(&features, &labels, &categories, &cfg, &out, common.jobs)?)
        }
        Command::Propagate {
            common,
            features,
            gpc,
            labels,
            tau,
            conflict_policy,
            out,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(t) = tau {
                cfg.propagation.tau = t;
            }
            if let Some(p) = conflict_policy {
                cfg.propagation.conflict_policy = match p {
                    Policy::Abandon => ConflictPolicy::Abandon,
                    Policy::HighestConfidence => ConflictPolicy::HighestConfidence,
                };
            }
            print(&pipeline::cmd_propagate(&features, &gpc, &labels, &cfg, &out)?)
        }
        Command::TrainClassifier {
            common,
            features,
            labels,
            propagated,
            categories,
            eta,
            epochs,
            learning_rate,
            out,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(v) = eta {
                cfg.training.eta = v;
            }
            if let Some(v) = epochs {
                cfg.training.epochs = v;
            }
            if let Some(v) = learning_rate {
                cfg.training.learning_rate = v;
            }
            let summary = pipeline::cmd_train_classifier(
                &features,
                &labels,
                propagated.as_deref(),
                &categories,
                &cfg.train_config(),
                &out,
            )?;
            print(&summary)
        }
        Command::Evaluate {
            proposals,
            features,
            classifier,
            categories,
            ground_truth,
            out,
        } => print(&pipeline::cmd_evaluate(
            &proposals,
            &features,
            &classifier,
            &categories,
            &ground_truth,
            &out,
        )?),
        Command::Pipeline {
            common,
            data,
            out,
            tau,
            eta,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(t) = tau {
                cfg.propagation.tau = t;
            }
            if let Some(e) = eta {
                cfg.training.eta = e;
            }
            print(&pipeline::cmd_pipeline(&cfg, &data, &out, common.jobs)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
