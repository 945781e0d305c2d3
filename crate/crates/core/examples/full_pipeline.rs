//! Every stage end to end on a generated fixture: render, detect, features,
//! GP training, propagation, the weak and manual-only classifiers, evaluation.
//!
//! `cargo run --release --example full_pipeline -- [work_dir] [seed]`

use std::path::PathBuf;

use rgbd_weak::pipeline::{cmd_pipeline, PipelineConfig};
use rgbd_weak::synthetic::{write_fixture, FixtureSpec};

fn main() -> rgbd_weak::Result<()> {
    let mut args = std::env::args().skip(1);
    let work = PathBuf::from(args.next().unwrap_or_else(|| "target/example-output/pipeline".into()));
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(2);
    let data = work.join("data");
    write_fixture(&data, &FixtureSpec::default(), seed)?;

    let config = PipelineConfig {
        seed,
        ..PipelineConfig::default()
    };
    let run = work.join("run");
    let manifest = cmd_pipeline(&config, &data, &run, None)?;
    for (k, v) in &manifest.counts {
        println!("{k:>32}: {v}");
    }
    for variant in ["weak", "manual_only"] {
        let table = std::fs::read_to_string(run.join("eval").join(variant).join("report.txt"))
            .map_err(|e| rgbd_weak::Error::io(run.join("eval"), e))?;
        println!("\n{variant}\n{table}");
    }
    Ok(())
}
