//! Writes a synthetic tabletop data directory that `full_pipeline` and the
//! `rgbd-weak pipeline` subcommand accept.
//!
//! `cargo run --release --example make_fixture -- [out_dir] [seed]`

use rgbd_weak::synthetic::{write_fixture, FixtureSpec};

fn main() -> rgbd_weak::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "target/example-output/fixture".into());
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let spec = FixtureSpec::default();
    write_fixture(&out, &spec, seed)?;
    println!(
        "wrote {out}: {} training frames per category, {} test frames",
        spec.train_frames_per_category, spec.test_frames
    );
    for entry in ["camera.txt", "train", "test", "test_gt/index.json", "meshes"] {
        println!("  {out}/{entry}");
    }
    Ok(())
}
