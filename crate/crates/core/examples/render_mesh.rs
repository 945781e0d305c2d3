//! Renders the 30-view synthetic depth set for a mesh, either an OFF file
//! given on the command line or a built-in can.
//!
//! `cargo run --release --example render_mesh -- [out_dir] [mesh.off]`

use rgbd_weak::io::{png::write_depth, read_off};
use rgbd_weak::synth::{render_views, RenderConfig};
use rgbd_weak::synthetic::ObjectShape;

fn main() -> rgbd_weak::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = std::path::PathBuf::from(args.next().unwrap_or_else(|| "target/example-output/render".into()));
    let mesh = match args.next() {
        Some(path) => read_off(path)?,
        None => ObjectShape::Can.canonical_mesh(),
    };
    let config = RenderConfig::default();
    let views = render_views(&mesh, &config, 0)?;
    for (i, v) in views.iter().enumerate() {
        write_depth(out.join(format!("view_{i:02}.png")), &v.image)?;
    }
    let coverage: Vec<usize> = views.iter().map(|v| v.image.valid_count()).collect();
    println!(
        "{} views of {}x{} in {}; valid pixels per view {}..{}",
        views.len(),
        config.output_size,
        config.output_size,
        out.display(),
        coverage.iter().min().unwrap_or(&0),
        coverage.iter().max().unwrap_or(&0)
    );
    Ok(())
}
