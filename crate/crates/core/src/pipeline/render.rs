use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, thread_pool, PipelineConfig, MANIFEST_VERSION};
use crate::error::{Error, Result};
use crate::io::{png, read_off, write_json};
use crate::synth::{render_views, RenderedView, ViewPose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewRecord {
    pub file: PathBuf,
    pub pose: ViewPose,
}

/// `views.json` written next to the depth PNGs of one mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewsManifest {
    pub version: u32,
    pub mesh: String,
    pub views: Vec<ViewRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenderSummary {
    pub meshes: usize,
    pub views: usize,
    pub manifests: Vec<PathBuf>,
}

fn mesh_files(input: &Path) -> Result<Vec<PathBuf>> {
    let meta = std::fs::metadata(input).map_err(|e| Error::io(input, e))?;
    if meta.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    let mut out: Vec<PathBuf> = std::fs::read_dir(input)
        .map_err(|e| Error::io(input, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("off"))
        .collect();
    out.sort();
    Ok(out)
}

/// Renders every `.off` mesh under `input` from the configured camera rig
/// into `out/<mesh>/view_NN.png` (16-bit millimeters) plus `views.json`.
pub fn cmd_render(input: &Path, config: &PipelineConfig, out: &Path, jobs: Option<usize>) -> Result<RenderSummary> {
    config.render.validate()?;
    let files = mesh_files(input)?;
    let meshes = files
        .iter()
        .map(|f| {
            let name = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, read_off(f)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let rendered: Vec<Vec<RenderedView>> = thread_pool(jobs)?.install(|| {
        meshes
            .par_iter()
            .map(|(name, mesh)| render_views(mesh, &config.render, derive_seed(config.seed, name)))
            .collect::<Result<_>>()
    })?;

    let mut manifests = Vec::new();
    let mut total = 0;
    for ((name, _), views) in meshes.iter().zip(&rendered) {
        let dir = out.join(name);
        let mut records = Vec::with_capacity(views.len());
        for (k, v) in views.iter().enumerate() {
            let file = PathBuf::from(format!("view_{k:02}.png"));
            png::write_depth(dir.join(&file), &v.image)?;
            records.push(ViewRecord { file, pose: v.pose });
        }
        total += records.len();
        let path = dir.join("views.json");
        write_json(
            &path,
            &ViewsManifest {
                version: MANIFEST_VERSION,
                mesh: name.clone(),
                views: records,
            },
        )?;
        manifests.push(path);
    }
    Ok(RenderSummary {
        meshes: meshes.len(),
        views: total,
        manifests,
    })
}
