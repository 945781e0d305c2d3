use std::path::{Path, PathBuf};

use image::RgbImage;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, read_jsonl, rel_path, thread_pool, write_jsonl, PipelineConfig, MANIFEST_VERSION};
use crate::error::{Error, Result};
use crate::geometry::{CameraModel, PointCloud};
use crate::io::{png, read_camera, read_ply, write_atomic};
use crate::objectness::{detect_objects, ObjectnessProposal};
use crate::raster::{BoundingBox, DepthImage};
use crate::synth::{render_depth, render_rgb};

/// One line of `proposals.jsonl`. Paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalRecord {
    pub version: u32,
    /// `<frame>#<proposal>`; the key used by feature and label files.
    pub id: String,
    pub frame: String,
    pub proposal: usize,
    /// Directory the frame was found in, when nested one level below the
    /// input root. Single-category recordings use it as the category.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub indices: PathBuf,
    pub mask: PathBuf,
    pub rgb: PathBuf,
    pub depth: PathBuf,
    pub bbox: BoundingBox,
    pub centroid: [f64; 3],
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectSummary {
    pub frames: usize,
    pub proposals: usize,
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloudSource {
    pub frame: String,
    pub group: Option<String>,
    pub path: PathBuf,
}

/// PLY files under `input` in sorted order, or `input` itself when it is
/// a file. Frame ids are the `/`-joined relative path without extension.
pub fn discover_clouds(input: &Path) -> Result<Vec<CloudSource>> {
    let meta = std::fs::metadata(input).map_err(|e| Error::io(input, e))?;
    if meta.is_file() {
        let frame = input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        return Ok(vec![CloudSource {
            frame,
            group: None,
            path: input.to_path_buf(),
        }]);
    }
    let mut out = Vec::new();
    for entry in walkdir::WalkDir::new(input).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::parse(input, e.to_string()))?;
        let path = entry.path();
        if !entry.file_type().is_file() || path.extension().and_then(|e| e.to_str()) != Some("ply") {
            continue;
        }
        let rel = path.strip_prefix(input).expect("walkdir stays under root");
        let parts: Vec<String> = rel
            .with_extension("")
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect();
        out.push(CloudSource {
            frame: parts.join("/"),
            group: (parts.len() > 1).then(|| parts[0].clone()),
            path: path.to_path_buf(),
        });
    }
    Ok(out)
}

struct FrameResult {
    source: CloudSource,
    proposals: Vec<ObjectnessProposal>,
    rgb: RgbImage,
    depth: DepthImage,
}

fn color_image(cloud: &PointCloud, camera: &CameraModel) -> Result<RgbImage> {
    if cloud.colors().is_some() {
        return render_rgb(cloud, camera);
    }
    // Gray from intensities, or flat gray when the cloud has neither.
    let gray: Vec<[u8; 3]> = match cloud.intensities() {
        Some(i) => i.iter().map(|v| [v.round() as u8; 3]).collect(),
        None => vec![[128; 3]; cloud.len()],
    };
    render_rgb(&cloud.clone().with_colors(gray)?, camera)
}

fn detect_frame(source: CloudSource, camera: &CameraModel, config: &PipelineConfig) -> Result<FrameResult> {
    let cloud = read_ply(&source.path)?;
    let seed = derive_seed(config.seed, &source.frame);
    let proposals = detect_objects(&cloud, camera, &config.plane_removal, &config.clustering, seed)?;
    Ok(FrameResult {
        rgb: color_image(&cloud, camera)?,
        depth: render_depth(&cloud, camera),
        proposals,
        source,
    })
}

/// Runs plane removal, clustering and mask projection on every cloud and
/// writes `proposals.jsonl` plus masks, point indices and the rendered
/// RGB and depth frames under `out`.
///
/// All frames are processed before anything is written, so a bad input
/// leaves no manifest behind.
pub fn cmd_detect(
    input: &Path,
    camera: &Path,
    config: &PipelineConfig,
    out: &Path,
    jobs: Option<usize>,
) -> Result<DetectSummary> {
    config.validate()?;
    let camera = read_camera(camera)?;
    let sources = discover_clouds(input)?;
    let pool = thread_pool(jobs)?;
    let frames: Vec<FrameResult> = pool.install(|| {
        sources
            .into_par_iter()
            .map(|s| detect_frame(s, &camera, config))
            .collect::<Result<_>>()
    })?;

    super::create_dir(out)?;
    let mut records = Vec::new();
    for f in &frames {
        let frame = &f.source.frame;
        let rgb = rel_path(&["frames", frame, "rgb.png"]);
        let depth = rel_path(&["frames", frame, "depth.png"]);
        png::write_rgb(out.join(&rgb), &f.rgb)?;
        png::write_depth(out.join(&depth), &f.depth)?;
        for (k, p) in f.proposals.iter().enumerate() {
            let name = k.to_string();
            let mask = rel_path(&["masks", frame, &format!("{name}.png")]);
            let indices = rel_path(&["indices", frame, &format!("{name}.json")]);
            png::write_mask(out.join(&mask), &p.mask)?;
            write_atomic(&out.join(&indices), serde_json::to_string(&p.point_indices)?.as_bytes())?;
            records.push(ProposalRecord {
                version: MANIFEST_VERSION,
                id: format!("{frame}#{k}"),
                frame: frame.clone(),
                proposal: k,
                group: f.source.group.clone(),
                indices,
                mask,
                rgb: rgb.clone(),
                depth: depth.clone(),
                bbox: p.bbox,
                centroid: [p.centroid.x, p.centroid.y, p.centroid.z],
                points: p.point_indices.len(),
            });
        }
    }
    let manifest = out.join("proposals.jsonl");
    write_jsonl(&manifest, &records)?;
    Ok(DetectSummary {
        frames: frames.len(),
        proposals: records.len(),
        manifest,
    })
}

pub fn read_proposals(path: &Path) -> Result<Vec<ProposalRecord>> {
    read_jsonl(path)
}
