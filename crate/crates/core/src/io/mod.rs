//! File formats: PLY clouds, OFF meshes, camera configs, PNG rasters and
//! JSON helpers.

pub mod off;
pub mod ply;
pub mod png;

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::CameraModel;

pub use off::{read_off, write_off};
pub use ply::{read_ply, write_ply};

pub fn read_camera(path: impl AsRef<Path>) -> Result<CameraModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    CameraModel::from_config_str(&text).map_err(|m| Error::parse(path, m))
}

pub fn write_camera(path: impl AsRef<Path>, cam: &CameraModel) -> Result<()> {
    let path = path.as_ref();
    write_atomic(path, cam.to_config_string().as_bytes())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

/// Writes through a temporary sibling and renames, so readers never observe
/// a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    let tmp = path.with_extension("tmp~");
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
}
