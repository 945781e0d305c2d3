//! Unsupervised objectness proposals: support-plane removal, three-cue
//! region growing over voxels, and projection of each cluster to a mask.

mod cluster;
mod connect;
mod mask;
mod ransac;

pub use cluster::{cluster_proposals, voxel_representatives, VoxelRep};
pub use connect::{connectable, cues_connect};
pub use mask::{proposal_to_mask, ObjectnessProposal};
pub use ransac::{remove_planes, PlaneFit, PlaneRemoval};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{estimate_normals, CameraModel, PointCloud, DEFAULT_NORMAL_NEIGHBORS};

/// Thresholds of the connectability test plus cluster-size filters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusteringParams {
    /// Meters.
    pub sigma_d: f64,
    /// Intensity units on 0..=255.
    pub sigma_c: f64,
    /// Degrees between normals.
    pub sigma_s: f64,
    pub voxel_leaf: f64,
    pub min_cluster_points: usize,
    pub min_cluster_extent: f64,
}

impl Default for ClusteringParams {
    fn default() -> Self {
        Self {
            sigma_d: 0.02,
            sigma_c: 8.0,
            sigma_s: 10.0,
            voxel_leaf: 0.01,
            min_cluster_points: 30,
            min_cluster_extent: 0.02,
        }
    }
}

impl ClusteringParams {
    pub fn validate(&self) -> Result<()> {
        let all_positive = [
            self.sigma_d,
            self.sigma_c,
            self.sigma_s,
            self.voxel_leaf,
            self.min_cluster_extent,
        ]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0);
        if !all_positive {
            return Err(Error::InvalidConfig("clustering thresholds must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlaneRemovalParams {
    /// Meters.
    pub inlier_threshold: f64,
    /// Fraction of the input cloud a plane must cover to be removed.
    pub min_plane_fraction: f64,
    pub max_iterations: usize,
    pub max_planes: usize,
}

impl Default for PlaneRemovalParams {
    fn default() -> Self {
        Self {
            inlier_threshold: 0.01,
            min_plane_fraction: 0.2,
            max_iterations: 500,
            max_planes: 3,
        }
    }
}

impl PlaneRemovalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.inlier_threshold.is_finite() && self.inlier_threshold > 0.0) {
            return Err(Error::InvalidConfig("inlier_threshold must be > 0".into()));
        }
        if !(self.min_plane_fraction > 0.0 && self.min_plane_fraction <= 1.0) {
            return Err(Error::InvalidConfig("min_plane_fraction must be in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Full detector for one frame: plane removal, normal estimation (unless
/// the cloud already carries normals), clustering and mask projection.
///
/// Proposal indices refer to `cloud`. Clusters that project entirely
/// off-screen are skipped.
pub fn detect_objects(
    cloud: &PointCloud,
    camera: &CameraModel,
    planes: &PlaneRemovalParams,
    clustering: &ClusteringParams,
    seed: u64,
) -> Result<Vec<ObjectnessProposal>> {
    planes.validate()?;
    clustering.validate()?;
    if cloud.is_empty() {
        return Ok(Vec::new());
    }
    let cloud = if cloud.intensities().is_none() {
        cloud.clone().with_intensity_from_colors()
    } else {
        cloud.clone()
    };
    if cloud.intensities().is_none() {
        return Err(Error::UnpreparedCloud("intensities or colors"));
    }
    let removal = remove_planes(&cloud, planes, seed)?;
    let mut rest = removal.remaining;
    if rest.len() <= DEFAULT_NORMAL_NEIGHBORS {
        return Ok(Vec::new());
    }
    if rest.normals().is_none() {
        rest = estimate_normals(&rest, DEFAULT_NORMAL_NEIGHBORS, &camera.center())?;
    }
    let mut out = Vec::new();
    for local in cluster_proposals(&rest, clustering)? {
        let global: Vec<usize> = local.iter().map(|&i| removal.remaining_indices[i]).collect();
        match proposal_to_mask(&global, &cloud, camera) {
            Ok(p) => out.push(p),
            Err(Error::OffScreenProposal) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
