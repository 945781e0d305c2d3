use std::collections::{BTreeMap, VecDeque};

use nalgebra::Vector3;

use super::{cues_connect, ClusteringParams};
use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud};

pub type VoxelKey = (i64, i64, i64);

/// Summary of one occupied voxel: member centroid, renormalized mean
/// normal and mean intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelRep {
    pub key: VoxelKey,
    pub centroid: Point3,
    pub normal: Vector3<f64>,
    pub intensity: f64,
    pub members: Vec<usize>,
}

/// Voxelizes a prepared cloud at `leaf`, in lexicographic key order.
pub fn voxel_representatives(cloud: &PointCloud, leaf: f64) -> Result<Vec<VoxelRep>> {
    let normals = cloud.normals().ok_or(Error::UnpreparedCloud("normals"))?;
    let intens = cloud.intensities().ok_or(Error::UnpreparedCloud("intensities"))?;
    let mut grid: BTreeMap<VoxelKey, Vec<usize>> = BTreeMap::new();
    for (i, p) in cloud.points().iter().enumerate() {
        let key = (
            (p.x / leaf).floor() as i64,
            (p.y / leaf).floor() as i64,
            (p.z / leaf).floor() as i64,
        );
        grid.entry(key).or_default().push(i);
    }
    Ok(grid
        .into_iter()
        .map(|(key, members)| {
            let n = members.len() as f64;
            let pts = cloud.points();
            let centroid = members.iter().fold(Vector3::zeros(), |a, &i| a + pts[i].coords) / n;
            let normal_sum = members.iter().fold(Vector3::zeros(), |a, &i| a + normals[i]);
            let normal = normal_sum
                .try_normalize(1e-9)
                .unwrap_or(normals[members[0]]);
            let intensity = members.iter().map(|&i| intens[i]).sum::<f64>() / n;
            VoxelRep {
                key,
                centroid: Point3::from(centroid),
                normal,
                intensity,
                members,
            }
        })
        .collect())
}

fn reps_connect(a: &VoxelRep, b: &VoxelRep, params: &ClusteringParams) -> bool {
    cues_connect(
        &a.centroid,
        &a.normal,
        a.intensity,
        &b.centroid,
        &b.normal,
        b.intensity,
        params,
    )
}

/// Region growing over 26-connected voxels under the connectability test.
///
/// Returns point-index lists (ascending within each cluster), ordered by the
/// lexicographically first voxel of each cluster. Clusters with fewer than
/// `min_cluster_points` points or a largest bounding-box side below
/// `min_cluster_extent` are dropped.
pub fn cluster_proposals(cloud: &PointCloud, params: &ClusteringParams) -> Result<Vec<Vec<usize>>> {
    if cloud.is_empty() {
        return Ok(Vec::new());
    }
    let reps = voxel_representatives(cloud, params.voxel_leaf)?;
    let slot: BTreeMap<VoxelKey, usize> = reps.iter().enumerate().map(|(i, r)| (r.key, i)).collect();
    let mut label: Vec<Option<usize>> = vec![None; reps.len()];
    let mut components: Vec<Vec<usize>> = Vec::new();

    for seed in 0..reps.len() {
        if label[seed].is_some() {
            continue;
        }
        let id = components.len();
        label[seed] = Some(id);
        let mut members = vec![seed];
        let mut queue = VecDeque::from([seed]);
        while let Some(cur) = queue.pop_front() {
            let (x, y, z) = reps[cur].key;
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        let Some(&nb) = slot.get(&(x + dx, y + dy, z + dz)) else {
                            continue;
                        };
                        if label[nb].is_none() && reps_connect(&reps[cur], &reps[nb], params) {
                            label[nb] = Some(id);
                            members.push(nb);
                            queue.push_back(nb);
                        }
                    }
                }
            }
        }
        components.push(members);
    }

    let pts = cloud.points();
    Ok(components
        .into_iter()
        .map(|voxels| {
            let mut idx: Vec<usize> = voxels
                .iter()
                .flat_map(|&v| reps[v].members.iter().copied())
                .collect();
            idx.sort_unstable();
            idx
        })
        .filter(|idx| {
            idx.len() >= params.min_cluster_points && extent(pts, idx) >= params.min_cluster_extent
        })
        .collect())
}

fn extent(pts: &[Point3], idx: &[usize]) -> f64 {
    let first = pts[idx[0]];
    let (lo, hi) = idx
        .iter()
        .fold((first, first), |(lo, hi), &i| (lo.inf(&pts[i]), hi.sup(&pts[i])));
    (hi - lo).max()
}
