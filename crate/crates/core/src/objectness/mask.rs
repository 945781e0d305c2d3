use crate::error::{Error, Result};
use crate::geometry::{CameraModel, Point3, PointCloud};
use crate::raster::{BoundingBox, Mask};

/// One detected cluster with its boundary-aware 2D footprint.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectnessProposal {
    pub point_indices: Vec<usize>,
    pub mask: Mask,
    pub bbox: BoundingBox,
    pub centroid: Point3,
}

/// Rasterizes the cluster's points to their nearest pixels.
pub fn proposal_to_mask(indices: &[usize], cloud: &PointCloud, camera: &CameraModel) -> Result<ObjectnessProposal> {
    if indices.is_empty() {
        return Err(Error::EmptyInput);
    }
    let pts = cloud.points();
    if let Some(&bad) = indices.iter().find(|&&i| i >= pts.len()) {
        return Err(Error::InvalidValue(format!("index {bad} out of range")));
    }
    let mut mask = Mask::new(camera.width(), camera.height());
    for &i in indices {
        let Ok(proj) = camera.project(&pts[i]) else {
            continue;
        };
        if let Some((u, v)) = proj.pixel(camera.width(), camera.height()) {
            mask.set(u, v, true);
        }
    }
    let bbox = mask.bbox().ok_or(Error::OffScreenProposal)?;
    let sum = indices
        .iter()
        .fold(nalgebra::Vector3::zeros(), |a, &i| a + pts[i].coords);
    Ok(ObjectnessProposal {
        point_indices: indices.to_vec(),
        mask,
        bbox,
        centroid: Point3::from(sum / indices.len() as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam() -> CameraModel {
        CameraModel::pinhole(500.0, 500.0, 250.0, 250.0, 500, 500).unwrap()
    }

    #[test]
    fn single_axis_point() {
        let cloud = PointCloud::new(vec![Point3::new(0.0, 0.0, 1.0)]).unwrap();
        let p = proposal_to_mask(&[0], &cloud, &cam()).unwrap();
        assert!(p.mask.get(250, 250));
        assert_eq!(p.mask.count(), 1);
        assert_eq!(p.bbox, BoundingBox::point(250, 250));
    }

    #[test]
    fn cube_face_width_follows_similar_triangles() {
        let mut pts = Vec::new();
        for i in 0..=40 {
            for j in 0..=40 {
                pts.push(Point3::new(-0.05 + 0.0025 * i as f64, -0.05 + 0.0025 * j as f64, 1.0));
            }
        }
        let idx: Vec<usize> = (0..pts.len()).collect();
        let p = proposal_to_mask(&idx, &PointCloud::new(pts).unwrap(), &cam()).unwrap();
        let w = p.bbox.width() as f64;
        assert!((w - 50.0).abs() <= 2.0, "{w}");
        assert!(p.mask.count() <= idx.len());
    }

    #[test]
    fn behind_camera_only() {
        let cloud = PointCloud::new(vec![Point3::new(0.0, 0.0, -1.0), Point3::new(0.1, 0.0, -2.0)]).unwrap();
        assert!(matches!(proposal_to_mask(&[0, 1], &cloud, &cam()), Err(Error::OffScreenProposal)));
    }
}
