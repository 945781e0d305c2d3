//! Class-agnostic objectness detection on one synthetic tabletop scene:
//! plane removal, connectability clustering and mask projection.

use rgbd_weak::io::png::write_mask;
use rgbd_weak::objectness::{detect_objects, ClusteringParams, PlaneRemovalParams};
use rgbd_weak::synthetic::{generate_scene, ObjectShape, SceneConfig};

fn main() -> rgbd_weak::Result<()> {
    let out = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "target/example-output/detect".into()));
    let scene = generate_scene(
        &SceneConfig::default(),
        &[ObjectShape::Ball, ObjectShape::Box, ObjectShape::Can],
        7,
    )?;
    let cloud = scene.cloud.clone().with_intensity_from_colors();
    let proposals = detect_objects(
        &cloud,
        &scene.camera,
        &PlaneRemovalParams::default(),
        &ClusteringParams::default(),
        7,
    )?;
    let truth = scene.instance_masks();
    println!("{} points, {} objects, {} proposals", cloud.len(), scene.objects.len(), proposals.len());
    for (k, p) in proposals.iter().enumerate() {
        // Best-overlapping ground-truth object, by Dice coefficient.
        let (obj, dice) = truth
            .iter()
            .enumerate()
            .map(|(i, m)| (i, 2.0 * p.mask.intersection_count(m) as f64 / (p.mask.count() + m.count()) as f64))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, 0.0));
        println!(
            "  #{k}: {:5} points, bbox {:?}, best match {} (dice {dice:.3})",
            p.point_indices.len(),
            (p.bbox.u_min, p.bbox.v_min, p.bbox.u_max, p.bbox.v_max),
            scene.objects[obj].shape.name()
        );
        write_mask(out.join(format!("proposal_{k}.png")), &p.mask)?;
    }
    Ok(())
}
