//! Instance-wise and pixel-wise precision/recall/F-score of detected masks
//! against the ground truth of a few synthetic scenes. Proposals are named
//! by their majority object, so the scores measure segmentation quality.

use rgbd_weak::metrics::{instance_metrics, pixel_metrics, AnnotatedFrame, EvaluationReport, Instance};
use rgbd_weak::objectness::{detect_objects, ClusteringParams, PlaneRemovalParams};
use rgbd_weak::synthetic::{generate_random_scene, SceneConfig};

fn main() -> rgbd_weak::Result<()> {
    let config = SceneConfig::default();
    let mut frames = Vec::new();
    for seed in 0..5 {
        let scene = generate_random_scene(&config, seed)?;
        let cloud = scene.cloud.clone().with_intensity_from_colors();
        let proposals = detect_objects(
            &cloud,
            &scene.camera,
            &PlaneRemovalParams::default(),
            &ClusteringParams::default(),
            seed,
        )?;
        let truth = scene.instance_masks();
        let ground_truth = scene
            .objects
            .iter()
            .zip(&truth)
            .map(|(o, m)| Instance {
                category: o.shape.name().to_string(),
                mask: m.clone(),
            })
            .collect();
        let predictions = proposals
            .iter()
            .filter_map(|p| {
                let mut votes = vec![0usize; scene.objects.len()];
                for &i in &p.point_indices {
                    if let Some(o) = scene.owners[i] {
                        votes[o] += 1;
                    }
                }
                let best = (0..votes.len()).max_by_key(|&o| votes[o])?;
                Some(Instance {
                    category: scene.objects[best].shape.name().to_string(),
                    mask: p.mask.clone(),
                })
            })
            .collect();
        frames.push(AnnotatedFrame {
            frame_id: format!("scene_{seed}"),
            ground_truth,
            predictions,
        });
    }
    let report = EvaluationReport {
        version: 1,
        frames: frames.len(),
        instance: instance_metrics(&frames)?,
        pixel: pixel_metrics(&frames)?,
    };
    print!("{}", report.to_table());
    Ok(())
}
