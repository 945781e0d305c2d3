//! RGB and depth descriptors for each detected proposal in a scene.

use image::imageops::crop_imm;
use rgbd_weak::features::{extract_depth_features, extract_rgb_features};
use rgbd_weak::objectness::{detect_objects, ClusteringParams, PlaneRemovalParams};
use rgbd_weak::synthetic::{generate_scene, ObjectShape, SceneConfig};

fn main() -> rgbd_weak::Result<()> {
    let scene = generate_scene(
        &SceneConfig::default(),
        &[ObjectShape::Ball, ObjectShape::Can, ObjectShape::Box],
        3,
    )?;
    let cloud = scene.cloud.clone().with_intensity_from_colors();
    let proposals = detect_objects(
        &cloud,
        &scene.camera,
        &PlaneRemovalParams::default(),
        &ClusteringParams::default(),
        3,
    )?;
    let rgb = scene.rgb_image();
    let depth = scene.depth_image();
    for (k, p) in proposals.iter().enumerate() {
        let b = p.bbox;
        let crop = crop_imm(&rgb, b.u_min as u32, b.v_min as u32, b.width() as u32, b.height() as u32).to_image();
        let f_rgb = extract_rgb_features(&crop)?;
        let f_depth = extract_depth_features(&depth.crop(&b))?;
        let head: Vec<String> = f_rgb.values().iter().take(4).map(|v| format!("{v:.3}")).collect();
        println!(
            "#{k}: crop {}x{}, rgb dim {} [{} ...], depth dim {}",
            b.width(),
            b.height(),
            f_rgb.len(),
            head.join(", "),
            f_depth.len()
        );
    }
    Ok(())
}
