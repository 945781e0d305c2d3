use std::path::{Path, PathBuf};
use std::process::Command;

use rgbd_weak::io::write_ply;
use rgbd_weak::pipeline::{cmd_detect, cmd_pipeline, read_proposals, PipelineConfig};
use rgbd_weak::synthetic::{generate_scene, write_fixture, FixtureSpec, ObjectShape, SceneConfig};

fn fast_config() -> PipelineConfig {
    let mut c = PipelineConfig::default();
    c.render.sample_count = 4000;
    c.seed = 5;
    c
}

fn three_object_frame(dir: &Path) -> (PathBuf, PathBuf) {
    let cfg = SceneConfig::default();
    let scene = generate_scene(&cfg, &[ObjectShape::Ball, ObjectShape::Box, ObjectShape::Can], 21).unwrap();
    let frames = dir.join("frames");
    write_ply(frames.join("scene.ply"), &scene.cloud).unwrap();
    let camera = dir.join("camera.txt");
    rgbd_weak::io::write_camera(&camera, &scene.camera).unwrap();
    (frames, camera)
}

#[test]
fn three_object_scene_gives_three_proposals() {
    let tmp = tempfile::tempdir().unwrap();
    let (frames, camera) = three_object_frame(tmp.path());
    let out = tmp.path().join("out");
    let s = cmd_detect(&frames, &camera, &PipelineConfig::default(), &out, None).unwrap();
    assert_eq!((s.frames, s.proposals), (1, 3));
    let records = read_proposals(&s.manifest).unwrap();
    assert_eq!(records.len(), 3);
    for r in &records {
        assert_eq!(r.version, 1);
        assert_eq!(r.frame, "scene");
        for p in [&r.mask, &r.indices, &r.rgb, &r.depth] {
            assert!(out.join(p).is_file(), "{p:?}");
        }
        let idx: Vec<usize> = serde_json::from_str(&std::fs::read_to_string(out.join(&r.indices)).unwrap()).unwrap();
        assert_eq!(idx.len(), r.points);
    }
}

#[test]
fn detect_is_independent_of_jobs_and_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let (frames, camera) = three_object_frame(tmp.path());
    let cfg = PipelineConfig::default();
    let a = cmd_detect(&frames, &camera, &cfg, &tmp.path().join("a"), Some(1)).unwrap();
    let first = std::fs::read(&a.manifest).unwrap();
    let b = cmd_detect(&frames, &camera, &cfg, &tmp.path().join("b"), Some(4)).unwrap();
    assert_eq!(first, std::fs::read(&b.manifest).unwrap());
    cmd_detect(&frames, &camera, &cfg, &tmp.path().join("a"), Some(2)).unwrap();
    assert_eq!(first, std::fs::read(&a.manifest).unwrap());
}

#[test]
fn empty_directory_gives_empty_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, camera) = three_object_frame(tmp.path());
    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let s = cmd_detect(&empty, &camera, &PipelineConfig::default(), &tmp.path().join("out"), None).unwrap();
    assert_eq!(s.proposals, 0);
    assert_eq!(std::fs::read_to_string(&s.manifest).unwrap(), "");
}

#[test]
fn corrupt_cloud_leaves_no_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let (frames, camera) = three_object_frame(tmp.path());
    std::fs::write(frames.join("zz_broken.ply"), b"ply\nformat ascii 1.0\nelement vertex 3\n").unwrap();
    let out = tmp.path().join("out");
    let err = cmd_detect(&frames, &camera, &PipelineConfig::default(), &out, None).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(!out.join("proposals.jsonl").exists());
}

#[test]
fn invalid_tau_fails_before_any_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = fast_config();
    cfg.propagation.tau = 1.01;
    let out = tmp.path().join("run");
    let err = cmd_pipeline(&cfg, &tmp.path().join("missing"), &out, None).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(!out.exists());
}

#[test]
fn end_to_end_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    write_fixture(&data, &FixtureSpec::default(), 3).unwrap();
    let cfg = fast_config();
    let m1 = cmd_pipeline(&cfg, &data, &tmp.path().join("r1"), Some(2)).unwrap();
    let m2 = cmd_pipeline(&cfg, &data, &tmp.path().join("r2"), None).unwrap();
    assert_eq!(m1, m2);
    for f in m1.outputs.iter().chain([&PathBuf::from("run_manifest.json")]) {
        let a = std::fs::read(tmp.path().join("r1").join(f)).unwrap();
        let b = std::fs::read(tmp.path().join("r2").join(f)).unwrap();
        assert!(a == b, "{f:?} differs");
    }
    assert!(m1.counts["weak_instance_f_score"] > 0.0);
    assert_eq!(m1.counts["rendered_views"], 90.0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("r1/eval/weak/report.json")).unwrap()).unwrap();
    assert_eq!(report["version"], 1);
}

#[test]
fn cli_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_rgbd-weak");
    let tmp = tempfile::tempdir().unwrap();
    let (frames, camera) = three_object_frame(tmp.path());

    let ok = Command::new(bin)
        .args(["detect", "--input"])
        .arg(&frames)
        .arg("--camera")
        .arg(&camera)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(summary["proposals"], 3);

    let usage = Command::new(bin).arg("detect").output().unwrap();
    assert_eq!(usage.status.code(), Some(1));

    let missing = Command::new(bin)
        .args(["detect", "--input", "/nonexistent/path", "--camera"])
        .arg(&camera)
        .arg("--out")
        .arg(tmp.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));

    let config = tmp.path().join("bad.toml");
    std::fs::write(&config, "[propagation]\ntau = 1.01\n").unwrap();
    let bad = Command::new(bin)
        .args(["pipeline", "--config"])
        .arg(&config)
        .arg("--data")
        .arg(tmp.path())
        .arg("--out")
        .arg(tmp.path().join("run"))
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("tau"));
}
