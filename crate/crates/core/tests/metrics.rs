use proptest::prelude::*;
use rgbd_weak::io::png::write_mask;
use rgbd_weak::metrics::{
    f_score, instance_metrics, load_annotated_frames, match_instances, pixel_metrics, write_mask_index,
    AnnotatedFrame, IndexedFrame, IndexedMask, Instance, MaskIndex,
};
use rgbd_weak::raster::Mask;

const W: usize = 24;
const H: usize = 16;

fn rect(u0: usize, v0: usize, w: usize, h: usize) -> Mask {
    let mut m = Mask::new(W, H);
    for v in v0..(v0 + h).min(H) {
        for u in u0..(u0 + w).min(W) {
            m.set(u, v, true);
        }
    }
    m
}

fn instance() -> impl Strategy<Value = Instance> {
    (0..3usize, 0..W, 0..H, 1..10usize, 1..8usize).prop_map(|(c, u, v, w, h)| Instance {
        category: ["a", "b", "c"][c].to_string(),
        mask: rect(u, v, w, h),
    })
}

fn frame() -> impl Strategy<Value = AnnotatedFrame> {
    (prop::collection::vec(instance(), 0..6), prop::collection::vec(instance(), 0..6)).prop_map(|(g, p)| {
        AnnotatedFrame {
            frame_id: "f".into(),
            ground_truth: g,
            predictions: p,
        }
    })
}

#[test]
fn f_score_grid_properties() {
    for i in 0..=100 {
        for j in 0..=100 {
            let (p, r) = (i as f64 / 100.0, j as f64 / 100.0);
            let f = f_score(p, r).unwrap();
            assert_eq!(f, f_score(r, p).unwrap());
            if p > 0.0 && r > 0.0 {
                let m = p.min(r);
                assert!(f <= 2.0 * m + 1e-15 && f >= m - 1e-15);
            }
        }
    }
}

proptest! {
    #[test]
    fn tp_count_ignores_prediction_order(f in frame(), seed in any::<u64>()) {
        let mut shuffled = f.clone();
        let n = shuffled.predictions.len();
        if n > 1 {
            let k = (seed as usize) % n;
            shuffled.predictions.rotate_left(k);
            shuffled.predictions.reverse();
        }
        let tp = |fr: &AnnotatedFrame| match_instances(fr).unwrap().values().map(|c| c.tp).sum::<u64>();
        prop_assert_eq!(tp(&f), tp(&shuffled));
    }

    #[test]
    fn pixel_tp_plus_fn_is_gt_area(f in frame()) {
        prop_assume!(!f.ground_truth.is_empty() || !f.predictions.is_empty());
        let r = pixel_metrics(std::slice::from_ref(&f)).unwrap();
        for cat in &r.categories {
            let mut union = Mask::new(W, H);
            for g in f.ground_truth.iter().filter(|g| g.category == cat.category) {
                union.union_with(&g.mask);
            }
            prop_assert_eq!(cat.tp + cat.fn_, union.count() as u64);
        }
    }

    #[test]
    fn instance_counts_balance(f in frame()) {
        let r = instance_metrics(std::slice::from_ref(&f)).unwrap();
        prop_assert_eq!(r.overall.tp + r.overall.fp, f.predictions.len() as u64);
        prop_assert_eq!(r.overall.tp + r.overall.fn_, f.ground_truth.len() as u64);
    }
}

#[test]
fn masks_load_through_index() {
    let dir = tempfile::tempdir().unwrap();
    let gt_mask = rect(2, 2, 6, 5);
    let pred_mask = rect(3, 2, 6, 5);
    write_mask(dir.path().join("gt/f0_0.png"), &gt_mask).unwrap();
    write_mask(dir.path().join("pred/f0_0.png"), &pred_mask).unwrap();
    let gt = MaskIndex {
        version: 1,
        frames: vec![
            IndexedFrame {
                id: "f0".into(),
                masks: vec![IndexedMask { category: "mug".into(), mask: "f0_0.png".into() }],
            },
            IndexedFrame { id: "f1".into(), masks: vec![] },
        ],
    };
    let pred = MaskIndex {
        version: 1,
        frames: vec![IndexedFrame {
            id: "f0".into(),
            masks: vec![IndexedMask { category: "mug".into(), mask: "f0_0.png".into() }],
        }],
    };
    write_mask_index(dir.path().join("gt/index.json"), &gt).unwrap();
    write_mask_index(dir.path().join("pred/index.json"), &pred).unwrap();
    let frames = load_annotated_frames(dir.path().join("gt/index.json"), dir.path().join("pred/index.json")).unwrap();
    assert_eq!(frames.len(), 2);
    assert_eq!(frames[0].ground_truth[0].mask, gt_mask);
    assert_eq!(frames[0].predictions[0].mask, pred_mask);
    assert!(frames[1].predictions.is_empty());
    let r = instance_metrics(&frames).unwrap();
    assert_eq!(r.overall.tp, 1);

    let bad = MaskIndex {
        version: 1,
        frames: vec![IndexedFrame { id: "zz".into(), masks: vec![] }],
    };
    write_mask_index(dir.path().join("pred/bad.json"), &bad).unwrap();
    assert!(load_annotated_frames(dir.path().join("gt/index.json"), dir.path().join("pred/bad.json")).is_err());
}
