//! The weighted softmax classifier: manual labels at weight 1, propagated
//! labels at weight eta.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rgbd_weak::features::{FeatureVector, Modality};
use rgbd_weak::propagate::{
    predict_class, train_weighted_classifier, LabeledExample, Provenance, TrainConfig,
};

fn example(rng: &mut ChaCha8Rng, i: usize, provenance: Provenance, noise: f64) -> LabeledExample {
    let label = i % 3;
    let mut v: Vec<f64> = (0..3).map(|_| rng.random_range(-0.8..0.8)).collect();
    v[label] += 1.5;
    // Some propagated labels are wrong.
    let shown = if rng.random::<f64>() < noise { (label + 1) % 3 } else { label };
    LabeledExample {
        id: format!("{}{i:03}", provenance.as_str()),
        features: FeatureVector::new(v, Modality::Rgb).unwrap(),
        label: shown,
        provenance,
        confidence: if provenance == Provenance::Manual { 1.0 } else { rng.random_range(0.7..1.0) },
    }
}

fn main() -> rgbd_weak::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let manual: Vec<_> = (0..9).map(|i| example(&mut rng, i, Provenance::Manual, 0.0)).collect();
    let propagated: Vec<_> = (0..300).map(|i| example(&mut rng, i, Provenance::Propagated, 0.05)).collect();
    let test: Vec<_> = (0..600).map(|i| example(&mut rng, i, Provenance::Manual, 0.0)).collect();

    for eta in [0.0, 0.5, 1.0] {
        let config = TrainConfig {
            eta,
            ..TrainConfig::default()
        };
        let outcome = train_weighted_classifier(&manual, &propagated, 3, &config)?;
        let mut hits = 0;
        for e in &test {
            hits += (predict_class(&outcome.model, &e.features)?.0 == e.label) as usize;
        }
        println!(
            "eta {eta:.1}: final loss {:.4}, test accuracy {:.3}",
            outcome.loss,
            hits as f64 / test.len() as f64
        );
    }
    Ok(())
}
