//! Label propagation: one-vs-rest GP classifiers trained on a few manual
//! labels claim the unlabelled pool items they are confident about.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rgbd_weak::features::FeatureVector;
use rgbd_weak::gpc::{ep_posterior, optimize_hyperparams, KernelHyperparams, TrainingSet};
use rgbd_weak::propagate::{propagate_labels, ConflictPolicy, PoolItem, PropagationConfig};

const CENTERS: [[f64; 3]; 3] = [[-1.5, 0.0, 0.0], [1.5, 0.0, 0.5], [0.0, 1.5, -0.5]];

fn sample(rng: &mut ChaCha8Rng, class: usize) -> FeatureVector {
    let n = Normal::new(0.0, 0.7).unwrap();
    FeatureVector::fused(CENTERS[class].iter().map(|c| c + n.sample(rng)).collect(), 2).unwrap()
}

fn main() -> rgbd_weak::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let names: Vec<String> = ["mug", "bowl", "cap"].iter().map(|s| s.to_string()).collect();
    let manual: Vec<(FeatureVector, usize)> = (0..15).map(|i| (sample(&mut rng, i % 3), i % 3)).collect();
    let pool: Vec<PoolItem> = (0..300)
        .map(|i| PoolItem {
            id: format!("item{i:03}"),
            features: sample(&mut rng, i % 3),
            source: Some(i % 3),
        })
        .collect();

    let x: Vec<FeatureVector> = manual.iter().map(|(f, _)| f.clone()).collect();
    let mut models = Vec::new();
    for c in 0..names.len() {
        let y = manual.iter().map(|(_, l)| if *l == c { 1.0 } else { -1.0 }).collect();
        let ts = TrainingSet::new(x.clone(), y)?;
        let (h, _) = optimize_hyperparams(&ts, &KernelHyperparams::new(1.0, 1.0, 1.0, 1.0)?, 3, c as u64)?;
        models.push(ep_posterior(&ts, &h, 1e-6, 100)?);
    }

    for tau in [0.6, 0.7, 0.8, 0.9] {
        let config = PropagationConfig {
            tau,
            conflict_policy: ConflictPolicy::Abandon,
        };
        let out = propagate_labels(&models, &names, &pool, &config)?;
        let correct = out
            .examples
            .iter()
            .zip(out.examples.iter().map(|e| pool.iter().find(|p| p.id == e.id).and_then(|p| p.source)))
            .filter(|(e, src)| Some(e.label) == *src)
            .count();
        println!(
            "tau {tau:.1}: {:3} propagated ({correct} correct), {} abandoned",
            out.examples.len(),
            out.report.abandoned
        );
    }
    Ok(())
}
