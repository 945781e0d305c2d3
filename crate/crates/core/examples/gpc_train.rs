//! Binary GP classification with a product RBF kernel over RGB and depth
//! features: evidence maximisation, then EP, then predictions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rgbd_weak::features::FeatureVector;
use rgbd_weak::gpc::{ep_posterior, optimize_hyperparams, KernelHyperparams, TrainingSet};

fn sample(rng: &mut ChaCha8Rng, center: f64) -> FeatureVector {
    let n = Normal::new(0.0, 1.0).unwrap();
    FeatureVector::fused(vec![center + n.sample(rng), center + n.sample(rng), center + n.sample(rng)], 2).unwrap()
}

fn main() -> rgbd_weak::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..40 {
        let positive = i % 2 == 0;
        x.push(sample(&mut rng, if positive { 0.6 } else { -0.6 }));
        y.push(if positive { 1.0 } else { -1.0 });
    }
    let ts = TrainingSet::new(x, y)?;
    let init = KernelHyperparams::new(1.0, 1.0, 1.0, 1.0)?;
    let (h, log_ml) = optimize_hyperparams(&ts, &init, 3, 0)?;
    println!("fitted {h:?}, log marginal likelihood {log_ml:.4}");

    let model = ep_posterior(&ts, &h, 1e-6, 100)?;
    println!("EP converged in {} sweeps", model.sweeps());
    for c in [-2.0, -0.5, 0.0, 0.5, 2.0] {
        let p = model.predict(&FeatureVector::fused(vec![c, c, c], 2)?)?;
        println!("  x = {c:+.1}: p(+1) = {:.3}, latent {:.3} +/- {:.3}", p.probability, p.latent_mean, p.latent_variance.sqrt());
    }
    let path = std::env::args().nth(1).unwrap_or_else(|| "target/example-output/gpc_model.json".into());
    model.save(&path)?;
    println!("saved {path}");
    Ok(())
}
