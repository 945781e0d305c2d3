use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ep::{gradient_at, run_ep, EpOptions};
use super::{Distances, KernelHyperparams, TrainingSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop once the ∞-norm of the log-space gradient drops below this.
    pub grad_tol: f64,
    /// Box on every log-parameter.
    pub log_bound: f64,
    pub ep: EpOptions,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            restarts: 5,
            max_iters: 200,
            grad_tol: 1e-6,
            log_bound: 7.0,
            ep: EpOptions::default(),
        }
    }
}

/// Maximizes the EP log marginal likelihood from `init` plus `restarts - 1`
/// seeded log-uniform starts in `[1e-2, 1e2]`.
pub fn optimize_hyperparams(
    ts: &TrainingSet,
    init: &KernelHyperparams,
    restarts: usize,
    seed: u64,
) -> Result<(KernelHyperparams, f64)> {
    let opts = OptimizeOptions {
        restarts,
        ..OptimizeOptions::default()
    };
    optimize_hyperparams_with(ts, init, seed, &opts)
}

pub fn optimize_hyperparams_with(
    ts: &TrainingSet,
    init: &KernelHyperparams,
    seed: u64,
    opts: &OptimizeOptions,
) -> Result<(KernelHyperparams, f64)> {
    init.validate()?;
    if !ts.has_both_labels() {
        return Err(Error::DegenerateLabels);
    }
    let dist = Distances::new(ts);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = 1e-2f64.ln();
    let hi = 1e2f64.ln();
    let mut starts = vec![init.to_log()];
    for _ in 1..opts.restarts.max(1) {
        starts.push(std::array::from_fn(|_| rng.random_range(lo..hi)));
    }

    let mut best: Option<([f64; 4], f64)> = None;
    let mut last_err = None;
    for s in starts {
        match ascend(ts, &dist, s, opts) {
            Ok((t, f)) => {
                if best.is_none_or(|(_, bf)| f > bf) {
                    best = Some((t, f));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some((t, f)) => Ok((KernelHyperparams::from_log(&t), f)),
        None => Err(Error::OptimizationFailed(format!(
            "EP failed from every start (last: {})",
            last_err.map_or_else(|| "none".into(), |e| e.to_string())
        ))),
    }
}

fn evaluate(ts: &TrainingSet, dist: &Distances, t: &Vector4<f64>, opts: &OptimizeOptions) -> Result<(f64, Vector4<f64>)> {
    let h = KernelHyperparams::from_log(&[t[0], t[1], t[2], t[3]]);
    let model = run_ep(ts, dist, &h, &opts.ep)?;
    let g = gradient_at(&model, dist);
    Ok((model.log_marginal_likelihood(), Vector4::from(g)))
}

/// Quasi-Newton ascent (BFGS inverse-Hessian direction, Armijo backtracking)
/// projected onto the log-parameter box.
fn ascend(ts: &TrainingSet, dist: &Distances, start: [f64; 4], opts: &OptimizeOptions) -> Result<([f64; 4], f64)> {
    let bound = opts.log_bound;
    let clamp = |v: Vector4<f64>| v.map(|x| x.clamp(-bound, bound));
    let mut t = clamp(Vector4::from(start));
    let (mut f, mut g) = evaluate(ts, dist, &t, opts)?;
    let mut hinv = Matrix4::<f64>::identity();
    let mut stalled = false;

    for _ in 0..opts.max_iters {
        if g.amax() < opts.grad_tol {
            break;
        }
        let mut dir = hinv * g;
        if dir.dot(&g) <= 0.0 {
            hinv = Matrix4::identity();
            dir = g;
        }
        let max_len = 2.0;
        if dir.norm() > max_len {
            dir *= max_len / dir.norm();
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand = clamp(t + dir * step);
            let s = cand - t;
            if s.amax() == 0.0 {
                break;
            }
            if let Ok((fc, gc)) = evaluate(ts, dist, &cand, opts) {
                if fc >= f + 1e-4 * g.dot(&s) {
                    accepted = Some((cand, fc, gc));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((cand, fc, gc)) = accepted else {
            if hinv == Matrix4::identity() {
                break;
            }
            hinv = Matrix4::identity();
            continue;
        };
        let s = cand - t;
        // Minimizing −f: y = ∇(−f)(new) − ∇(−f)(old).
        let yv = g - gc;
        let sy = s.dot(&yv);
        if sy > 1e-12 {
            let rho = 1.0 / sy;
            let i = Matrix4::<f64>::identity();
            hinv = (i - rho * s * yv.transpose()) * hinv * (i - rho * yv * s.transpose()) + rho * s * s.transpose();
        }
        let improved = fc - f;
        t = cand;
        f = fc;
        g = gc;
        if improved.abs() < 1e-12 * (1.0 + f.abs()) {
            // Flat ridge: retry once along the raw gradient before stopping.
            if stalled {
                break;
            }
            stalled = true;
            hinv = Matrix4::identity();
        } else {
            stalled = false;
        }
    }
    Ok(([t[0], t[1], t[2], t[3]], f))
}
