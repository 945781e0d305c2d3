use nalgebra::{DMatrix, DVector};

use super::model::{factorize, jittered_gram, GpcModel};
use super::normal::pdf_over_cdf;
use super::{Distances, KernelHyperparams, TrainingSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpOptions {
    pub tol: f64,
    pub max_sweeps: usize,
    /// Weight on the freshly computed site value; the rest stays on the old one.
    pub damping: f64,
}

impl Default for EpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_sweeps: 100,
            damping: 0.8,
        }
    }
}

/// Fits EP sites for the probit likelihood, visiting sites in index order.
pub fn ep_posterior(ts: &TrainingSet, h: &KernelHyperparams, tol: f64, max_sweeps: usize) -> Result<GpcModel> {
    let opts = EpOptions {
        tol,
        max_sweeps,
        ..EpOptions::default()
    };
    run_ep(ts, &Distances::new(ts), h, &opts)
}

pub(crate) fn run_ep(ts: &TrainingSet, dist: &Distances, h: &KernelHyperparams, opts: &EpOptions) -> Result<GpcModel> {
    h.validate()?;
    if !ts.has_both_labels() {
        return Err(Error::DegenerateLabels);
    }
    let (k, jitter) = jittered_gram(dist, h)?;
    let y = ts.labels();
    let n = ts.len();
    let mut tau = DVector::<f64>::zeros(n);
    let mut nu = DVector::<f64>::zeros(n);
    let mut sigma = k.clone();
    let mut mu = DVector::<f64>::zeros(n);

    let mut change = f64::INFINITY;
    let mut sweeps = 0;
    while change >= opts.tol {
        if sweeps == opts.max_sweeps {
            return Err(Error::NotConverged { sweeps, change });
        }
        sweeps += 1;
        change = 0.0;
        for i in 0..n {
            let s_ii = sigma[(i, i)];
            let tau_c = 1.0 / s_ii - tau[i];
            if !(tau_c > 0.0) {
                continue;
            }
            let nu_c = mu[i] / s_ii - nu[i];
            let var_c = 1.0 / tau_c;
            let mean_c = nu_c * var_c;
            let denom = (1.0 + var_c).sqrt();
            let z = y[i] * mean_c / denom;
            let r = pdf_over_cdf(z);
            let mean_hat = mean_c + y[i] * var_c * r / denom;
            let var_hat = var_c - var_c * var_c * r * (z + r) / (1.0 + var_c);

            let tau_new = (opts.damping * (1.0 / var_hat - tau_c) + (1.0 - opts.damping) * tau[i]).max(0.0);
            let nu_new = opts.damping * (mean_hat / var_hat - nu_c) + (1.0 - opts.damping) * nu[i];
            let d_tau = tau_new - tau[i];
            change = change.max(d_tau.abs()).max((nu_new - nu[i]).abs());
            tau[i] = tau_new;
            nu[i] = nu_new;

            let s_i = sigma.column(i).clone_owned();
            sigma.ger(-d_tau / (1.0 + d_tau * s_ii), &s_i, &s_i, 1.0);
            mu = &sigma * &nu;
        }
        // Rank-one updates drift; refresh Σ and μ from the sites each sweep.
        let (_, s, m) = factorize(&k, &tau, &nu)?;
        sigma = s;
        mu = m;
        if !change.is_finite() {
            return Err(Error::NotConverged { sweeps, change });
        }
    }
    GpcModel::assemble(ts.clone(), *h, &k, jitter, tau, nu, sweeps)
}

/// Gradient of the EP log marginal likelihood with respect to
/// `(ln α_I, ln β_I, ln α_D, ln β_D)`.
pub fn log_ml_gradient(ts: &TrainingSet, h: &KernelHyperparams) -> Result<[f64; 4]> {
    let dist = Distances::new(ts);
    let model = run_ep(ts, &dist, h, &EpOptions::default())?;
    Ok(gradient_at(&model, &dist))
}

pub(crate) fn gradient_at(model: &GpcModel, dist: &Distances) -> [f64; 4] {
    let h = model.hyperparams();
    let post = model.posterior();
    let n = post.sw.len();
    let k_raw = dist.gram(h);
    let k = super::model::with_jitter(&k_raw, model.jitter() * k_raw.diagonal().mean());

    // F = ααᵀ − S̃^½ B⁻¹ S̃^½
    let linv = post
        .l
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .expect("factor is nonsingular");
    let mut r = linv.transpose() * linv;
    for i in 0..n {
        for j in 0..n {
            r[(i, j)] *= post.sw[i] * post.sw[j];
        }
    }
    let f = &post.alpha * post.alpha.transpose() - r;

    // Jitter scales with α², so ∂K/∂ln α = 2K including the diagonal term.
    let d_alpha = f.dot(&k);
    let d_beta_i = 0.5 * f.dot(&k_raw.component_mul(&dist.rgb)) / (h.beta_i * h.beta_i);
    let d_beta_d = 0.5 * f.dot(&k_raw.component_mul(&dist.depth)) / (h.beta_d * h.beta_d);
    [d_alpha, d_beta_i, d_alpha, d_beta_d]
}
