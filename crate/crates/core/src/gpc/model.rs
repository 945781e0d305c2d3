use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::normal::{log_norm_cdf, norm_cdf};
use super::{kernel_eval, Distances, KernelHyperparams, TrainingSet};
use crate::error::{Error, Result};
use crate::features::FeatureVector;

pub const MODEL_VERSION: u32 = 1;

const JITTER_START: f64 = 1e-8;
const JITTER_MAX: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub probability: f64,
    pub latent_mean: f64,
    pub latent_variance: f64,
}

/// Factor of `B = I + S̃^½ K S̃^½` plus the vectors prediction needs.
#[derive(Debug, Clone)]
pub(crate) struct Posterior {
    pub l: DMatrix<f64>,
    pub sw: DVector<f64>,
    pub alpha: DVector<f64>,
}

/// Posterior of one EP fit. Immutable once built; share freely across
/// threads for prediction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ModelRecord", into = "ModelRecord")]
pub struct GpcModel {
    hyperparams: KernelHyperparams,
    train: TrainingSet,
    jitter: f64,
    site_nu: DVector<f64>,
    site_tau: DVector<f64>,
    log_ml: f64,
    sweeps: usize,
    post: Posterior,
}

/// Jittered Gram matrix and the relative jitter that made it factorizable.
pub(crate) fn jittered_gram(dist: &Distances, h: &KernelHyperparams) -> Result<(DMatrix<f64>, f64)> {
    let k = dist.gram(h);
    let mean_diag = k.diagonal().mean();
    let mut rel = JITTER_START;
    while rel <= JITTER_MAX {
        let kj = with_jitter(&k, rel * mean_diag);
        if kj.clone().cholesky().is_some() {
            return Ok((kj, rel));
        }
        rel *= 2.0;
    }
    Err(Error::IllConditionedKernel)
}

pub(crate) fn with_jitter(k: &DMatrix<f64>, eps: f64) -> DMatrix<f64> {
    let mut kj = k.clone();
    for i in 0..kj.nrows() {
        kj[(i, i)] += eps;
    }
    kj
}

/// Factorizes `B` and returns the posterior cache, `Σ` and `μ`.
pub(crate) fn factorize(
    k: &DMatrix<f64>,
    tau: &DVector<f64>,
    nu: &DVector<f64>,
) -> Result<(Posterior, DMatrix<f64>, DVector<f64>)> {
    let n = k.nrows();
    let sw = tau.map(f64::sqrt);
    let mut b = DMatrix::identity(n, n);
    for j in 0..n {
        for i in 0..n {
            b[(i, j)] += sw[i] * sw[j] * k[(i, j)];
        }
    }
    let chol = b.cholesky().ok_or(Error::IllConditionedKernel)?;
    let l = chol.l();
    let kn = k * nu;
    let alpha = nu - sw.component_mul(&chol.solve(&sw.component_mul(&kn)));
    let mut swk = k.clone();
    for i in 0..n {
        swk.row_mut(i).scale_mut(sw[i]);
    }
    let v = l.solve_lower_triangular(&swk).ok_or(Error::IllConditionedKernel)?;
    let sigma = k - v.transpose() * &v;
    let mu = k * &alpha;
    Ok((Posterior { l, sw, alpha }, sigma, mu))
}

/// EP approximation to `log p(y | X)` given converged sites.
pub(crate) fn ep_log_ml(
    y: &[f64],
    tau: &DVector<f64>,
    nu: &DVector<f64>,
    post: &Posterior,
    sigma: &DMatrix<f64>,
    mu: &DVector<f64>,
) -> f64 {
    let n = y.len();
    let mut nlz: f64 = post.l.diagonal().iter().map(|v| v.ln()).sum();
    nlz -= 0.5 * (nu.transpose() * sigma * nu)[(0, 0)];
    for i in 0..n {
        let v = sigma[(i, i)];
        let tau_n = 1.0 / v - tau[i];
        let nu_n = mu[i] / v - nu[i];
        let z = y[i] * (nu_n / tau_n) / (1.0 + 1.0 / tau_n).sqrt();
        nlz -= log_norm_cdf(z);
        nlz += 0.5 * v * nu[i] * nu[i];
        nlz -= 0.5 * nu_n * (tau[i] / tau_n * nu_n - 2.0 * nu[i]) * v;
        nlz -= 0.5 * (1.0 + tau[i] / tau_n).ln();
    }
    -nlz
}

impl GpcModel {
    /// Builds a model from explicit site parameters.
    pub fn with_sites(ts: TrainingSet, h: KernelHyperparams, site_tau: Vec<f64>, site_nu: Vec<f64>) -> Result<Self> {
        h.validate()?;
        let dist = Distances::new(&ts);
        let (k, jitter) = jittered_gram(&dist, &h)?;
        Self::assemble(ts, h, &k, jitter, DVector::from_vec(site_tau), DVector::from_vec(site_nu), 0)
    }

    pub(crate) fn assemble(
        train: TrainingSet,
        hyperparams: KernelHyperparams,
        k: &DMatrix<f64>,
        jitter: f64,
        site_tau: DVector<f64>,
        site_nu: DVector<f64>,
        sweeps: usize,
    ) -> Result<Self> {
        let n = train.len();
        for v in [&site_tau, &site_nu] {
            if v.len() != n {
                return Err(Error::InconsistentDimension { expected: n, got: v.len() });
            }
        }
        if site_tau.iter().any(|t| !(*t >= 0.0 && t.is_finite())) || site_nu.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("site parameters must be finite with τ̃ ≥ 0".into()));
        }
        let (post, sigma, mu) = factorize(k, &site_tau, &site_nu)?;
        let log_ml = ep_log_ml(train.labels(), &site_tau, &site_nu, &post, &sigma, &mu);
        Ok(Self {
            hyperparams,
            train,
            jitter,
            site_nu,
            site_tau,
            log_ml,
            sweeps,
            post,
        })
    }

    pub fn hyperparams(&self) -> &KernelHyperparams {
        &self.hyperparams
    }

    pub fn training_set(&self) -> &TrainingSet {
        &self.train
    }

    pub fn site_means(&self) -> &[f64] {
        self.site_nu.as_slice()
    }

    pub fn site_precisions(&self) -> &[f64] {
        self.site_tau.as_slice()
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_ml
    }

    /// Relative jitter (multiple of the mean Gram diagonal) used in training.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// Lower Cholesky factor of `B = I + S̃^½ K S̃^½`.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.post.l
    }

    pub(crate) fn posterior(&self) -> &Posterior {
        &self.post
    }

    pub fn predict(&self, x: &FeatureVector) -> Result<Prediction> {
        let h = &self.hyperparams;
        let kstar = self
            .train
            .inputs()
            .iter()
            .map(|xi| kernel_eval(h, xi, x))
            .collect::<Result<Vec<_>>>()?;
        let kstar = DVector::from_vec(kstar);
        let mean = kstar.dot(&self.post.alpha);
        let v = self
            .post
            .l
            .solve_lower_triangular(&self.post.sw.component_mul(&kstar))
            .ok_or(Error::IllConditionedKernel)?;
        let var = (kernel_eval(h, x, x)? - v.norm_squared()).max(0.0);
        Ok(Prediction {
            probability: norm_cdf(mean / (1.0 + var).sqrt()),
            latent_mean: mean,
            latent_variance: var,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_json(path, self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        crate::io::read_json(path)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    version: u32,
    hyperparams: KernelHyperparams,
    jitter: f64,
    split: usize,
    inputs: Vec<Vec<f64>>,
    labels: Vec<f64>,
    site_nu: Vec<f64>,
    site_tau: Vec<f64>,
    log_marginal_likelihood: f64,
    sweeps: usize,
}

impl From<GpcModel> for ModelRecord {
    fn from(m: GpcModel) -> Self {
        ModelRecord {
            version: MODEL_VERSION,
            hyperparams: m.hyperparams,
            jitter: m.jitter,
            split: m.train.split(),
            inputs: m.train.inputs().iter().map(|f| f.values().to_vec()).collect(),
            labels: m.train.labels().to_vec(),
            site_nu: m.site_nu.as_slice().to_vec(),
            site_tau: m.site_tau.as_slice().to_vec(),
            log_marginal_likelihood: m.log_ml,
            sweeps: m.sweeps,
        }
    }
}

impl TryFrom<ModelRecord> for GpcModel {
    type Error = Error;

    fn try_from(r: ModelRecord) -> Result<Self> {
        if r.version != MODEL_VERSION {
            return Err(Error::InvalidValue(format!("unsupported model version {}", r.version)));
        }
        let x = r
            .inputs
            .into_iter()
            .map(|v| FeatureVector::fused(v, r.split))
            .collect::<Result<Vec<_>>>()?;
        let ts = TrainingSet::new(x, r.labels)?;
        r.hyperparams.validate()?;
        let dist = Distances::new(&ts);
        let k = dist.gram(&r.hyperparams);
        let k = with_jitter(&k, r.jitter * k.diagonal().mean());
        let mut m = Self::assemble(
            ts,
            r.hyperparams,
            &k,
            r.jitter,
            DVector::from_vec(r.site_tau),
            DVector::from_vec(r.site_nu),
            r.sweeps,
        )?;
        m.log_ml = r.log_marginal_likelihood;
        Ok(m)
    }
}
