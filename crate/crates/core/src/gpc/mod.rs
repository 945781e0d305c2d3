//! Binary Gaussian process classification with a probit likelihood,
//! expectation propagation, and a product of per-modality RBF kernels.

mod ep;
mod model;
mod normal;
mod optimize;

pub use ep::{ep_posterior, log_ml_gradient, EpOptions};
pub use model::{GpcModel, Prediction, MODEL_VERSION};
pub use normal::{log_norm_cdf, norm_cdf, norm_pdf, pdf_over_cdf};
pub use optimize::{optimize_hyperparams, optimize_hyperparams_with, OptimizeOptions};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureVector, Modality};

/// Signal scale `alpha` and length scale `beta` for the RGB and depth kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelHyperparams {
    pub alpha_i: f64,
    pub beta_i: f64,
    pub alpha_d: f64,
    pub beta_d: f64,
}

impl Default for KernelHyperparams {
    fn default() -> Self {
        Self {
            alpha_i: 1.0,
            beta_i: 1.0,
            alpha_d: 1.0,
            beta_d: 1.0,
        }
    }
}

impl KernelHyperparams {
    pub fn new(alpha_i: f64, beta_i: f64, alpha_d: f64, beta_d: f64) -> Result<Self> {
        let h = Self {
            alpha_i,
            beta_i,
            alpha_d,
            beta_d,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.to_log();
        if v.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidValue(format!("kernel hyperparameters must be positive: {self:?}")))
        }
    }

    /// `(ln α_I, ln β_I, ln α_D, ln β_D)`.
    pub fn to_log(&self) -> [f64; 4] {
        [self.alpha_i.ln(), self.beta_i.ln(), self.alpha_d.ln(), self.beta_d.ln()]
    }

    pub fn from_log(t: &[f64; 4]) -> Self {
        Self {
            alpha_i: t[0].exp(),
            beta_i: t[1].exp(),
            alpha_d: t[2].exp(),
            beta_d: t[3].exp(),
        }
    }
}

/// Fused inputs with labels in {-1, +1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    x: Vec<FeatureVector>,
    y: Vec<f64>,
}

impl TrainingSet {
    pub fn new(x: Vec<FeatureVector>, y: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyInput);
        }
        if x.len() != y.len() {
            return Err(Error::InconsistentDimension {
                expected: x.len(),
                got: y.len(),
            });
        }
        if let Some(v) = y.iter().find(|v| **v != 1.0 && **v != -1.0) {
            return Err(Error::InvalidValue(format!("label {v} is not -1 or +1")));
        }
        let (len, split) = (x[0].len(), fused_split(&x[0])?);
        for f in &x {
            if f.len() != len {
                return Err(Error::InconsistentDimension {
                    expected: len,
                    got: f.len(),
                });
            }
            let s = fused_split(f)?;
            if s != split {
                return Err(Error::SplitMismatch(split, s));
            }
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn inputs(&self) -> &[FeatureVector] {
        &self.x
    }

    pub fn labels(&self) -> &[f64] {
        &self.y
    }

    pub fn has_both_labels(&self) -> bool {
        self.y.iter().any(|v| *v > 0.0) && self.y.iter().any(|v| *v < 0.0)
    }

    pub fn split(&self) -> usize {
        self.x[0].split().unwrap_or(0)
    }

    pub fn dim(&self) -> usize {
        self.x[0].len()
    }
}

fn fused_split(f: &FeatureVector) -> Result<usize> {
    match (f.modality(), f.split()) {
        (Modality::Fused, Some(s)) => Ok(s),
        (m, _) => Err(Error::ModalityMismatch(format!("kernel inputs must be fused, got {m:?}"))),
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `k_I(x_I, x'_I)·k_D(x_D, x'_D)` with `k(a, b) = α²·exp(−‖a−b‖²/(2β²))`.
pub fn kernel_eval(h: &KernelHyperparams, x: &FeatureVector, x2: &FeatureVector) -> Result<f64> {
    let (s1, s2) = (fused_split(x)?, fused_split(x2)?);
    if s1 != s2 {
        return Err(Error::SplitMismatch(s1, s2));
    }
    if x.len() != x2.len() {
        return Err(Error::InconsistentDimension {
            expected: x.len(),
            got: x2.len(),
        });
    }
    let (a_i, a_d) = x.blocks().expect("fused");
    let (b_i, b_d) = x2.blocks().expect("fused");
    Ok(kernel_from_dists(h, sq_dist(a_i, b_i), sq_dist(a_d, b_d)))
}

fn kernel_from_dists(h: &KernelHyperparams, d_i: f64, d_d: f64) -> f64 {
    let ai2 = h.alpha_i * h.alpha_i;
    let ad2 = h.alpha_d * h.alpha_d;
    ai2 * ad2 * (-d_i / (2.0 * h.beta_i * h.beta_i) - d_d / (2.0 * h.beta_d * h.beta_d)).exp()
}

/// Pairwise squared distances within each modality block.
#[derive(Debug, Clone)]
pub(crate) struct Distances {
    pub rgb: DMatrix<f64>,
    pub depth: DMatrix<f64>,
}

impl Distances {
    pub fn new(ts: &TrainingSet) -> Self {
        let n = ts.len();
        let mut rgb = DMatrix::zeros(n, n);
        let mut depth = DMatrix::zeros(n, n);
        for i in 0..n {
            let (ai, ad) = ts.x[i].blocks().expect("validated");
            for j in 0..i {
                let (bi, bd) = ts.x[j].blocks().expect("validated");
                rgb[(i, j)] = sq_dist(ai, bi);
                rgb[(j, i)] = rgb[(i, j)];
                depth[(i, j)] = sq_dist(ad, bd);
                depth[(j, i)] = depth[(i, j)];
            }
        }
        Self { rgb, depth }
    }

    /// Gram matrix without jitter.
    pub fn gram(&self, h: &KernelHyperparams) -> DMatrix<f64> {
        self.rgb.zip_map(&self.depth, |a, b| kernel_from_dists(h, a, b))
    }
}

/// Gram matrix of `xs` under `h`.
pub fn gram_matrix(h: &KernelHyperparams, xs: &[FeatureVector]) -> Result<DMatrix<f64>> {
    let n = xs.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            k[(i, j)] = kernel_eval(h, &xs[i], &xs[j])?;
            k[(j, i)] = k[(i, j)];
        }
    }
    Ok(k)
}
