use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, LabeledExample};
use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// `C × (d+1)` weights; the last column is the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSoftmaxModel {
    weights: DMatrix<f64>,
}

impl LinearSoftmaxModel {
    pub fn zeros(classes: usize, dim: usize) -> Self {
        Self {
            weights: DMatrix::zeros(classes, dim + 1),
        }
    }

    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self> {
        if weights.nrows() == 0 || weights.ncols() == 0 {
            return Err(Error::EmptyInput);
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidValue("non-finite classifier weight".into()));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn classes(&self) -> usize {
        self.weights.nrows()
    }

    pub fn dim(&self) -> usize {
        self.weights.ncols() - 1
    }

    pub fn logits(&self, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(Error::InconsistentDimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let d = self.dim();
        Ok(DVector::from_fn(self.classes(), |c, _| {
            let row = self.weights.row(c);
            (0..d).map(|j| row[j] * x[j]).sum::<f64>() + row[d]
        }))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let rec = ModelRecord {
            version: 1,
            classes: self.classes(),
            dim: self.dim(),
            weights: self.weights.transpose().as_slice().to_vec(),
        };
        crate::io::write_json(path, &rec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let rec: ModelRecord = crate::io::read_json(path)?;
        if rec.version != 1 || rec.weights.len() != rec.classes * (rec.dim + 1) {
            return Err(Error::parse(path, "malformed classifier model"));
        }
        Self::from_weights(DMatrix::from_row_slice(rec.classes, rec.dim + 1, &rec.weights))
    }
}

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    version: u32,
    classes: usize,
    dim: usize,
    /// Row-major, one row per class, bias last.
    weights: Vec<f64>,
}

fn softmax(logits: &DVector<f64>) -> Vec<f64> {
    let m = logits.max();
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Softmax probabilities and the most likely class (lowest index on ties).
pub fn predict_class(model: &LinearSoftmaxModel, x: &FeatureVector) -> Result<(usize, Vec<f64>)> {
    let p = softmax(&model.logits(x.values())?);
    Ok((argmax(&p), p))
}

/// Mean of per-view probability lists, then argmax.
pub fn aggregate_view_predictions(per_view: &[Vec<f64>]) -> Result<(usize, Vec<f64>)> {
    let first = per_view.first().ok_or(Error::EmptyInput)?;
    let mut mean = vec![0.0; first.len()];
    for v in per_view {
        if v.len() != first.len() {
            return Err(Error::InconsistentDimension {
                expected: first.len(),
                got: v.len(),
            });
        }
        for (m, p) in mean.iter_mut().zip(v) {
            *m += p;
        }
    }
    let n = per_view.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok((argmax(&mean), mean))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Weight of the propagated pool relative to the manual one.
    pub eta: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// `None` trains full-batch with a backtracking line search.
    pub batch_size: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            eta: 1.0,
            epochs: 200,
            learning_rate: 1.0,
            seed: 0,
            batch_size: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidConfig(format!("eta must lie in [0, 1], got {}", self.eta)));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        if self.batch_size == Some(0) {
            return Err(Error::InvalidConfig("batch_size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: LinearSoftmaxModel,
    /// Weighted loss of the returned model over both pools.
    pub loss: f64,
    /// Loss at the start of each epoch.
    pub history: Vec<f64>,
}

struct Row<'a> {
    x: &'a [f64],
    y: usize,
    w: f64,
}

fn rows<'a>(manual: &'a [LabeledExample], propagated: &'a [LabeledExample], eta: f64) -> impl Iterator<Item = Row<'a>> {
    manual
        .iter()
        .map(|e| (e, 1.0))
        .chain(propagated.iter().map(move |e| (e, eta)))
        .map(|(e, w)| Row {
            x: e.features.values(),
            y: e.label,
            w,
        })
}

fn loss_and_grad<'a>(
    model: &LinearSoftmaxModel,
    data: impl Iterator<Item = Row<'a>>,
    want_grad: bool,
) -> Result<(f64, DMatrix<f64>)> {
    let (c, d) = (model.classes(), model.dim());
    let mut grad = DMatrix::zeros(if want_grad { c } else { 0 }, if want_grad { d + 1 } else { 0 });
    let mut loss = 0.0;
    for r in data {
        if r.y >= c {
            return Err(Error::InvalidValue(format!("label {} with {c} classes", r.y)));
        }
        let z = model.logits(r.x)?;
        let m = z.max();
        let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        loss += r.w * (lse - z[r.y]);
        if want_grad {
            for k in 0..c {
                let coef = r.w * ((z[k] - lse).exp() - if k == r.y { 1.0 } else { 0.0 });
                for j in 0..d {
                    grad[(k, j)] += coef * r.x[j];
                }
                grad[(k, d)] += coef;
            }
        }
    }
    Ok((loss, grad))
}

/// `−Σ_manual log p(y|x) − η·Σ_propagated log p(y|x)`, summed in input order.
pub fn weighted_loss(
    model: &LinearSoftmaxModel,
    manual: &[LabeledExample],
    propagated: &[LabeledExample],
    eta: f64,
) -> Result<f64> {
    Ok(loss_and_grad(model, rows(manual, propagated, eta), false)?.0)
}

pub fn weighted_loss_gradient(
    model: &LinearSoftmaxModel,
    manual: &[LabeledExample],
    propagated: &[LabeledExample],
    eta: f64,
) -> Result<DMatrix<f64>> {
    Ok(loss_and_grad(model, rows(manual, propagated, eta), true)?.1)
}

fn canonical(pool: &[LabeledExample]) -> Vec<LabeledExample> {
    let mut v = pool.to_vec();
    v.sort_by(|a, b| (a.provenance, &a.id).cmp(&(b.provenance, &b.id)));
    v
}

/// Trains a linear softmax head on both pools. Pools are put in canonical
/// order first, so the result does not depend on input order.
pub fn train_weighted_classifier(
    manual: &[LabeledExample],
    propagated: &[LabeledExample],
    classes: usize,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if manual.is_empty() {
        return Err(Error::NoSupervision);
    }
    let dim = manual[0].features.len();
    for e in manual.iter().chain(propagated) {
        if e.features.len() != dim {
            return Err(Error::InconsistentDimension {
                expected: dim,
                got: e.features.len(),
            });
        }
        if e.label >= classes {
            return Err(Error::InvalidValue(format!("label {} with {classes} classes", e.label)));
        }
    }
    let manual = canonical(manual);
    let propagated = if config.eta == 0.0 {
        Vec::new()
    } else {
        canonical(propagated)
    };

    let mut model = LinearSoftmaxModel::zeros(classes, dim);
    let mut history = Vec::with_capacity(config.epochs);
    match config.batch_size {
        None => {
            let total_w = manual.len() as f64 + config.eta * propagated.len() as f64;
            for _ in 0..config.epochs {
                let (loss, grad) = loss_and_grad(&model, rows(&manual, &propagated, config.eta), true)?;
                history.push(loss);
                let g2 = grad.norm_squared();
                if g2 == 0.0 {
                    break;
                }
                let mut step = config.learning_rate / total_w;
                let mut accepted = false;
                for _ in 0..40 {
                    let cand = LinearSoftmaxModel {
                        weights: &model.weights - &grad * step,
                    };
                    let l = weighted_loss(&cand, &manual, &propagated, config.eta)?;
                    if l <= loss - 1e-4 * step * g2 {
                        model = cand;
                        accepted = true;
                        break;
                    }
                    step *= 0.5;
                }
                if !accepted {
                    break;
                }
            }
        }
        Some(b) => {
            let all: Vec<Row> = rows(&manual, &propagated, config.eta).collect();
            let mut order: Vec<usize> = (0..all.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            for _ in 0..config.epochs {
                history.push(weighted_loss(&model, &manual, &propagated, config.eta)?);
                order.shuffle(&mut rng);
                for chunk in order.chunks(b) {
                    let batch = chunk.iter().map(|i| Row {
                        x: all[*i].x,
                        y: all[*i].y,
                        w: all[*i].w,
                    });
                    let w: f64 = chunk.iter().map(|i| all[*i].w).sum();
                    if w == 0.0 {
                        continue;
                    }
                    let (_, grad) = loss_and_grad(&model, batch, true)?;
                    model.weights -= grad * (config.learning_rate / w);
                }
            }
        }
    }
    if model.weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidValue("classifier weights diverged".into()));
    }
    let loss = weighted_loss(&model, &manual, &propagated, config.eta)?;
    Ok(TrainOutcome { model, loss, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Modality;

    fn x(v: &[f64]) -> FeatureVector {
        FeatureVector::new(v.to_vec(), Modality::Rgb).unwrap()
    }

    #[test]
    fn zero_weights_uniform() {
        let m = LinearSoftmaxModel::zeros(4, 3);
        let (c, p) = predict_class(&m, &x(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(c, 0);
        assert!(p.iter().all(|v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn shift_invariant() {
        let w = DMatrix::from_row_slice(3, 3, &[1.0, -2.0, 0.5, 0.3, 0.1, -1.0, 2.0, 0.0, 0.2]);
        let m = LinearSoftmaxModel::from_weights(w.clone()).unwrap();
        let mut shifted = w;
        shifted.column_mut(2).add_scalar_mut(17.0);
        let m2 = LinearSoftmaxModel::from_weights(shifted).unwrap();
        let (_, a) = predict_class(&m, &x(&[0.4, -0.7])).unwrap();
        let (_, b) = predict_class(&m2, &x(&[0.4, -0.7])).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aggregate_views() {
        let (c, p) = aggregate_view_predictions(&[vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        assert_eq!((c, p), (0, vec![0.5, 0.5]));
        let one = vec![0.2, 0.7, 0.1];
        assert_eq!(aggregate_view_predictions(&[one.clone()]).unwrap().1, one);
        let many = vec![one.clone(); 30];
        let (_, avg) = aggregate_view_predictions(&many).unwrap();
        for (a, b) in avg.iter().zip(&one) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(aggregate_view_predictions(&[]).is_err());
        assert!(aggregate_view_predictions(&[vec![1.0], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn no_supervision() {
        assert!(matches!(
            train_weighted_classifier(&[], &[], 2, &TrainConfig::default()),
            Err(Error::NoSupervision)
        ));
    }
}
