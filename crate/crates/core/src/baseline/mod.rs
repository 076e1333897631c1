//! Bag-of-words logistic regression, small enough to train on synthetic
//! labels and on gold labels inside a test run.

mod model_file;
mod vocab;

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use model_file::{decode, encode, MAGIC, VERSION};
pub use vocab::{featurize, tokenize, SparseFeatures, Vocabulary};

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::labels::BiasLabel;
use crate::seed::{rng, scoped_rng};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BaselineError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training set contains a single class")]
    SingleClassTrainingSet,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("model file: {0}")]
    Format(String),
}

impl BaselineError {
    pub fn kind(&self) -> &'static str {
        match self {
            BaselineError::EmptyTrainingSet => "EmptyTrainingSet",
            BaselineError::SingleClassTrainingSet => "SingleClassTrainingSet",
            BaselineError::InvalidConfig(_) => "InvalidConfig",
            BaselineError::Format(_) => "Format",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub l2_lambda: f64,
    pub epochs: u32,
    pub batch_size: u32,
    pub seed: u64,
    pub min_df: u32,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            l2_lambda: 1e-4,
            epochs: 50,
            batch_size: 32,
            seed: 0,
            min_df: 2,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> std::result::Result<(), BaselineError> {
        let bad = |m: &str| Err(BaselineError::InvalidConfig(m.to_string()));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(self.l2_lambda.is_finite() && self.l2_lambda >= 0.0) {
            return bad("l2_lambda must be non-negative");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        Ok(())
    }
}

/// `w` has one entry per vocabulary token; `b` is not regularized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelWeights {
    pub w: Vec<f64>,
    pub b: f64,
    pub config: TrainConfig,
}

impl ModelWeights {
    pub fn zeros(dim: usize, config: TrainConfig) -> Self {
        Self {
            w: vec![0.0; dim],
            b: 0.0,
            config,
        }
    }

    pub fn logit(&self, x: &SparseFeatures) -> f64 {
        x.dot(&self.w) + self.b
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Biased iff the probability is at least 0.5.
pub fn predict(weights: &ModelWeights, x: &SparseFeatures) -> (f64, BiasLabel) {
    let p = sigmoid(weights.logit(x));
    (p, BiasLabel::from_bool(p >= 0.5))
}

/// Mean binary cross-entropy plus `lambda / 2 * |w|^2`.
pub fn loss(weights: &ModelWeights, xs: &[SparseFeatures], ys: &[f64], lambda: f64) -> f64 {
    let data: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let z = weights.logit(x);
            softplus(z) - y * z
        })
        .sum::<f64>()
        / xs.len() as f64;
    data + 0.5 * lambda * weights.w.iter().map(|w| w * w).sum::<f64>()
}

/// Analytic gradient of [`loss`]: (dw, db).
pub fn gradient(weights: &ModelWeights, xs: &[SparseFeatures], ys: &[f64], lambda: f64) -> (Vec<f64>, f64) {
    let n = xs.len() as f64;
    let mut gw: Vec<f64> = weights.w.iter().map(|w| lambda * w).collect();
    let mut gb = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let r = (sigmoid(weights.logit(x)) - y) / n;
        for &(i, v) in &x.entries {
            gw[i] += r * v;
        }
        gb += r;
    }
    (gw, gb)
}

/// Largest relative error between the analytic gradient and central
/// differences (step 1e-5) over at most 50 seeded coordinates, the bias
/// included. Relative error is `|a - n| / max(|a|, |n|, 1e-6)`.
pub fn gradient_check(weights: &ModelWeights, xs: &[SparseFeatures], ys: &[f64], lambda: f64, seed: u64) -> f64 {
    const STEP: f64 = 1e-5;
    let dim = weights.w.len();
    let (gw, gb) = gradient(weights, xs, ys, lambda);
    let coords: Vec<usize> = if dim < 50 {
        (0..=dim).collect()
    } else {
        let mut picked = rand::seq::index::sample(&mut scoped_rng(seed, "baseline/gradcheck"), dim, 49).into_vec();
        picked.sort_unstable();
        picked.push(dim);
        picked
    };
    let mut worst: f64 = 0.0;
    for c in coords {
        let mut plus = weights.clone();
        let mut minus = weights.clone();
        let analytic = if c == dim {
            plus.b += STEP;
            minus.b -= STEP;
            gb
        } else {
            plus.w[c] += STEP;
            minus.w[c] -= STEP;
            gw[c]
        };
        let numeric = (loss(&plus, xs, ys, lambda) - loss(&minus, xs, ys, lambda)) / (2.0 * STEP);
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    worst
}

fn target(label: BiasLabel) -> f64 {
    if label.is_biased() {
        1.0
    } else {
        0.0
    }
}

/// Mini-batch gradient descent from zero weights. Returns the weights and
/// the full-set loss after every epoch.
pub fn train_features(
    xs: &[SparseFeatures],
    labels: &[BiasLabel],
    dim: usize,
    cfg: &TrainConfig,
) -> std::result::Result<(ModelWeights, Vec<f64>), BaselineError> {
    cfg.validate()?;
    if xs.is_empty() {
        return Err(BaselineError::EmptyTrainingSet);
    }
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(BaselineError::SingleClassTrainingSet);
    }
    let ys: Vec<f64> = labels.iter().map(|&l| target(l)).collect();
    let mut weights = ModelWeights::zeros(dim, *cfg);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut shuffler = rng(cfg.seed);
    let mut history = Vec::with_capacity(cfg.epochs as usize);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut shuffler);
        for batch in order.chunks(cfg.batch_size as usize) {
            let bx: Vec<SparseFeatures> = batch.iter().map(|&i| xs[i].clone()).collect();
            let by: Vec<f64> = batch.iter().map(|&i| ys[i]).collect();
            let (gw, gb) = gradient(&weights, &bx, &by, cfg.l2_lambda);
            for (w, g) in weights.w.iter_mut().zip(&gw) {
                *w -= cfg.learning_rate * g;
            }
            weights.b -= cfg.learning_rate * gb;
        }
        history.push(loss(&weights, xs, &ys, cfg.l2_lambda));
    }
    Ok((weights, history))
}

/// Vocabulary plus weights: everything needed to classify raw text.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub vocab: Vocabulary,
    pub weights: ModelWeights,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: TrainedModel,
    pub loss_history: Vec<f64>,
}

impl TrainOutcome {
    pub fn final_loss(&self) -> Option<f64> {
        self.loss_history.last().copied()
    }
}

/// Build the vocabulary from these (training) texts and fit.
pub fn train<S: AsRef<str>>(
    examples: &[(S, BiasLabel)],
    cfg: &TrainConfig,
) -> std::result::Result<TrainOutcome, BaselineError> {
    let texts: Vec<&str> = examples.iter().map(|(t, _)| t.as_ref()).collect();
    let vocab = Vocabulary::build(&texts, cfg.min_df as usize);
    let xs: Vec<SparseFeatures> = texts.iter().map(|t| featurize(t, &vocab)).collect();
    let labels: Vec<BiasLabel> = examples.iter().map(|(_, l)| *l).collect();
    let (weights, loss_history) = train_features(&xs, &labels, vocab.len(), cfg)?;
    Ok(TrainOutcome {
        model: TrainedModel { vocab, weights },
        loss_history,
    })
}

impl TrainedModel {
    pub fn predict(&self, text: &str) -> (f64, BiasLabel) {
        predict(&self.weights, &featurize(text, &self.vocab))
    }

    pub fn label(&self, text: &str) -> BiasLabel {
        self.predict(text).1
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        encode(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, BaselineError> {
        decode(bytes)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_bytes(&bytes)?)
    }
}

/// Dense L2-normalized bag-of-words vectors over a vocabulary built from
/// `texts` themselves.
pub fn dense_bow<S: AsRef<str>>(texts: &[S], min_df: usize) -> Vec<Vec<f64>> {
    let vocab = Vocabulary::build(texts, min_df);
    texts
        .iter()
        .map(|t| {
            let mut v = vec![0.0; vocab.len()];
            for (i, x) in featurize(t.as_ref(), &vocab).entries {
                v[i] = x;
            }
            v
        })
        .collect()
}

/// Random dense weights for property tests and gradient checks.
pub fn random_weights(dim: usize, scale: f64, seed: u64) -> ModelWeights {
    let mut r = rng(seed);
    let mut w = ModelWeights::zeros(dim, TrainConfig::default());
    for x in w.w.iter_mut() {
        *x = scale * (2.0 * r.random::<f64>() - 1.0);
    }
    w.b = scale * (2.0 * r.random::<f64>() - 1.0);
    w
}
