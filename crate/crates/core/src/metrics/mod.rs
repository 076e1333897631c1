//! Classification metrics against gold labels, paired classifier
//! comparison and the annotator benchmark matrix.

mod benchmark;
mod mcnemar;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use benchmark::{benchmark_matrix, BenchmarkMatrix, BenchmarkRun};
pub use mcnemar::{chi2_sf_1dof, erfc, mcnemar, mcnemar_counts, McNemarMethod, McNemarResult};

use crate::error::Result;
use crate::io::read_csv;
use crate::labels::BiasLabel;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("nothing to score")]
    Empty,
    #[error("the classifiers never disagree on correctness")]
    NoDisagreements,
    #[error("no prediction for gold sentence {0}")]
    MissingPrediction(String),
    #[error("duplicate run for model {model} under settings {settings}")]
    DuplicateRun { model: String, settings: String },
}

impl MetricsError {
    pub fn kind(&self) -> &'static str {
        match self {
            MetricsError::LengthMismatch(..) => "LengthMismatch",
            MetricsError::Empty => "Empty",
            MetricsError::NoDisagreements => "NoDisagreements",
            MetricsError::MissingPrediction(_) => "MissingPrediction",
            MetricsError::DuplicateRun { .. } => "DuplicateRun",
        }
    }
}

/// Biased is the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => (self.tp + self.tn) as f64 / n as f64,
        }
    }

    pub fn add(&mut self, pred: BiasLabel, gold: BiasLabel) {
        match (pred, gold) {
            (BiasLabel::Biased, BiasLabel::Biased) => self.tp += 1,
            (BiasLabel::Biased, BiasLabel::NotBiased) => self.fp += 1,
            (BiasLabel::NotBiased, BiasLabel::NotBiased) => self.tn += 1,
            (BiasLabel::NotBiased, BiasLabel::Biased) => self.fn_ += 1,
        }
    }
}

pub fn confusion(preds: &[BiasLabel], golds: &[BiasLabel]) -> std::result::Result<ConfusionCounts, MetricsError> {
    if preds.len() != golds.len() {
        return Err(MetricsError::LengthMismatch(preds.len(), golds.len()));
    }
    if preds.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut c = ConfusionCounts::default();
    for (&p, &g) in preds.iter().zip(golds) {
        c.add(p, g);
    }
    Ok(c)
}

/// Matthews correlation. 0 when any marginal is empty.
pub fn mcc(c: &ConfusionCounts) -> f64 {
    let (tp, fp, tn, fn_) = (c.tp as f64, c.fp as f64, c.tn as f64, c.fn_ as f64);
    let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    if factors.contains(&0.0) {
        return 0.0;
    }
    let denom = (factors[0] * factors[1]).sqrt() * (factors[2] * factors[3]).sqrt();
    ((tp * tn - fp * fn_) / denom).clamp(-1.0, 1.0)
}

/// (precision, recall, F1), each 0 when its denominator is 0.
pub fn prf1(c: &ConfusionCounts) -> (f64, f64, f64) {
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let p = ratio(c.tp, c.tp + c.fp);
    let r = ratio(c.tp, c.tp + c.fn_);
    let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub n: u64,
    pub confusion: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mcc: f64,
    pub accuracy: f64,
}

pub fn score(preds: &[BiasLabel], golds: &[BiasLabel]) -> std::result::Result<ScoreReport, MetricsError> {
    let c = confusion(preds, golds)?;
    let (precision, recall, f1) = prf1(&c);
    Ok(ScoreReport {
        n: c.total(),
        confusion: c,
        precision,
        recall,
        f1,
        mcc: mcc(&c),
        accuracy: c.accuracy(),
    })
}

impl ScoreReport {
    pub fn to_text(&self) -> String {
        format!(
            "n={} tp={} fp={} tn={} fn={}\nP={:.4} R={:.4} F1={:.4} MCC={:.4} acc={:.4}\n",
            self.n,
            self.confusion.tp,
            self.confusion.fp,
            self.confusion.tn,
            self.confusion.fn_,
            self.precision,
            self.recall,
            self.f1,
            self.mcc,
            self.accuracy
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRow {
    pub sentence_id: String,
    pub label: BiasLabel,
}

/// Read a `sentence_id,label` CSV. Extra columns are ignored.
pub fn load_labels(path: &Path) -> Result<BTreeMap<String, BiasLabel>> {
    let rows: Vec<LabelRow> = read_csv(path)?;
    Ok(rows.into_iter().map(|r| (r.sentence_id, r.label)).collect())
}

/// Predictions in gold order. Every gold id needs a prediction; extra
/// predictions are ignored.
pub fn align(
    preds: &BTreeMap<String, BiasLabel>,
    golds: &BTreeMap<String, BiasLabel>,
) -> std::result::Result<(Vec<BiasLabel>, Vec<BiasLabel>), MetricsError> {
    let mut p = Vec::with_capacity(golds.len());
    for id in golds.keys() {
        p.push(*preds.get(id).ok_or_else(|| MetricsError::MissingPrediction(id.clone()))?);
    }
    Ok((p, golds.values().copied().collect()))
}
