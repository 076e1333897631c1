//! Balance-driven sampling before and after annotation, stratified splits,
//! and k-center coreset selection.

mod balance;
mod coreset;
mod split;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use balance::{postsample_balanced, presample_balanced, weak_cell_counts};
pub use coreset::{coreset_select, covering_radius, euclidean, k_center_greedy};
pub use split::{largest_remainder, split, SplitRatios};

use crate::corpus::SentenceRecord;
use crate::labels::{BiasLabel, PoliticalLeaning};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("cell {cell} has {available} items, {requested} requested")]
    CellUnderflow {
        cell: String,
        available: usize,
        requested: usize,
    },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid split ratios: {0}")]
    InvalidRatios(String),
    #[error("coreset size {requested} exceeds dataset size {available}")]
    SizeExceedsDataset { requested: usize, available: usize },
    #[error("feature vectors have inconsistent dimensions")]
    DimensionMismatch,
    #[error("weak score {0} outside [0, 1]")]
    InvalidWeakScore(f64),
}

impl SamplingError {
    pub fn kind(&self) -> &'static str {
        match self {
            SamplingError::CellUnderflow { .. } => "CellUnderflow",
            SamplingError::EmptyDataset => "EmptyDataset",
            SamplingError::InvalidRatios(_) => "InvalidRatios",
            SamplingError::SizeExceedsDataset { .. } => "SizeExceedsDataset",
            SamplingError::DimensionMismatch => "DimensionMismatch",
            SamplingError::InvalidWeakScore(_) => "InvalidWeakScore",
        }
    }
}

/// A sentence with a pre-classification estimate from an external classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakLabeledSentence {
    #[serde(flatten)]
    pub sentence: SentenceRecord,
    pub weak_label: BiasLabel,
    pub weak_score: f64,
}

impl WeakLabeledSentence {
    /// `weak_label` is Biased iff `weak_score >= 0.5`.
    pub fn new(sentence: SentenceRecord, weak_score: f64) -> Result<Self, SamplingError> {
        if !(0.0..=1.0).contains(&weak_score) {
            return Err(SamplingError::InvalidWeakScore(weak_score));
        }
        Ok(Self {
            sentence,
            weak_label: BiasLabel::from_bool(weak_score >= 0.5),
            weak_score,
        })
    }
}

/// Row of the weak-label input file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakScore {
    pub sentence_id: String,
    pub weak_score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Dev,
    Test,
}

impl SplitTag {
    pub const ALL: [SplitTag; 3] = [SplitTag::Train, SplitTag::Dev, SplitTag::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Dev => "dev",
            SplitTag::Test => "test",
        }
    }
}

impl std::str::FromStr for SplitTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(SplitTag::Train),
            "dev" | "valid" | "validation" => Ok(SplitTag::Dev),
            "test" => Ok(SplitTag::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

/// A sentence with its (synthetic or gold) bias label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledSentence {
    #[serde(flatten)]
    pub sentence: SentenceRecord,
    pub label: BiasLabel,
}

/// One exported dataset row: `sentence_id,text,leaning,label,split`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub sentence_id: String,
    pub text: String,
    pub leaning: PoliticalLeaning,
    pub label: BiasLabel,
    pub split: SplitTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetItem {
    pub item: LabeledSentence,
    pub split: SplitTag,
}

/// Balanced dataset with split assignments, sorted by sentence id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledDataset {
    pub items: Vec<DatasetItem>,
}

impl LabeledDataset {
    pub fn rows(&self) -> Vec<DatasetRow> {
        self.items
            .iter()
            .map(|d| DatasetRow {
                sentence_id: d.item.sentence.sentence_id.clone(),
                text: d.item.sentence.text.clone(),
                leaning: d.item.sentence.leaning,
                label: d.item.label,
                split: d.split,
            })
            .collect()
    }

    pub fn split_rows(&self, tag: SplitTag) -> Vec<DatasetRow> {
        self.rows().into_iter().filter(|r| r.split == tag).collect()
    }

    pub fn count(&self, tag: SplitTag) -> usize {
        self.items.iter().filter(|d| d.split == tag).count()
    }
}

/// Pair sentences with their weak scores. Sentences without a score are
/// left out; the second value counts them.
pub fn attach_weak_scores(
    sentences: &[SentenceRecord],
    scores: &[WeakScore],
) -> Result<(Vec<WeakLabeledSentence>, usize), SamplingError> {
    let by_id: std::collections::HashMap<&str, f64> =
        scores.iter().map(|s| (s.sentence_id.as_str(), s.weak_score)).collect();
    let mut out = Vec::new();
    let mut missing = 0;
    for s in sentences {
        match by_id.get(s.sentence_id.as_str()) {
            Some(&score) => out.push(WeakLabeledSentence::new(s.clone(), score)?),
            None => missing += 1,
        }
    }
    Ok((out, missing))
}

pub(crate) fn cell_name(leaning: PoliticalLeaning, label: BiasLabel) -> String {
    format!("{}/{}", leaning.as_str(), if label.is_biased() { "biased" } else { "not_biased" })
}
