use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

/// Lowercased runs of alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Token index. Indices are dense and follow lexicographic token order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    pub min_df: usize,
}

impl Vocabulary {
    /// Keep tokens appearing in at least `min_df` of `texts`.
    pub fn build<S: AsRef<str>>(texts: &[S], min_df: usize) -> Self {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for t in texts {
            let unique: BTreeSet<String> = tokenize(t.as_ref()).into_iter().collect();
            for tok in unique {
                *df.entry(tok).or_default() += 1;
            }
        }
        let tokens = df.into_iter().filter(|&(_, n)| n >= min_df).map(|(t, _)| t).collect();
        Self::from_tokens(tokens, min_df)
    }

    /// Tokens must be distinct; their order defines the indices.
    pub fn from_tokens(tokens: Vec<String>, min_df: usize) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self { tokens, index, min_df }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseFeatures {
    pub entries: Vec<(usize, f64)>,
}

impl SparseFeatures {
    pub fn dot(&self, w: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| w[i] * v).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// L2-normalized counts of known tokens; unknown tokens are dropped.
pub fn featurize(text: &str, vocab: &Vocabulary) -> SparseFeatures {
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for tok in tokenize(text) {
        if let Some(i) = vocab.get(&tok) {
            *counts.entry(i).or_default() += 1.0;
        }
    }
    let norm = counts.values().map(|c| c * c).sum::<f64>().sqrt();
    SparseFeatures {
        entries: counts.into_iter().map(|(i, c)| (i, c / norm)).collect(),
    }
}
