//! Few-shot chain-of-thought prompt construction with similarity-based
//! example retrieval.

mod embed;
mod render;
mod retrieve;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use embed::{cosine, EmbeddingProvider, EmbeddingVector, HashingEmbedder, RemoteEmbedder, DEFAULT_EMBED_DIM};
pub use render::{render_prompt, PromptSettings, RenderedPrompt, BENCHMARK_SETTINGS, CLASSIFY_LINE, SYSTEM_PREAMBLE};
pub use retrieve::{rank_by_similarity, top_k_by_similarity, ExamplePool};

use crate::error::Result;
use crate::io::read_csv;
use crate::labels::BiasLabel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PromptError {
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("k={k} exceeds pool size {pool}")]
    KTooLarge { k: usize, pool: usize },
    #[error("settings ask for {expected} examples, {got} given")]
    ShotMismatch { expected: usize, got: usize },
    #[error("embedding provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("embedding dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("unknown prompt settings {0:?}")]
    UnknownSettings(String),
}

impl PromptError {
    pub fn kind(&self) -> &'static str {
        match self {
            PromptError::EmptyText => "EmptyText",
            PromptError::KTooLarge { .. } => "KTooLarge",
            PromptError::ShotMismatch { .. } => "ShotMismatch",
            PromptError::ProviderUnavailable(_) => "ProviderUnavailable",
            PromptError::DimensionMismatch(..) => "DimensionMismatch",
            PromptError::UnknownSettings(_) => "UnknownSettings",
        }
    }
}

/// A labeled demonstration, rendered as `BIASED` / `NOT BIASED`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptExample {
    pub text: String,
    pub label: BiasLabel,
    #[serde(default)]
    pub explanation: String,
}

/// Load an example pool from CSV with header `text,label,explanation`.
pub fn load_examples(path: &Path) -> Result<Vec<PromptExample>> {
    read_csv(path)
}
