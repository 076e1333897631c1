//! Ensemble annotation: query chat endpoints with rendered prompts, parse
//! each response into a label and combine the panel by majority vote.

mod cache;
mod client;
mod config;
mod job;
mod mock;
mod parse;
mod vote;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{prompt_hash, CacheEntry, ResponseCache};
pub use client::{
    chat_request_body, extract_message, Annotator, BackoffConfig, ChatTransport, Completion, HttpTransport,
    RateLimiter, TransportError,
};
pub use config::{load_ensemble, parse_ensemble, ModelEndpointConfig};
pub use job::{run_annotation_job, InconclusiveRow, JobConfig, JobOutput, SentenceFailure};
pub use mock::{MockRule, MockScript, MockServer};
pub use parse::{count_mentions, parse_label, LabelPhrases, ParsedLabel};
pub use vote::{majority_vote, tally, EnsembleResult, ExcludedReason, VotePolicy};

use crate::prompting::PromptError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnotateError {
    #[error("endpoint {model} failed after {attempts} attempts: {last_error}")]
    EndpointExhausted {
        model: String,
        attempts: u32,
        last_error: String,
    },
    #[error("endpoint {model} rejected the request with status {status}: {body}")]
    EndpointRejected { model: String, status: u16, body: String },
    #[error("endpoint {model} returned no message text: {detail}")]
    MalformedResponse { model: String, detail: String },
    #[error("panel of {0} annotators is even")]
    EvenPanel(usize),
    #[error("no votes")]
    EmptyPanel,
    #[error("model {0} voted twice")]
    DuplicateModelVote(String),
    #[error("model name {0} appears twice in the ensemble")]
    DuplicateModelName(String),
    #[error("records mix sentences {0} and {1}")]
    MixedSentences(String, String),
    #[error("sentence {0} appears twice in the job input")]
    DuplicateSentence(String),
    #[error("{failed} of {total} sentences failed, above the allowed ratio {max_ratio}")]
    TooManyFailures { failed: usize, total: usize, max_ratio: f64 },
    #[error("response cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

impl AnnotateError {
    pub fn kind(&self) -> &'static str {
        match self {
            AnnotateError::EndpointExhausted { .. } => "EndpointExhausted",
            AnnotateError::EndpointRejected { .. } => "EndpointRejected",
            AnnotateError::MalformedResponse { .. } => "MalformedResponse",
            AnnotateError::EvenPanel(_) => "EvenPanel",
            AnnotateError::EmptyPanel => "EmptyPanel",
            AnnotateError::DuplicateModelVote(_) => "DuplicateModelVote",
            AnnotateError::DuplicateModelName(_) => "DuplicateModelName",
            AnnotateError::MixedSentences(..) => "MixedSentences",
            AnnotateError::DuplicateSentence(_) => "DuplicateSentence",
            AnnotateError::TooManyFailures { .. } => "TooManyFailures",
            AnnotateError::Cache(_) => "Cache",
            AnnotateError::Prompt(e) => e.kind(),
        }
    }
}

/// One model's answer for one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub sentence_id: String,
    pub model_name: String,
    pub prompt_hash: String,
    pub raw_response: String,
    pub parsed: ParsedLabel,
    pub latency_ms: u64,
}
