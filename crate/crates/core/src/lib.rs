//! Ensemble-LLM annotation pipeline for sentence-level lexical bias:
//! corpus construction, balanced sampling, few-shot prompting, response
//! parsing, majority voting, evaluation and behavioral stress tests.

pub mod annotate;
pub mod baseline;
pub mod checklist;
pub mod cli;
pub mod corpus;
pub mod digest;
pub mod error;
pub mod io;
pub mod labels;
pub mod metrics;
pub mod pipeline;
pub mod prompting;
pub mod sampling;
pub mod seed;

pub use error::{Error, Result};
pub use labels::{BiasLabel, PoliticalLeaning};
