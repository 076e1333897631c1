use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use super::{
    parse_label, tally, AnnotateError, AnnotationRecord, Annotator, Completion, EnsembleResult, ExcludedReason,
    LabelPhrases, ModelEndpointConfig, ParsedLabel, VotePolicy,
};
use crate::corpus::SentenceRecord;
use crate::labels::BiasLabel;
use crate::prompting::{render_prompt, EmbeddingProvider, ExamplePool, PromptExample, PromptSettings, RenderedPrompt};

#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub settings: PromptSettings,
    pub policy: VotePolicy,
    /// Concurrent in-flight requests per endpoint.
    pub workers_per_endpoint: usize,
    /// Largest tolerated share of failed sentences, in [0, 1].
    pub max_failure_ratio: f64,
    pub phrases: LabelPhrases,
}

impl Default for JobConfig {
    fn default() -> Self {
        Self {
            settings: PromptSettings::new(8, true, false),
            policy: VotePolicy::default(),
            workers_per_endpoint: 4,
            max_failure_ratio: 0.05,
            phrases: LabelPhrases::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceFailure {
    pub sentence_id: String,
    pub model_name: String,
    pub kind: String,
    pub message: String,
}

/// A sentence excluded by the vote, with everything a reviewer needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InconclusiveRow {
    pub sentence_id: String,
    pub text: String,
    pub votes: BTreeMap<String, ParsedLabel>,
    pub responses: BTreeMap<String, String>,
    pub excluded_reason: ExcludedReason,
}

/// Job results, each list sorted by sentence id (then model name).
/// Sentences with any failed endpoint appear only in `failures`.
#[derive(Debug, Clone, PartialEq)]
pub struct JobOutput {
    pub annotations: Vec<AnnotationRecord>,
    pub results: Vec<EnsembleResult>,
    pub inconclusive: Vec<InconclusiveRow>,
    pub failures: Vec<SentenceFailure>,
    pub network_calls: usize,
}

impl JobOutput {
    pub fn final_labels(&self) -> BTreeMap<String, BiasLabel> {
        self.results
            .iter()
            .filter_map(|r| r.final_label.map(|l| (r.sentence_id.clone(), l)))
            .collect()
    }

    /// One model's parsed labels keyed by sentence id.
    pub fn model_labels(&self, model_name: &str) -> BTreeMap<String, ParsedLabel> {
        self.annotations
            .iter()
            .filter(|a| a.model_name == model_name)
            .map(|a| (a.sentence_id.clone(), a.parsed))
            .collect()
    }

    pub fn failed_sentences(&self) -> usize {
        self.failures.iter().map(|f| &f.sentence_id).collect::<BTreeSet<_>>().len()
    }
}

fn render_for(
    s: &SentenceRecord,
    pool: &ExamplePool,
    provider: &dyn EmbeddingProvider,
    settings: PromptSettings,
) -> Result<RenderedPrompt, AnnotateError> {
    let ids = pool.retrieve(&s.text, settings.shots, provider)?;
    let examples: Vec<PromptExample> = ids.iter().map(|&i| pool.examples[i].clone()).collect();
    let mut prompt = render_prompt(&s.text, &examples, settings)?;
    prompt.example_ids = ids;
    Ok(prompt)
}

/// Query one endpoint for every prompt with a bounded worker pool.
fn query_endpoint(
    annotator: &Annotator,
    cfg: &ModelEndpointConfig,
    prompts: &[RenderedPrompt],
    workers: usize,
) -> Vec<Result<Completion, AnnotateError>> {
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<Result<Completion, AnnotateError>>> = vec![None; prompts.len()];
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers.clamp(1, prompts.len().max(1)))
            .map(|_| {
                scope.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::SeqCst);
                        if i >= prompts.len() {
                            break done;
                        }
                        done.push((i, annotator.complete(cfg, &prompts[i])));
                    }
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("annotation worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every prompt queried")).collect()
}

/// Annotate every sentence with every endpoint and aggregate the votes.
/// Output depends only on the inputs and the endpoint responses, never on
/// input order or worker scheduling.
pub fn run_annotation_job(
    sentences: &[SentenceRecord],
    pool: &ExamplePool,
    provider: &dyn EmbeddingProvider,
    ensemble: &[ModelEndpointConfig],
    cfg: &JobConfig,
    annotator: &Annotator,
) -> Result<JobOutput, AnnotateError> {
    if ensemble.is_empty() {
        return Err(AnnotateError::EmptyPanel);
    }
    if ensemble.len().is_multiple_of(2) {
        return Err(AnnotateError::EvenPanel(ensemble.len()));
    }
    let mut names = HashSet::new();
    for m in ensemble {
        if !names.insert(m.name.as_str()) {
            return Err(AnnotateError::DuplicateModelName(m.name.clone()));
        }
    }
    let mut sorted: Vec<&SentenceRecord> = sentences.iter().collect();
    sorted.sort_by(|a, b| a.sentence_id.cmp(&b.sentence_id));
    if let Some(w) = sorted.windows(2).find(|w| w[0].sentence_id == w[1].sentence_id) {
        return Err(AnnotateError::DuplicateSentence(w[0].sentence_id.clone()));
    }

    let prompts = sorted
        .iter()
        .map(|s| render_for(s, pool, provider, cfg.settings))
        .collect::<Result<Vec<_>, _>>()?;

    let calls_before = annotator.network_calls();
    let mut per_model: Vec<(&ModelEndpointConfig, Vec<Result<Completion, AnnotateError>>)> = ensemble
        .iter()
        .map(|m| (m, query_endpoint(annotator, m, &prompts, cfg.workers_per_endpoint)))
        .collect();
    per_model.sort_by(|a, b| a.0.name.cmp(&b.0.name));

    let mut out = JobOutput {
        annotations: Vec::new(),
        results: Vec::new(),
        inconclusive: Vec::new(),
        failures: Vec::new(),
        network_calls: 0,
    };
    for (i, s) in sorted.iter().enumerate() {
        let mut votes = Vec::with_capacity(per_model.len());
        let mut responses = BTreeMap::new();
        let mut failed = false;
        for (m, results) in &per_model {
            match &results[i] {
                Ok(c) => {
                    let parsed = parse_label(&c.raw_response, &cfg.phrases);
                    out.annotations.push(AnnotationRecord {
                        sentence_id: s.sentence_id.clone(),
                        model_name: m.name.clone(),
                        prompt_hash: c.prompt_hash.clone(),
                        raw_response: c.raw_response.clone(),
                        parsed,
                        latency_ms: c.latency_ms,
                    });
                    votes.push((m.name.clone(), parsed));
                    responses.insert(m.name.clone(), c.raw_response.clone());
                }
                Err(e) => {
                    failed = true;
                    out.failures.push(SentenceFailure {
                        sentence_id: s.sentence_id.clone(),
                        model_name: m.name.clone(),
                        kind: e.kind().to_string(),
                        message: e.to_string(),
                    });
                }
            }
        }
        if failed {
            continue;
        }
        let result = tally(&s.sentence_id, &votes, cfg.policy)?;
        if let Some(reason) = result.excluded_reason {
            out.inconclusive.push(InconclusiveRow {
                sentence_id: s.sentence_id.clone(),
                text: s.text.clone(),
                votes: result.votes.clone(),
                responses,
                excluded_reason: reason,
            });
        }
        out.results.push(result);
    }
    out.network_calls = annotator.network_calls() - calls_before;

    let failed = out.failed_sentences();
    if !sorted.is_empty() && failed as f64 > cfg.max_failure_ratio * sorted.len() as f64 {
        return Err(AnnotateError::TooManyFailures {
            failed,
            total: sorted.len(),
            max_ratio: cfg.max_failure_ratio,
        });
    }
    Ok(out)
}
