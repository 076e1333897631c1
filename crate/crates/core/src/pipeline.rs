//! Single-config orchestration: corpus, pre-sample, annotate, post-sample,
//! split, baseline training, evaluation and stress tests, with a manifest of
//! content digests.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::annotate::{
    load_ensemble, run_annotation_job, Annotator, JobConfig, JobOutput, MockScript, MockServer, ResponseCache,
    VotePolicy,
};
use crate::baseline::{dense_bow, train, TrainConfig, TrainedModel};
use crate::checklist::{self, ChecklistReport, Lexicons, PerturbationCase, Suite};
use crate::corpus::{build_corpus, load_articles, CorpusConfig, SentenceRecord};
use crate::digest::{file_sha256, sha256_hex};
use crate::error::{Error, Result};
use crate::io::{csv_bytes, jsonl_bytes, read_csv, read_jsonl, read_text, write_atomic};
use crate::labels::BiasLabel;
use crate::metrics::{mcnemar, score, LabelRow, McNemarResult, ScoreReport};
use crate::prompting::{load_examples, EmbeddingProvider, ExamplePool, HashingEmbedder, PromptSettings, RemoteEmbedder};
use crate::sampling::{
    attach_weak_scores, coreset_select, postsample_balanced, presample_balanced, split, DatasetRow, LabeledSentence,
    SplitRatios, SplitTag, WeakScore,
};
use crate::seed::derive_seed;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmbedderConfig {
    Hashing {
        #[serde(default = "default_embed_dim")]
        dim: usize,
        #[serde(default)]
        seed: u64,
    },
    Remote {
        base_url: String,
        model: String,
        #[serde(default)]
        api_key_env: Option<String>,
        #[serde(default = "default_embed_timeout")]
        timeout_ms: u64,
    },
}

fn default_embed_dim() -> usize {
    crate::prompting::DEFAULT_EMBED_DIM
}
fn default_embed_timeout() -> u64 {
    30_000
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        EmbedderConfig::Hashing {
            dim: default_embed_dim(),
            seed: 0,
        }
    }
}

impl EmbedderConfig {
    pub fn build(&self) -> Box<dyn EmbeddingProvider> {
        match self {
            EmbedderConfig::Hashing { dim, seed } => Box::new(HashingEmbedder { dim: *dim, seed: *seed }),
            EmbedderConfig::Remote {
                base_url,
                model,
                api_key_env,
                timeout_ms,
            } => Box::new(RemoteEmbedder::new(
                base_url,
                model,
                api_key_env.as_ref().and_then(|v| std::env::var(v).ok()),
                Duration::from_millis(*timeout_ms),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSection {
    pub articles: PathBuf,
    #[serde(flatten)]
    pub config: CorpusConfig,
}

fn default_ratios() -> [f64; 3] {
    [0.7, 0.15, 0.15]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSection {
    pub weak_labels: PathBuf,
    #[serde(default)]
    pub quota: Option<usize>,
    #[serde(default = "default_ratios")]
    pub ratios: [f64; 3],
    #[serde(default)]
    pub coreset_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptingSection {
    pub pool: PathBuf,
    pub settings: String,
    #[serde(default)]
    pub embedder: EmbedderConfig,
}

fn default_workers() -> usize {
    4
}
fn default_failure_ratio() -> f64 {
    0.05
}
fn default_true() -> bool {
    true
}
fn default_backoff() -> u64 {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotateSection {
    pub ensemble: PathBuf,
    /// Serve the ensemble from a scripted local mock instead of the
    /// configured URLs.
    #[serde(default)]
    pub mock_script: Option<PathBuf>,
    /// Response cache; defaults to `cache/responses.jsonl` under the output
    /// directory.
    #[serde(default)]
    pub cache: Option<PathBuf>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub policy: VotePolicy,
    #[serde(default = "default_failure_ratio")]
    pub max_failure_ratio: f64,
    #[serde(default = "default_true")]
    pub record_latency: bool,
    #[serde(default = "default_backoff")]
    pub backoff_base_ms: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalSection {
    /// `sentence_id,label` gold labels; enables the gold-trained comparison.
    #[serde(default)]
    pub gold: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChecklistSection {
    /// Neutral factual sentences, one per line.
    #[serde(default)]
    pub factual: Option<PathBuf>,
    #[serde(default)]
    pub lexicons: Option<PathBuf>,
    /// Suite names; empty means all five.
    #[serde(default)]
    pub suites: Vec<String>,
}

/// Relative paths resolve against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub corpus: CorpusSection,
    pub sampling: SamplingSection,
    pub prompting: PromptingSection,
    pub annotate: AnnotateSection,
    #[serde(default)]
    pub baseline: TrainConfig,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub checklist: ChecklistSection,
}

impl PipelineConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("{}: {}", origin.display(), e.message())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?, path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: Vec<String>,
    pub config: Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub timings_ms: BTreeMap<String, u64>,
    pub network_calls: usize,
}

impl RunManifest {
    pub fn new(command: Vec<String>, config: Value) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            command,
            config,
            seeds: BTreeMap::new(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            timings_ms: BTreeMap::new(),
            network_calls: 0,
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let digest = if path.is_dir() {
            dir_digest(path)?
        } else {
            file_sha256(path).map_err(|e| Error::io(path, e))?
        };
        self.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("manifest serializes");
        bytes.push(b'\n');
        write_atomic(path, &bytes)
    }
}

/// Digest over (relative name, file digest) of every regular file under
/// `dir`, in name order.
pub fn dir_digest(dir: &Path) -> Result<String> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    entries.sort();
    let mut acc = String::new();
    for p in entries {
        let d = file_sha256(&p).map_err(|e| Error::io(&p, e))?;
        acc.push_str(&format!("{} {}\n", p.file_name().unwrap_or_default().to_string_lossy(), d));
    }
    Ok(sha256_hex(acc.as_bytes()))
}

/// Writes files under a root directory and records their digests by
/// relative path.
pub struct OutputDir {
    pub root: PathBuf,
    pub digests: BTreeMap<String, String>,
}

impl OutputDir {
    pub fn new(root: &Path) -> Self {
        Self {
            root: root.to_path_buf(),
            digests: BTreeMap::new(),
        }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.path(rel), bytes)?;
        self.digests.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
        bytes.push(b'\n');
        self.write(rel, &bytes)
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn labeled_rows(rows: &[DatasetRow]) -> Vec<(String, BiasLabel)> {
    rows.iter().map(|r| (r.text.clone(), r.label)).collect()
}

fn predictions_csv(ids: &[String], labels: &[BiasLabel]) -> Vec<u8> {
    let rows: Vec<LabelRow> = ids
        .iter()
        .zip(labels)
        .map(|(id, &label)| LabelRow {
            sentence_id: id.clone(),
            label,
        })
        .collect();
    csv_bytes(&rows)
}

/// Evaluation against gold labels on the test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldComparison {
    pub n_test: usize,
    /// Model trained on ensemble labels.
    pub synthetic_trained: ScoreReport,
    /// Model trained on gold labels of the same training sentences.
    pub gold_trained: ScoreReport,
    pub mcnemar: Option<McNemarResult>,
    /// Share of ensemble final labels that equal gold, over labeled sentences.
    pub ensemble_gold_agreement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Synthetic-trained model against the synthetic test labels.
    pub synthetic_test: ScoreReport,
    pub gold: Option<GoldComparison>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSummary {
    pub manifest: RunManifest,
    pub eval: EvalReport,
    pub checklist: ChecklistReport,
    pub network_calls: usize,
}

fn timed<T>(timings: &mut BTreeMap<String, u64>, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f()?;
    timings.insert(stage.to_string(), start.elapsed().as_millis() as u64);
    Ok(out)
}

fn selected_suites(names: &[String]) -> Result<Vec<Suite>> {
    if names.is_empty() {
        return Ok(Suite::ALL.to_vec());
    }
    let mut suites = BTreeSet::new();
    for n in names {
        suites.insert(n.parse::<Suite>()?);
    }
    Ok(suites.into_iter().collect())
}

/// Run every stage into `out`. `config_path` anchors relative paths.
pub fn run_pipeline(config_path: &Path, out: &Path, command: Vec<String>) -> Result<PipelineSummary> {
    let cfg = PipelineConfig::load(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let mut manifest = RunManifest::new(command, serde_json::to_value(&cfg).expect("config serializes"));
    manifest.add_input(config_path)?;
    let mut timings = BTreeMap::new();
    let mut outputs = OutputDir::new(out);
    let seeds: BTreeMap<String, u64> = ["presample", "postsample", "split", "coreset", "baseline", "checklist"]
        .iter()
        .map(|s| (s.to_string(), derive_seed(cfg.seed, s)))
        .collect();
    manifest.seeds = seeds.clone();
    manifest.seeds.insert("global".into(), cfg.seed);

    // corpus
    let articles_path = resolve(base, &cfg.corpus.articles);
    manifest.add_input(&articles_path)?;
    let sentences = timed(&mut timings, "corpus", || {
        let articles = load_articles(&articles_path)?;
        let (sentences, stats) = build_corpus(&articles, &cfg.corpus.config);
        outputs.write("corpus/sentences.jsonl", &jsonl_bytes(&sentences))?;
        outputs.write_json("corpus/stats.json", &stats)?;
        Ok(sentences)
    })?;

    // pre-sample
    let weak_path = resolve(base, &cfg.sampling.weak_labels);
    manifest.add_input(&weak_path)?;
    let presampled = timed(&mut timings, "presample", || {
        let scores: Vec<WeakScore> = read_jsonl(&weak_path)?;
        let (pool, _missing) = attach_weak_scores(&sentences, &scores)?;
        let picked = presample_balanced(&pool, cfg.sampling.quota, seeds["presample"])?;
        outputs.write("sampling/presampled.jsonl", &jsonl_bytes(&picked))?;
        Ok(picked)
    })?;

    // annotate
    let pool_path = resolve(base, &cfg.prompting.pool);
    let ensemble_path = resolve(base, &cfg.annotate.ensemble);
    manifest.add_input(&pool_path)?;
    manifest.add_input(&ensemble_path)?;
    let mock_script = match &cfg.annotate.mock_script {
        Some(p) => {
            let p = resolve(base, p);
            manifest.add_input(&p)?;
            let script: MockScript = serde_json::from_str(&read_text(&p)?)
                .map_err(|e| Error::format(&p, 0, e.to_string()))?;
            Some(script)
        }
        None => None,
    };
    let cache_path = cfg
        .annotate
        .cache
        .as_ref()
        .map(|p| resolve(base, p))
        .unwrap_or_else(|| out.join("cache/responses.jsonl"));
    let job: JobOutput = timed(&mut timings, "annotate", || {
        let settings: PromptSettings = cfg.prompting.settings.parse()?;
        let provider = cfg.prompting.embedder.build();
        let pool = ExamplePool::new(load_examples(&pool_path)?, provider.as_ref())?;
        let mut ensemble = load_ensemble(&ensemble_path)?;
        let _server = match &mock_script {
            Some(script) => {
                let server = MockServer::start(script, 0).map_err(Error::Config)?;
                for m in &mut ensemble {
                    m.base_url = server.base_url();
                }
                Some(server)
            }
            None => None,
        };
        let mut annotator = Annotator::http(ResponseCache::open(&cache_path)?);
        annotator.record_latency = cfg.annotate.record_latency;
        annotator.backoff.base_ms = cfg.annotate.backoff_base_ms;
        let job_cfg = JobConfig {
            settings,
            policy: cfg.annotate.policy,
            workers_per_endpoint: cfg.annotate.workers,
            max_failure_ratio: cfg.annotate.max_failure_ratio,
            ..JobConfig::default()
        };
        let to_annotate: Vec<SentenceRecord> = presampled.iter().map(|w| w.sentence.clone()).collect();
        let job = run_annotation_job(&to_annotate, &pool, provider.as_ref(), &ensemble, &job_cfg, &annotator)?;
        outputs.write("annotate/annotations.jsonl", &jsonl_bytes(&job.annotations))?;
        outputs.write("annotate/ensemble.jsonl", &jsonl_bytes(&job.results))?;
        outputs.write("annotate/inconclusive.jsonl", &jsonl_bytes(&job.inconclusive))?;
        outputs.write("annotate/failures.jsonl", &jsonl_bytes(&job.failures))?;
        Ok(job)
    })?;
    manifest.network_calls = job.network_calls;

    // post-sample and split
    let dataset = timed(&mut timings, "dataset", || {
        let finals = job.final_labels();
        let labeled: Vec<LabeledSentence> = presampled
            .iter()
            .filter_map(|w| {
                finals.get(&w.sentence.sentence_id).map(|&label| LabeledSentence {
                    sentence: w.sentence.clone(),
                    label,
                })
            })
            .collect();
        let balanced = postsample_balanced(&labeled, seeds["postsample"]);
        let ratios = SplitRatios(cfg.sampling.ratios);
        let ds = split(&balanced, ratios, seeds["split"])?;
        let rows = ds.rows();
        outputs.write("dataset/dataset.csv", &csv_bytes(&rows))?;
        outputs.write("dataset/dataset.jsonl", &jsonl_bytes(&rows))?;
        for tag in SplitTag::ALL {
            outputs.write(&format!("dataset/{}.csv", tag.as_str()), &csv_bytes(&ds.split_rows(tag)))?;
        }
        if let Some(m) = cfg.sampling.coreset_size {
            let texts: Vec<&str> = rows.iter().map(|r| r.text.as_str()).collect();
            let picked = coreset_select(&dense_bow(&texts, 1), m, seeds["coreset"])?;
            let mut core: Vec<DatasetRow> = picked.iter().map(|&i| rows[i].clone()).collect();
            core.sort_by(|a, b| a.sentence_id.cmp(&b.sentence_id));
            outputs.write("dataset/coreset.csv", &csv_bytes(&core))?;
        }
        Ok(ds)
    })?;

    // baseline
    let train_cfg = TrainConfig {
        seed: seeds["baseline"],
        ..cfg.baseline
    };
    let train_rows = dataset.split_rows(SplitTag::Train);
    let test_rows = dataset.split_rows(SplitTag::Test);
    let sa_model: TrainedModel = timed(&mut timings, "baseline", || {
        let outcome = train(&labeled_rows(&train_rows), &train_cfg)?;
        outputs.write("baseline/model.bin", &outcome.model.to_bytes())?;
        let loss: Vec<Value> = outcome
            .loss_history
            .iter()
            .enumerate()
            .map(|(e, l)| json!({"epoch": e + 1, "loss": l}))
            .collect();
        let mut loss_csv = String::from("epoch,loss\n");
        for row in &loss {
            loss_csv.push_str(&format!("{},{}\n", row["epoch"], row["loss"]));
        }
        outputs.write("baseline/loss.csv", loss_csv.as_bytes())?;
        Ok(outcome.model)
    })?;

    // eval
    let eval = timed(&mut timings, "eval", || {
        let ids: Vec<String> = test_rows.iter().map(|r| r.sentence_id.clone()).collect();
        let sa_preds: Vec<BiasLabel> = test_rows.iter().map(|r| sa_model.label(&r.text)).collect();
        let synthetic: Vec<BiasLabel> = test_rows.iter().map(|r| r.label).collect();
        outputs.write("eval/test_preds.csv", &predictions_csv(&ids, &sa_preds))?;
        let synthetic_test = score(&sa_preds, &synthetic)?;
        let gold = match &cfg.eval.gold {
            None => None,
            Some(p) => {
                let p = resolve(base, p);
                manifest.add_input(&p)?;
                let gold: BTreeMap<String, BiasLabel> = read_csv::<LabelRow>(&p)?
                    .into_iter()
                    .map(|r| (r.sentence_id, r.label))
                    .collect();
                let lookup = |id: &str| {
                    gold.get(id)
                        .copied()
                        .ok_or_else(|| Error::Config(format!("gold labels lack sentence {id}")))
                };
                let gold_train = train_rows
                    .iter()
                    .map(|r| Ok((r.text.clone(), lookup(&r.sentence_id)?)))
                    .collect::<Result<Vec<_>>>()?;
                let ha_model = train(&gold_train, &train_cfg)?.model;
                outputs.write("eval/gold_trained_model.bin", &ha_model.to_bytes())?;
                let gold_test = ids.iter().map(|id| lookup(id)).collect::<Result<Vec<_>>>()?;
                let ha_preds: Vec<BiasLabel> = test_rows.iter().map(|r| ha_model.label(&r.text)).collect();
                outputs.write("eval/gold_trained_preds.csv", &predictions_csv(&ids, &ha_preds))?;
                let finals = job.final_labels();
                let agree = finals.iter().filter(|(id, l)| gold.get(*id) == Some(l)).count();
                Some(GoldComparison {
                    n_test: ids.len(),
                    synthetic_trained: score(&sa_preds, &gold_test)?,
                    gold_trained: score(&ha_preds, &gold_test)?,
                    mcnemar: mcnemar(&sa_preds, &ha_preds, &gold_test).ok(),
                    ensemble_gold_agreement: if finals.is_empty() {
                        0.0
                    } else {
                        agree as f64 / finals.len() as f64
                    },
                })
            }
        };
        let report = EvalReport { synthetic_test, gold };
        outputs.write_json("eval/report.json", &report)?;
        Ok(report)
    })?;

    // checklist
    let checklist_report = timed(&mut timings, "checklist", || {
        let lex = match &cfg.checklist.lexicons {
            Some(dir) => {
                let dir = resolve(base, dir);
                manifest.add_input(&dir)?;
                Lexicons::load_dir(&dir)?
            }
            None => Lexicons::default(),
        };
        let texts: Vec<String> = dataset.rows().into_iter().map(|r| r.text).collect();
        let factual: Vec<String> = match &cfg.checklist.factual {
            Some(p) => {
                let p = resolve(base, p);
                manifest.add_input(&p)?;
                read_text(&p)?
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(str::to_string)
                    .collect()
            }
            None => Vec::new(),
        };
        let mut cases: Vec<PerturbationCase> = Vec::new();
        for suite in selected_suites(&cfg.checklist.suites)? {
            let input = if suite == Suite::MftFactual { &factual } else { &texts };
            cases.extend(checklist::generate(suite, input, &lex, seeds["checklist"])?);
        }
        outputs.write("checklist/cases.jsonl", &jsonl_bytes(&cases))?;
        let report = checklist::score_suite(&cases, |t| sa_model.label(t));
        outputs.write_json("checklist/report.json", &report)?;
        Ok(report)
    })?;

    manifest.outputs = outputs.digests.clone();
    manifest.timings_ms = timings;
    manifest.write(&out.join("manifest.json"))?;
    Ok(PipelineSummary {
        network_calls: manifest.network_calls,
        manifest,
        eval,
        checklist: checklist_report,
    })
}
