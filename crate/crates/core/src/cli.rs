//! Command-line front end. `run` returns the process exit code: 0 on
//! success, 1 on a domain error, 2 on a usage error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::annotate::{
    load_ensemble, run_annotation_job, Annotator, JobConfig, MockScript, MockServer, ResponseCache, VotePolicy,
};
use crate::baseline::{dense_bow, train, TrainConfig, TrainedModel};
use crate::checklist::{self, case_texts, CasePrediction, CasePredictions, Lexicons, PerturbationCase, Suite};
use crate::corpus::{build_corpus, load_articles, CorpusConfig, SentenceRecord};
use crate::error::{Error, Result};
use crate::io::{csv_bytes, jsonl_bytes, read_csv, read_jsonl, read_text, write_atomic};
use crate::labels::BiasLabel;
use crate::metrics::{align, benchmark_matrix, load_labels, mcnemar, score, BenchmarkRun, LabelRow};
use crate::pipeline::{run_pipeline, OutputDir, RunManifest, TOOL_VERSION};
use crate::prompting::{load_examples, render_prompt, ExamplePool, HashingEmbedder, PromptSettings};
use crate::sampling::{
    attach_weak_scores, coreset_select, postsample_balanced, presample_balanced, split, DatasetRow, LabeledSentence,
    SplitRatios, SplitTag, WeakScore,
};

#[derive(Debug, Parser)]
#[command(name = "lexbias", version = TOOL_VERSION, about = "Sentence-level lexical bias dataset factory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the sentence corpus from article JSONL.
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Balance-driven sampling before and after annotation.
    #[command(subcommand)]
    Sample(SampleCmd),
    /// Stratified train/dev/test split.
    Split(SplitArgs),
    /// k-center coreset over a dataset CSV.
    Coreset(CoresetArgs),
    /// LLM ensemble annotation.
    #[command(subcommand)]
    Annotate(AnnotateCmd),
    /// Metrics, significance tests and benchmark tables.
    #[command(subcommand)]
    Eval(EvalCmd),
    /// Behavioral stress tests.
    #[command(subcommand)]
    Checklist(ChecklistCmd),
    /// Bag-of-words logistic regression baseline.
    #[command(subcommand)]
    Baseline(BaselineCmd),
    /// End-to-end run from one config file.
    #[command(subcommand)]
    Pipeline(PipelineCmd),
}

#[derive(Debug, Subcommand)]
enum CorpusCmd {
    Build {
        /// Article JSONL file or directory of `*.jsonl` files.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Flat TOML of corpus thresholds.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write corpus statistics as JSON.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum SampleCmd {
    Pre {
        /// Sentences JSONL.
        #[arg(long = "in")]
        input: PathBuf,
        /// Weak-label JSONL of `sentence_id`, `weak_score`.
        #[arg(long)]
        weak: PathBuf,
        #[arg(long)]
        quota: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    Post {
        /// Sentences JSONL.
        #[arg(long)]
        sentences: PathBuf,
        /// Ensemble JSONL written by `annotate run`.
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct SplitArgs {
    /// Labeled sentence JSONL from `sample post`.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "0.7,0.15,0.15")]
    ratios: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CoresetArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PromptArgs {
    /// Named setting such as `8-shot-exp`; overrides the flags below.
    #[arg(long)]
    settings: Option<String>,
    #[arg(long, default_value_t = 8)]
    shots: usize,
    #[arg(long)]
    explanations: bool,
    #[arg(long)]
    system_preamble: bool,
}

impl PromptArgs {
    fn resolve(&self) -> Result<PromptSettings> {
        let settings = match &self.settings {
            Some(name) => name.parse()?,
            None => format!("{}-shot", self.shots).parse::<PromptSettings>().map(|s| {
                PromptSettings::new(s.shots, self.explanations, self.system_preamble)
            })?,
        };
        Ok(settings)
    }
}

#[derive(Debug, Subcommand)]
enum AnnotateCmd {
    Run {
        #[arg(long)]
        sentences: PathBuf,
        #[arg(long)]
        pool: PathBuf,
        #[command(flatten)]
        prompt: PromptArgs,
        #[arg(long)]
        ensemble: PathBuf,
        /// Answer every endpoint from a scripted local mock.
        #[arg(long)]
        mock_script: Option<PathBuf>,
        /// Response cache; defaults to `cache/responses.jsonl` under `--out`.
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        workers: usize,
        #[arg(long, default_value = "exclude_on_inconclusive")]
        policy: String,
        #[arg(long, default_value_t = 0.05)]
        max_failure_ratio: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the prompt one sentence would receive.
    Render {
        #[arg(long)]
        sentence: String,
        #[arg(long)]
        pool: PathBuf,
        #[command(flatten)]
        prompt: PromptArgs,
    },
    /// Serve a mock script until interrupted.
    MockServe {
        #[arg(long)]
        script: PathBuf,
        #[arg(long, default_value_t = 8089)]
        port: u16,
    },
}

#[derive(Debug, Subcommand)]
enum EvalCmd {
    Score {
        #[arg(long)]
        preds: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        json: bool,
    },
    Mcnemar {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        json: bool,
    },
    Benchmark {
        /// TOML with `[[run]]` tables of `model`, `settings`, `preds`.
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// Also write the matrix as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Subcommand)]
enum ChecklistCmd {
    Gen {
        #[arg(long)]
        suite: String,
        /// JSONL with a `text` field, or plain text with one sentence per line.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory holding replacement lexicon files.
        #[arg(long)]
        lexicons: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Texts a classifier must label, as `case_id,variant,text` CSV.
    Texts {
        #[arg(long)]
        cases: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    Score {
        #[arg(long)]
        cases: PathBuf,
        /// `case_id,variant,label` CSV.
        #[arg(long, conflicts_with = "model", required_unless_present = "model")]
        preds: Option<PathBuf>,
        /// Score a trained baseline directly.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Subcommand)]
enum BaselineCmd {
    Train {
        /// Dataset CSV with `text`, `label`, `split` columns.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "train")]
        split: String,
        /// TOML training hyperparameters.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// JSONL with `sentence_id` and `text`.
        #[arg(long = "in", required_unless_present = "cases", conflicts_with = "cases")]
        input: Option<PathBuf>,
        /// Checklist cases; writes `case_id,variant,label`.
        #[arg(long)]
        cases: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum PipelineCmd {
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Deserialize)]
struct TextRow {
    sentence_id: String,
    text: String,
}

#[derive(Debug, Deserialize)]
struct RunsFile {
    #[serde(default)]
    run: Vec<RunEntry>,
}

#[derive(Debug, Deserialize)]
struct RunEntry {
    model: String,
    settings: String,
    preds: PathBuf,
}

#[derive(Debug, Serialize)]
struct McNemarReport {
    n: usize,
    #[serde(flatten)]
    result: crate::metrics::McNemarResult,
}

/// `error: module=<m> kind=<k> message=<single line>`
pub fn error_line(e: &Error) -> String {
    let message: String = e.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
    format!("error: module={} kind={} message={}", e.module(), e.kind(), message)
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let command: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli.command, command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            1
        }
    }
}

fn dispatch(cmd: Command, argv: Vec<String>) -> Result<()> {
    match cmd {
        Command::Corpus(CorpusCmd::Build {
            input,
            out,
            config,
            stats,
        }) => {
            let cfg: CorpusConfig = match config {
                Some(p) => toml::from_str(&read_text(&p)?)
                    .map_err(|e| Error::Config(format!("{}: {}", p.display(), e.message())))?,
                None => CorpusConfig::default(),
            };
            let (sentences, st) = build_corpus(&load_articles(&input)?, &cfg);
            write_atomic(&out, &jsonl_bytes(&sentences))?;
            if let Some(p) = stats {
                write_atomic(&p, &serde_json::to_vec_pretty(&st).expect("stats serialize"))?;
            }
            eprintln!("{} sentences from {} articles", st.sentences_out, st.articles_in);
        }
        Command::Sample(SampleCmd::Pre {
            input,
            weak,
            quota,
            seed,
            out,
        }) => {
            let sentences: Vec<SentenceRecord> = read_jsonl(&input)?;
            let scores: Vec<WeakScore> = read_jsonl(&weak)?;
            let (pool, missing) = attach_weak_scores(&sentences, &scores)?;
            let picked = presample_balanced(&pool, quota, seed)?;
            write_atomic(&out, &jsonl_bytes(&picked))?;
            eprintln!("{} sampled, {} sentences without a weak score", picked.len(), missing);
        }
        Command::Sample(SampleCmd::Post {
            sentences,
            ensemble,
            seed,
            out,
        }) => {
            let sentences: Vec<SentenceRecord> = read_jsonl(&sentences)?;
            let results: Vec<crate::annotate::EnsembleResult> = read_jsonl(&ensemble)?;
            let finals: BTreeMap<String, BiasLabel> = results
                .into_iter()
                .filter_map(|r| r.final_label.map(|l| (r.sentence_id, l)))
                .collect();
            let labeled: Vec<LabeledSentence> = sentences
                .into_iter()
                .filter_map(|s| {
                    finals.get(&s.sentence_id).map(|&label| LabeledSentence { sentence: s, label })
                })
                .collect();
            let balanced = postsample_balanced(&labeled, seed);
            write_atomic(&out, &jsonl_bytes(&balanced))?;
            eprintln!("{} of {} labeled sentences kept", balanced.len(), labeled.len());
        }
        Command::Split(a) => {
            let ratios: SplitRatios = a.ratios.parse()?;
            ratios.validate()?;
            let items: Vec<LabeledSentence> = read_jsonl(&a.input)?;
            let ds = split(&items, ratios, a.seed)?;
            let mut out = OutputDir::new(&a.out);
            let rows = ds.rows();
            out.write("dataset.csv", &csv_bytes(&rows))?;
            out.write("dataset.jsonl", &jsonl_bytes(&rows))?;
            for tag in SplitTag::ALL {
                out.write(&format!("{}.csv", tag.as_str()), &csv_bytes(&ds.split_rows(tag)))?;
            }
            eprintln!(
                "train={} dev={} test={}",
                ds.count(SplitTag::Train),
                ds.count(SplitTag::Dev),
                ds.count(SplitTag::Test)
            );
        }
        Command::Coreset(a) => {
            let rows: Vec<DatasetRow> = read_csv(&a.data)?;
            let texts: Vec<&str> = rows.iter().map(|r| r.text.as_str()).collect();
            let picked = coreset_select(&dense_bow(&texts, 1), a.size, a.seed)?;
            let mut core: Vec<DatasetRow> = picked.iter().map(|&i| rows[i].clone()).collect();
            core.sort_by(|x, y| x.sentence_id.cmp(&y.sentence_id));
            write_atomic(&a.out, &csv_bytes(&core))?;
        }
        Command::Annotate(cmd) => annotate(cmd, argv)?,
        Command::Eval(cmd) => eval(cmd)?,
        Command::Checklist(cmd) => checklist_cmd(cmd)?,
        Command::Baseline(cmd) => baseline(cmd)?,
        Command::Pipeline(PipelineCmd::Run { config, out }) => {
            let summary = run_pipeline(&config, &out, argv)?;
            println!("{}", summary.eval.synthetic_test.to_text());
            if let Some(g) = &summary.eval.gold {
                println!("synthetic-trained vs gold:\n{}", g.synthetic_trained.to_text());
                println!("gold-trained vs gold:\n{}", g.gold_trained.to_text());
            }
            print!("{}", summary.checklist.to_text());
            eprintln!("network calls: {}", summary.network_calls);
        }
    }
    Ok(())
}

fn annotate(cmd: AnnotateCmd, argv: Vec<String>) -> Result<()> {
    match cmd {
        AnnotateCmd::Run {
            sentences,
            pool,
            prompt,
            ensemble,
            mock_script,
            cache,
            workers,
            policy,
            max_failure_ratio,
            out,
        } => {
            let settings = prompt.resolve()?;
            let policy: VotePolicy = policy.parse().map_err(Error::Config)?;
            let mut manifest = RunManifest::new(argv, serde_json::Value::Null);
            for p in [&sentences, &pool, &ensemble] {
                manifest.add_input(p)?;
            }
            let sents: Vec<SentenceRecord> = read_jsonl(&sentences)?;
            let provider = HashingEmbedder::default();
            let pool = ExamplePool::new(load_examples(&pool)?, &provider)?;
            let mut models = load_ensemble(&ensemble)?;
            let _server = match &mock_script {
                Some(p) => {
                    manifest.add_input(p)?;
                    let script: MockScript =
                        serde_json::from_str(&read_text(p)?).map_err(|e| Error::format(p, 0, e.to_string()))?;
                    let server = MockServer::start(&script, 0).map_err(Error::Config)?;
                    for m in &mut models {
                        m.base_url = server.base_url();
                    }
                    Some(server)
                }
                None => None,
            };
            let cache_path = cache.unwrap_or_else(|| out.join("cache/responses.jsonl"));
            let annotator = Annotator::http(ResponseCache::open(&cache_path)?);
            let cfg = JobConfig {
                settings,
                policy,
                workers_per_endpoint: workers,
                max_failure_ratio,
                ..JobConfig::default()
            };
            manifest.config = serde_json::json!({
                "settings": settings.name(),
                "policy": policy,
                "workers": workers,
                "max_failure_ratio": max_failure_ratio,
                "ensemble": models,
            });
            let job = run_annotation_job(&sents, &pool, &provider, &models, &cfg, &annotator)?;
            let mut dir = OutputDir::new(&out);
            dir.write("annotations.jsonl", &jsonl_bytes(&job.annotations))?;
            dir.write("ensemble.jsonl", &jsonl_bytes(&job.results))?;
            dir.write("inconclusive.jsonl", &jsonl_bytes(&job.inconclusive))?;
            dir.write("failures.jsonl", &jsonl_bytes(&job.failures))?;
            manifest.outputs = dir.digests;
            manifest.network_calls = job.network_calls;
            manifest.write(&out.join("manifest.json"))?;
            eprintln!(
                "{} labeled, {} inconclusive, {} failed, {} network calls",
                job.final_labels().len(),
                job.inconclusive.len(),
                job.failed_sentences(),
                job.network_calls
            );
        }
        AnnotateCmd::Render { sentence, pool, prompt } => {
            let settings = prompt.resolve()?;
            let provider = HashingEmbedder::default();
            let pool = ExamplePool::new(load_examples(&pool)?, &provider)?;
            let ids = pool.retrieve(&sentence, settings.shots, &provider)?;
            let examples: Vec<_> = ids.iter().map(|&i| pool.examples[i].clone()).collect();
            println!("{}", render_prompt(&sentence, &examples, settings)?.text);
        }
        AnnotateCmd::MockServe { script, port } => {
            let parsed: MockScript =
                serde_json::from_str(&read_text(&script)?).map_err(|e| Error::format(&script, 0, e.to_string()))?;
            let server = MockServer::start(&parsed, port).map_err(Error::Config)?;
            println!("{}", server.base_url());
            server.join();
        }
    }
    Ok(())
}

fn gold_and_preds(preds: &Path, gold: &Path) -> Result<(Vec<BiasLabel>, Vec<BiasLabel>)> {
    Ok(align(&load_labels(preds)?, &load_labels(gold)?)?)
}

fn print_json<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("report serializes"));
}

fn eval(cmd: EvalCmd) -> Result<()> {
    match cmd {
        EvalCmd::Score { preds, gold, json } => {
            let (p, g) = gold_and_preds(&preds, &gold)?;
            let report = score(&p, &g)?;
            if json {
                print_json(&report);
            } else {
                print!("{}", report.to_text());
            }
        }
        EvalCmd::Mcnemar { a, b, gold, json } => {
            let golds = load_labels(&gold)?;
            let (pa, g) = align(&load_labels(&a)?, &golds)?;
            let (pb, _) = align(&load_labels(&b)?, &golds)?;
            let result = mcnemar(&pa, &pb, &g)?;
            if json {
                print_json(&McNemarReport { n: g.len(), result });
            } else {
                println!(
                    "n={} b={} c={} statistic={:.6} p_value={:.6} method={:?}",
                    g.len(),
                    result.b,
                    result.c,
                    result.statistic,
                    result.p_value,
                    result.method
                );
            }
        }
        EvalCmd::Benchmark { runs, gold, out, json } => {
            let file: RunsFile = toml::from_str(&read_text(&runs)?)
                .map_err(|e| Error::Config(format!("{}: {}", runs.display(), e.message())))?;
            let base = runs.parent().unwrap_or(Path::new("."));
            let golds = load_labels(&gold)?;
            let mut entries = Vec::with_capacity(file.run.len());
            for r in file.run {
                let path = if r.preds.is_absolute() { r.preds } else { base.join(r.preds) };
                let (preds, _) = align(&load_labels(&path)?, &golds)?;
                entries.push(BenchmarkRun {
                    model: r.model,
                    settings: r.settings,
                    preds,
                });
            }
            let g: Vec<BiasLabel> = golds.values().copied().collect();
            let matrix = benchmark_matrix(&entries, &g)?;
            if let Some(p) = out {
                write_atomic(&p, matrix.to_csv().as_bytes())?;
            }
            if json {
                print_json(&matrix);
            } else {
                print!("{}", matrix.to_text());
            }
        }
    }
    Ok(())
}

/// Sentences from JSONL (`text` field) or plain text, one per line.
fn read_sentences(path: &Path) -> Result<Vec<String>> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('{') {
            let v: serde_json::Value =
                serde_json::from_str(line).map_err(|e| Error::format(path, i + 1, e.to_string()))?;
            let t = v["text"]
                .as_str()
                .ok_or_else(|| Error::format(path, i + 1, "missing text field"))?;
            out.push(t.to_string());
        } else {
            out.push(line.to_string());
        }
    }
    Ok(out)
}

fn checklist_cmd(cmd: ChecklistCmd) -> Result<()> {
    match cmd {
        ChecklistCmd::Gen {
            suite,
            input,
            seed,
            lexicons,
            out,
        } => {
            let suite: Suite = suite.parse()?;
            let lex = match lexicons {
                Some(dir) => Lexicons::load_dir(&dir)?,
                None => Lexicons::default(),
            };
            let cases = checklist::generate(suite, &read_sentences(&input)?, &lex, seed)?;
            write_atomic(&out, &jsonl_bytes(&cases))?;
            eprintln!("{} cases", cases.len());
        }
        ChecklistCmd::Texts { cases, out } => {
            let cases: Vec<PerturbationCase> = read_jsonl(&cases)?;
            write_atomic(&out, &csv_bytes(&case_texts(&cases)))?;
        }
        ChecklistCmd::Score {
            cases,
            preds,
            model,
            json,
        } => {
            let cases: Vec<PerturbationCase> = read_jsonl(&cases)?;
            let report = match (preds, model) {
                (Some(p), _) => checklist::score_predictions(&cases, &CasePredictions::load(&p)?)?,
                (None, Some(m)) => {
                    let model = TrainedModel::load(&m)?;
                    checklist::score_suite(&cases, |t| model.label(t))
                }
                (None, None) => unreachable!("clap requires one of --preds and --model"),
            };
            if json {
                print_json(&report);
            } else {
                print!("{}", report.to_text());
            }
        }
    }
    Ok(())
}

fn baseline(cmd: BaselineCmd) -> Result<()> {
    match cmd {
        BaselineCmd::Train {
            data,
            split,
            config,
            seed,
            out,
        } => {
            let tag: SplitTag = split.parse().map_err(Error::Config)?;
            let mut cfg: TrainConfig = match config {
                Some(p) => toml::from_str(&read_text(&p)?)
                    .map_err(|e| Error::Config(format!("{}: {}", p.display(), e.message())))?,
                None => TrainConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let rows: Vec<DatasetRow> = read_csv(&data)?;
            let examples: Vec<(String, BiasLabel)> =
                rows.into_iter().filter(|r| r.split == tag).map(|r| (r.text, r.label)).collect();
            let outcome = train(&examples, &cfg)?;
            outcome.model.save(&out)?;
            eprintln!(
                "{} examples, vocabulary {}, final loss {:.6}",
                examples.len(),
                outcome.model.vocab.len(),
                outcome.final_loss().unwrap_or(f64::NAN)
            );
        }
        BaselineCmd::Predict {
            model,
            input,
            cases,
            out,
        } => {
            let model = TrainedModel::load(&model)?;
            let bytes = match (input, cases) {
                (Some(p), _) => {
                    let rows: Vec<TextRow> = read_jsonl(&p)?;
                    let preds: Vec<LabelRow> = rows
                        .into_iter()
                        .map(|r| LabelRow {
                            label: model.label(&r.text),
                            sentence_id: r.sentence_id,
                        })
                        .collect();
                    csv_bytes(&preds)
                }
                (None, Some(c)) => {
                    let cases: Vec<PerturbationCase> = read_jsonl(&c)?;
                    let preds: Vec<CasePrediction> = case_texts(&cases)
                        .into_iter()
                        .map(|t| CasePrediction {
                            label: model.label(&t.text),
                            case_id: t.case_id,
                            variant: t.variant,
                        })
                        .collect();
                    csv_bytes(&preds)
                }
                (None, None) => unreachable!("clap requires one of --in and --cases"),
            };
            write_atomic(&out, &bytes)?;
        }
    }
    Ok(())
}
