//! Corpus construction: ingest pre-scraped articles carrying two outlet
//! ratings, keep articles whose ratings agree, filter, and segment into
//! clean sentences.

mod clean;
mod filter;
mod ratings;
mod segment;

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use clean::{clean_sentence, normalize_whitespace, CleanConfig};
pub(crate) use filter::is_stopword;
pub use filter::{
    filter_article, filter_article_with, printable_ratio, stopword_ratio, FilterConfig, LanguageDetector,
    StopwordDetector, TagOrStopwordDetector,
};
pub use ratings::{parse_allsides, unify_ratings, unify_ratings_with, AdFontesThresholds};
pub use segment::split_sentences;

use crate::digest::sha256_fields;
use crate::error::{Error, Result};
use crate::io::read_jsonl;
use crate::labels::PoliticalLeaning;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub article_id: String,
    pub outlet: String,
    pub url: String,
    pub body: String,
    pub allsides_rating: String,
    pub adfontes_bias: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detected_language: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub sentence_id: String,
    pub text: String,
    pub leaning: PoliticalLeaning,
    pub outlet: String,
    pub article_id: String,
}

/// Deterministic id: truncated content hash of (article id, ordinal).
pub fn sentence_id(article_id: &str, ordinal: usize) -> String {
    let full = sha256_fields(&[article_id.as_bytes(), ordinal.to_string().as_bytes()]);
    full[..16].to_string()
}

/// Split an article body into sentence records with contiguous ordinals.
/// Texts are whitespace-normalized but not yet length-filtered.
pub fn segment_sentences(a: &ArticleRecord, leaning: PoliticalLeaning) -> Vec<(usize, SentenceRecord)> {
    split_sentences(&a.body)
        .into_iter()
        .enumerate()
        .map(|(ordinal, text)| {
            (
                ordinal,
                SentenceRecord {
                    sentence_id: sentence_id(&a.article_id, ordinal),
                    text,
                    leaning,
                    outlet: a.outlet.clone(),
                    article_id: a.article_id.clone(),
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusConfig {
    #[serde(flatten)]
    pub filter: FilterConfig,
    #[serde(flatten)]
    pub clean: CleanConfig,
    pub adfontes: AdFontesThresholds,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub articles_in: usize,
    pub rating_disagreements: usize,
    pub articles_filtered: usize,
    pub segments: usize,
    pub sentences_out: usize,
}

/// Run unify → filter → segment → clean over a set of articles. Output is
/// sorted by (article_id, ordinal).
pub fn build_corpus(articles: &[ArticleRecord], cfg: &CorpusConfig) -> (Vec<SentenceRecord>, CorpusStats) {
    let mut stats = CorpusStats {
        articles_in: articles.len(),
        ..CorpusStats::default()
    };
    let mut keyed: Vec<(String, usize, SentenceRecord)> = Vec::new();
    for a in articles {
        let Some(leaning) = unify_ratings_with(&a.allsides_rating, a.adfontes_bias, &cfg.adfontes) else {
            stats.rating_disagreements += 1;
            continue;
        };
        if !filter_article(a, &cfg.filter) {
            stats.articles_filtered += 1;
            continue;
        }
        for (ordinal, mut rec) in segment_sentences(a, leaning) {
            stats.segments += 1;
            if let Some(text) = clean_sentence(&rec.text, &cfg.clean) {
                rec.text = text;
                keyed.push((a.article_id.clone(), ordinal, rec));
            }
        }
    }
    keyed.sort_by(|x, y| (&x.0, x.1).cmp(&(&y.0, y.1)));
    stats.sentences_out = keyed.len();
    (keyed.into_iter().map(|(_, _, r)| r).collect(), stats)
}

/// Load every `*.jsonl` file under `dir` (or `dir` itself when it is a
/// file), in file-name order. Duplicate article ids are rejected.
pub fn load_articles(input: &Path) -> Result<Vec<ArticleRecord>> {
    let files: Vec<PathBuf> = if input.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(input)
            .map_err(|e| Error::io(input, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "jsonl"))
            .collect();
        files.sort();
        files
    } else {
        vec![input.to_path_buf()]
    };
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for file in files {
        for (i, a) in read_jsonl::<ArticleRecord>(&file)?.into_iter().enumerate() {
            if !seen.insert(a.article_id.clone()) {
                return Err(Error::format(&file, i + 1, format!("duplicate article_id {}", a.article_id)));
            }
            out.push(a);
        }
    }
    Ok(out)
}
