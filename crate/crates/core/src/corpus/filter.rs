use serde::{Deserialize, Serialize};

use super::ArticleRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub min_article_chars: usize,
    pub min_printable_ratio: f64,
    /// Minimum fraction of tokens found in the English stopword list.
    pub english_stopword_ratio: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            min_article_chars: 200,
            min_printable_ratio: 0.95,
            english_stopword_ratio: 0.12,
        }
    }
}

/// Pluggable language identification.
pub trait LanguageDetector {
    fn is_english(&self, text: &str) -> bool;
}

/// Stopword-ratio heuristic. Short function words dominate English prose, so
/// their share of tokens separates English from most other languages.
#[derive(Debug, Clone, Copy)]
pub struct StopwordDetector {
    pub threshold: f64,
}

impl LanguageDetector for StopwordDetector {
    fn is_english(&self, text: &str) -> bool {
        stopword_ratio(text) >= self.threshold
    }
}

/// Uses an explicit ISO-639-1 tag when the record carries one, otherwise
/// falls back to the stopword heuristic.
#[derive(Debug, Clone, Copy)]
pub struct TagOrStopwordDetector<'a> {
    pub tag: Option<&'a str>,
    pub fallback: StopwordDetector,
}

impl LanguageDetector for TagOrStopwordDetector<'_> {
    fn is_english(&self, text: &str) -> bool {
        match self.tag {
            Some(tag) => tag.trim().eq_ignore_ascii_case("en"),
            None => self.fallback.is_english(text),
        }
    }
}

const ENGLISH_STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are", "as",
    "at", "be", "because", "been", "before", "being", "below", "between", "both", "but", "by", "can",
    "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from", "further",
    "had", "has", "have", "having", "he", "her", "here", "hers", "herself", "him", "himself", "his",
    "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just", "me", "more", "most", "my",
    "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other", "our",
    "ours", "out", "over", "own", "said", "same", "she", "should", "so", "some", "such", "than",
    "that", "the", "their", "theirs", "them", "then", "there", "these", "they", "this", "those",
    "through", "to", "too", "under", "until", "up", "very", "was", "we", "were", "what", "when",
    "where", "which", "while", "who", "whom", "why", "will", "with", "would", "you", "your",
];

/// `lower` must already be lowercased.
pub(crate) fn is_stopword(lower: &str) -> bool {
    ENGLISH_STOPWORDS.binary_search(&lower).is_ok()
}

pub fn stopword_ratio(text: &str) -> f64 {
    let mut total = 0usize;
    let mut hits = 0usize;
    for tok in text.split(|c: char| !c.is_alphanumeric() && c != '\'') {
        if tok.is_empty() {
            continue;
        }
        total += 1;
        let lower = tok.to_lowercase();
        if is_stopword(&lower) {
            hits += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

/// Share of characters that are printable (whitespace counts as printable,
/// other control characters and U+FFFD do not).
pub fn printable_ratio(text: &str) -> f64 {
    let mut total = 0usize;
    let mut ok = 0usize;
    for c in text.chars() {
        total += 1;
        if c.is_whitespace() || !(c.is_control() || c == '\u{FFFD}') {
            ok += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        ok as f64 / total as f64
    }
}

pub fn filter_article(a: &ArticleRecord, cfg: &FilterConfig) -> bool {
    let detector = TagOrStopwordDetector {
        tag: a.detected_language.as_deref(),
        fallback: StopwordDetector {
            threshold: cfg.english_stopword_ratio,
        },
    };
    filter_article_with(a, cfg, &detector)
}

pub fn filter_article_with(a: &ArticleRecord, cfg: &FilterConfig, detector: &dyn LanguageDetector) -> bool {
    let chars = a.body.chars().count();
    chars > 0
        && chars >= cfg.min_article_chars
        && printable_ratio(&a.body) >= cfg.min_printable_ratio
        && detector.is_english(&a.body)
}
