use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleanConfig {
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Boilerplate removed from the start of a sentence (case-insensitive).
    pub junk_prefixes: Vec<String>,
    /// Boilerplate removed from the end of a sentence (case-insensitive).
    pub junk_suffixes: Vec<String>,
    /// Characters stripped from both ends.
    pub trim_chars: String,
}

impl Default for CleanConfig {
    fn default() -> Self {
        Self {
            min_tokens: 5,
            max_tokens: 150,
            junk_prefixes: ["Advertisement", "ADVERTISEMENT", "Read more:", "Related:", "Click here"]
                .map(String::from)
                .to_vec(),
            junk_suffixes: ["Read more", "Continue reading", "(Reuters)", "(AP)"]
                .map(String::from)
                .to_vec(),
            trim_chars: "•·|*#~^_=<>-\u{2013}\u{2014}".to_string(),
        }
    }
}

/// Drop control characters (whitespace controls become spaces) and collapse
/// runs of whitespace into single spaces.
pub fn normalize_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if c.is_whitespace() {
            pending_space = true;
        } else if c.is_control() || matches!(c, '\u{FEFF}' | '\u{200B}') {
            continue;
        } else {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        }
    }
    out
}

fn strip_prefix_ci<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    let head = s.get(..prefix.len())?;
    head.eq_ignore_ascii_case(prefix).then(|| &s[prefix.len()..])
}

fn strip_suffix_ci<'a>(s: &'a str, suffix: &str) -> Option<&'a str> {
    let cut = s.len().checked_sub(suffix.len())?;
    let tail = s.get(cut..)?;
    tail.eq_ignore_ascii_case(suffix).then(|| &s[..cut])
}

pub fn clean_sentence(text: &str, cfg: &CleanConfig) -> Option<String> {
    let normalized = normalize_whitespace(text);
    let trim_set = |c: char| c.is_whitespace() || cfg.trim_chars.contains(c);
    let mut s = normalized.trim_matches(trim_set);
    loop {
        let before = s.len();
        for p in cfg.junk_prefixes.iter().filter(|p| !p.is_empty()) {
            if let Some(rest) = strip_prefix_ci(s, p) {
                s = rest.trim_matches(trim_set);
            }
        }
        for p in cfg.junk_suffixes.iter().filter(|p| !p.is_empty()) {
            if let Some(rest) = strip_suffix_ci(s, p) {
                s = rest.trim_matches(trim_set);
            }
        }
        if s.len() == before {
            break;
        }
    }
    let tokens = s.split_whitespace().count();
    if s.is_empty() || tokens < cfg.min_tokens || tokens > cfg.max_tokens {
        return None;
    }
    Some(s.to_string())
}
