use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{PromptError, PromptExample};

pub const SYSTEM_PREAMBLE: &str = "You are an expert in media bias.";
pub const CLASSIFY_LINE: &str = "Classify the sentence above as BIASED or NOT BIASED.";
const OUTPUT_PREFIX: &str = "Output: Let's think step by step.";
/// Extra instruction for the zero-shot explanation setting.
const JUSTIFY_LINE: &str = "Briefly justify your answer before stating it.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PromptSettings {
    pub shots: usize,
    pub with_explanations: bool,
    pub with_system_preamble: bool,
}

/// The nine benchmark settings, in table order.
pub const BENCHMARK_SETTINGS: [PromptSettings; 9] = [
    PromptSettings::new(0, false, false),
    PromptSettings::new(0, false, true),
    PromptSettings::new(0, true, false),
    PromptSettings::new(2, false, false),
    PromptSettings::new(4, false, false),
    PromptSettings::new(8, false, false),
    PromptSettings::new(2, true, false),
    PromptSettings::new(4, true, false),
    PromptSettings::new(8, true, false),
];

impl PromptSettings {
    pub const fn new(shots: usize, with_explanations: bool, with_system_preamble: bool) -> Self {
        Self {
            shots,
            with_explanations,
            with_system_preamble,
        }
    }

    /// Canonical name such as `0-shot`, `0-shot-sys`, `8-shot-exp`.
    pub fn name(&self) -> String {
        let mut s = format!("{}-shot", self.shots);
        if self.with_explanations {
            s.push_str("-exp");
        }
        if self.with_system_preamble {
            s.push_str("-sys");
        }
        s
    }
}

impl fmt::Display for PromptSettings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for PromptSettings {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let mut parts = lower.split('-');
        let shots = parts
            .next()
            .and_then(|p| p.parse::<usize>().ok())
            .filter(|n| [0, 2, 4, 8].contains(n));
        let (Some(shots), Some("shot")) = (shots, parts.next()) else {
            return Err(PromptError::UnknownSettings(s.to_string()));
        };
        let mut settings = PromptSettings::new(shots, false, false);
        for flag in parts {
            match flag {
                "exp" if !settings.with_explanations => settings.with_explanations = true,
                "sys" if !settings.with_system_preamble => settings.with_system_preamble = true,
                _ => return Err(PromptError::UnknownSettings(s.to_string())),
            }
        }
        Ok(settings)
    }
}

/// A fully rendered prompt. `system` and `user` are the two chat messages;
/// `text` is their newline-joined concatenation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub text: String,
    pub settings: PromptSettings,
    pub example_ids: Vec<usize>,
    pub system: Option<String>,
    pub user: String,
}

fn example_block(ex: &PromptExample, with_explanation: bool) -> String {
    let explanation = ex.explanation.trim();
    let reasoning = if with_explanation && !explanation.is_empty() {
        format!(" {explanation}")
    } else {
        String::new()
    };
    format!(
        "Instruction: '{}'\n{CLASSIFY_LINE}\n{OUTPUT_PREFIX}{reasoning} The answer is {}.",
        ex.text,
        ex.label.as_str()
    )
}

/// Render the few-shot template: optional preamble line, one block per
/// example, then the target block. Blocks are joined by single newlines and
/// there is no trailing newline.
pub fn render_prompt(
    target: &str,
    examples: &[PromptExample],
    settings: PromptSettings,
) -> Result<RenderedPrompt, PromptError> {
    if examples.len() != settings.shots {
        return Err(PromptError::ShotMismatch {
            expected: settings.shots,
            got: examples.len(),
        });
    }
    let mut blocks: Vec<String> = examples
        .iter()
        .map(|ex| example_block(ex, settings.with_explanations))
        .collect();
    let mut last = format!("Instruction: '{target}'\n{CLASSIFY_LINE}\n");
    if settings.shots == 0 && settings.with_explanations {
        last.push_str(JUSTIFY_LINE);
        last.push('\n');
    }
    last.push_str(OUTPUT_PREFIX);
    blocks.push(last);
    let user = blocks.join("\n");
    let system = settings.with_system_preamble.then(|| SYSTEM_PREAMBLE.to_string());
    let text = match &system {
        Some(s) => format!("{s}\n{user}"),
        None => user.clone(),
    };
    Ok(RenderedPrompt {
        text,
        settings,
        example_ids: Vec::new(),
        system,
        user,
    })
}
