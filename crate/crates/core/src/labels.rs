//! Label and leaning enums shared by every stage of the pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Binary lexical-bias label. `Biased` is the positive class everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BiasLabel {
    Biased,
    NotBiased,
}

impl BiasLabel {
    pub const ALL: [BiasLabel; 2] = [BiasLabel::Biased, BiasLabel::NotBiased];

    /// The literal token used in prompts and label files.
    pub fn as_str(self) -> &'static str {
        match self {
            BiasLabel::Biased => "BIASED",
            BiasLabel::NotBiased => "NOT BIASED",
        }
    }

    pub fn is_biased(self) -> bool {
        matches!(self, BiasLabel::Biased)
    }

    pub fn inverted(self) -> BiasLabel {
        match self {
            BiasLabel::Biased => BiasLabel::NotBiased,
            BiasLabel::NotBiased => BiasLabel::Biased,
        }
    }

    pub fn from_bool(biased: bool) -> BiasLabel {
        if biased {
            BiasLabel::Biased
        } else {
            BiasLabel::NotBiased
        }
    }
}

impl fmt::Display for BiasLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unrecognized label {0:?}")]
pub struct LabelParseError(pub String);

impl FromStr for BiasLabel {
    type Err = LabelParseError;

    /// Accepts the prompt tokens in any case, snake/kebab variants and 1/0.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .chars()
            .map(|c| if c == '_' || c == '-' { ' ' } else { c.to_ascii_lowercase() })
            .collect();
        match norm.split_whitespace().collect::<Vec<_>>().join(" ").as_str() {
            "biased" | "1" | "true" | "positive" => Ok(BiasLabel::Biased),
            "not biased" | "notbiased" | "0" | "false" | "negative" => Ok(BiasLabel::NotBiased),
            _ => Err(LabelParseError(s.to_string())),
        }
    }
}

impl Serialize for BiasLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for BiasLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// Five-point outlet-level political leaning, ordered left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoliticalLeaning {
    Left,
    LeanLeft,
    Center,
    LeanRight,
    Right,
}

impl PoliticalLeaning {
    pub const ALL: [PoliticalLeaning; 5] = [
        PoliticalLeaning::Left,
        PoliticalLeaning::LeanLeft,
        PoliticalLeaning::Center,
        PoliticalLeaning::LeanRight,
        PoliticalLeaning::Right,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PoliticalLeaning::Left => "left",
            PoliticalLeaning::LeanLeft => "lean_left",
            PoliticalLeaning::Center => "center",
            PoliticalLeaning::LeanRight => "lean_right",
            PoliticalLeaning::Right => "right",
        }
    }

    /// Reflection around the center.
    pub fn mirrored(self) -> PoliticalLeaning {
        match self {
            PoliticalLeaning::Left => PoliticalLeaning::Right,
            PoliticalLeaning::LeanLeft => PoliticalLeaning::LeanRight,
            PoliticalLeaning::Center => PoliticalLeaning::Center,
            PoliticalLeaning::LeanRight => PoliticalLeaning::LeanLeft,
            PoliticalLeaning::Right => PoliticalLeaning::Left,
        }
    }
}

impl fmt::Display for PoliticalLeaning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PoliticalLeaning {
    type Err = LabelParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, '_' | '-' | ' '))
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match norm.as_str() {
            "left" => Ok(PoliticalLeaning::Left),
            "leanleft" => Ok(PoliticalLeaning::LeanLeft),
            "center" | "centre" => Ok(PoliticalLeaning::Center),
            "leanright" => Ok(PoliticalLeaning::LeanRight),
            "right" => Ok(PoliticalLeaning::Right),
            _ => Err(LabelParseError(s.to_string())),
        }
    }
}
