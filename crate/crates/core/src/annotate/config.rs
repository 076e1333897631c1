use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::read_text;

fn default_max_tokens() -> u32 {
    512
}
fn default_timeout_ms() -> u64 {
    60_000
}
fn default_max_retries() -> u32 {
    3
}
fn default_rpm() -> u32 {
    60
}

/// One annotator endpoint. API keys are never stored here, only the name of
/// the environment variable holding one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEndpointConfig {
    #[serde(default)]
    pub name: String,
    pub base_url: String,
    pub model_id: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    /// 0 disables rate limiting.
    #[serde(default = "default_rpm")]
    pub requests_per_minute: u32,
    #[serde(default)]
    pub api_key_env: Option<String>,
}

impl ModelEndpointConfig {
    pub fn new(name: &str, base_url: &str, model_id: &str) -> Self {
        Self {
            name: name.to_string(),
            base_url: base_url.to_string(),
            model_id: model_id.to_string(),
            temperature: 0.0,
            max_tokens: default_max_tokens(),
            timeout_ms: default_timeout_ms(),
            max_retries: default_max_retries(),
            requests_per_minute: default_rpm(),
            api_key_env: None,
        }
    }

    pub fn api_key(&self) -> Option<String> {
        self.api_key_env.as_ref().and_then(|var| std::env::var(var).ok())
    }
}

/// Parse an ensemble file: one TOML table per model, keyed by model name.
/// Models are returned in name order.
pub fn parse_ensemble(text: &str, origin: &Path) -> Result<Vec<ModelEndpointConfig>> {
    let tables: BTreeMap<String, ModelEndpointConfig> =
        toml::from_str(text).map_err(|e| Error::format(origin, 0, e.to_string()))?;
    let mut out = Vec::with_capacity(tables.len());
    for (name, mut cfg) in tables {
        if cfg.temperature.is_nan() || cfg.temperature < 0.0 {
            return Err(Error::format(origin, 0, format!("{name}: temperature must be >= 0")));
        }
        cfg.name = name;
        out.push(cfg);
    }
    Ok(out)
}

pub fn load_ensemble(path: &Path) -> Result<Vec<ModelEndpointConfig>> {
    parse_ensemble(&read_text(path)?, path)
}
