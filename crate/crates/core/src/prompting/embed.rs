use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Duration;

use sha2::{Digest, Sha256};

use super::PromptError;

pub const DEFAULT_EMBED_DIM: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Cosine similarity; zero vectors have similarity 0 with everything.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, PromptError> {
    if a.dim() != b.dim() {
        return Err(PromptError::DimensionMismatch(a.dim(), b.dim()));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    Ok(dot / (na * nb))
}

/// Source of sentence embeddings. Implementations must be callable from
/// several workers at once.
pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, PromptError>;
}

/// Offline signed feature-hashing bag of words, L2-normalized.
#[derive(Debug, Clone, Copy)]
pub struct HashingEmbedder {
    pub dim: usize,
    pub seed: u64,
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        Self {
            dim: DEFAULT_EMBED_DIM,
            seed: 0,
        }
    }
}

impl EmbeddingProvider for HashingEmbedder {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, PromptError> {
        if text.trim().is_empty() {
            return Err(PromptError::EmptyText);
        }
        let mut values = vec![0.0; self.dim];
        for tok in text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
            let mut h = Sha256::new();
            h.update(self.seed.to_le_bytes());
            h.update(tok.to_lowercase().as_bytes());
            let d = h.finalize();
            let bucket = u64::from_le_bytes(d[..8].try_into().expect("32-byte digest")) % self.dim as u64;
            let sign = if d[8] & 1 == 0 { 1.0 } else { -1.0 };
            values[bucket as usize] += sign;
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            values.iter_mut().for_each(|v| *v /= norm);
        }
        Ok(EmbeddingVector { values })
    }
}

/// Embeddings from an HTTP endpoint speaking the common `/embeddings` JSON
/// shape. Results are memoized by text hash.
pub struct RemoteEmbedder {
    pub base_url: String,
    pub model: String,
    pub api_key: Option<String>,
    agent: ureq::Agent,
    cache: Mutex<HashMap<String, EmbeddingVector>>,
}

impl RemoteEmbedder {
    pub fn new(base_url: &str, model: &str, api_key: Option<String>, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            base_url: base_url.trim_end_matches('/').to_string(),
            model: model.to_string(),
            api_key,
            agent,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn fetch(&self, text: &str) -> Result<EmbeddingVector, PromptError> {
        let unavailable = |m: String| PromptError::ProviderUnavailable(m);
        let mut req = self.agent.post(format!("{}/embeddings", self.base_url));
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(serde_json::json!({ "model": self.model, "input": text }))
            .map_err(|e| unavailable(e.to_string()))?;
        let status = resp.status().as_u16();
        let body: serde_json::Value = resp.body_mut().read_json().map_err(|e| unavailable(e.to_string()))?;
        if status != 200 {
            return Err(unavailable(format!("status {status}")));
        }
        let values = body["data"][0]["embedding"]
            .as_array()
            .ok_or_else(|| unavailable("response has no data[0].embedding".into()))?
            .iter()
            .map(|v| v.as_f64().ok_or_else(|| unavailable("non-numeric embedding".into())))
            .collect::<Result<Vec<f64>, _>>()?;
        Ok(EmbeddingVector { values })
    }
}

impl EmbeddingProvider for RemoteEmbedder {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, PromptError> {
        if text.trim().is_empty() {
            return Err(PromptError::EmptyText);
        }
        let key = crate::digest::sha256_hex(text.as_bytes());
        if let Some(v) = self.cache.lock().expect("embedding cache lock").get(&key) {
            return Ok(v.clone());
        }
        let v = self.fetch(text)?;
        self.cache.lock().expect("embedding cache lock").insert(key, v.clone());
        Ok(v)
    }
}
