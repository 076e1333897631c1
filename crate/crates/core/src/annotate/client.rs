use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::Rng;
use serde_json::{json, Value};

use super::cache::{prompt_hash, CacheEntry, ResponseCache};
use super::{AnnotateError, ModelEndpointConfig};
use crate::prompting::RenderedPrompt;
use crate::seed::rng;

/// Outcome of a single HTTP attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportError {
    /// Connection failure, timeout, 429 or 5xx. Worth retrying.
    Transient(String),
    /// Any other non-success status.
    Rejected { status: u16, body: String },
    /// Success status without a message text.
    Malformed(String),
}

pub trait ChatTransport: Send + Sync {
    fn send(&self, cfg: &ModelEndpointConfig, prompt: &RenderedPrompt) -> Result<String, TransportError>;
}

/// Chat-completion request body: the preamble (when enabled) goes in a
/// system message and the rest of the prompt in a single user message.
pub fn chat_request_body(cfg: &ModelEndpointConfig, prompt: &RenderedPrompt) -> Value {
    let mut messages = Vec::new();
    if let Some(system) = &prompt.system {
        messages.push(json!({ "role": "system", "content": system }));
    }
    messages.push(json!({ "role": "user", "content": prompt.user }));
    json!({
        "model": cfg.model_id,
        "messages": messages,
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_tokens,
        "stream": false,
    })
}

/// `choices[0].message.content` of a chat-completion response.
pub fn extract_message(body: &Value) -> Option<String> {
    body.get("choices")?
        .get(0)?
        .get("message")?
        .get("content")?
        .as_str()
        .map(str::to_string)
}

/// Blocking HTTP transport. One connection-pooling agent per endpoint.
#[derive(Default)]
pub struct HttpTransport {
    agents: Mutex<HashMap<String, ureq::Agent>>,
}

impl HttpTransport {
    pub fn new() -> Self {
        Self::default()
    }

    fn agent(&self, cfg: &ModelEndpointConfig) -> ureq::Agent {
        let mut agents = self.agents.lock().expect("agent map lock");
        agents
            .entry(cfg.name.clone())
            .or_insert_with(|| {
                ureq::Agent::config_builder()
                    .timeout_global(Some(Duration::from_millis(cfg.timeout_ms)))
                    .http_status_as_error(false)
                    .build()
                    .into()
            })
            .clone()
    }
}

impl ChatTransport for HttpTransport {
    fn send(&self, cfg: &ModelEndpointConfig, prompt: &RenderedPrompt) -> Result<String, TransportError> {
        let url = format!("{}/chat/completions", cfg.base_url.trim_end_matches('/'));
        let mut req = self.agent(cfg).post(&url);
        if let Some(key) = cfg.api_key() {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(chat_request_body(cfg, prompt))
            .map_err(|e| TransportError::Transient(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportError::Transient(e.to_string()))?;
        if status == 429 || status >= 500 {
            return Err(TransportError::Transient(format!("status {status}")));
        }
        if !(200..300).contains(&status) {
            return Err(TransportError::Rejected { status, body: text });
        }
        let body: Value = serde_json::from_str(&text).map_err(|e| TransportError::Malformed(e.to_string()))?;
        extract_message(&body).ok_or_else(|| TransportError::Malformed("no choices[0].message.content".into()))
    }
}

/// Exponential backoff: `base_ms * factor^(retry-1)`, capped, then stretched
/// by up to `jitter` of itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackoffConfig {
    pub base_ms: u64,
    pub factor: f64,
    pub max_ms: u64,
    pub jitter: f64,
}

impl Default for BackoffConfig {
    fn default() -> Self {
        Self {
            base_ms: 1000,
            factor: 2.0,
            max_ms: 60_000,
            jitter: 0.25,
        }
    }
}

impl BackoffConfig {
    pub fn delay(&self, retry: u32, unit: f64) -> Duration {
        let raw = self.base_ms as f64 * self.factor.powi(retry.saturating_sub(1) as i32);
        let capped = raw.min(self.max_ms as f64);
        Duration::from_secs_f64(capped * (1.0 + self.jitter * unit) / 1000.0)
    }
}

/// Spaces request starts at least `60 / rpm` seconds apart.
pub struct RateLimiter {
    interval: Option<Duration>,
    next: Mutex<Instant>,
}

impl RateLimiter {
    pub fn new(requests_per_minute: u32) -> Self {
        Self {
            interval: (requests_per_minute > 0).then(|| Duration::from_secs_f64(60.0 / requests_per_minute as f64)),
            next: Mutex::new(Instant::now()),
        }
    }

    pub fn acquire(&self) {
        let Some(interval) = self.interval else { return };
        let wait_until = {
            let mut next = self.next.lock().expect("rate limiter lock");
            let slot = (*next).max(Instant::now());
            *next = slot + interval;
            slot
        };
        let now = Instant::now();
        if wait_until > now {
            std::thread::sleep(wait_until - now);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub prompt_hash: String,
    pub raw_response: String,
    pub latency_ms: u64,
    pub from_cache: bool,
}

/// Cached, rate-limited, retrying chat client shared by all job workers.
pub struct Annotator {
    transport: Box<dyn ChatTransport>,
    cache: ResponseCache,
    pub backoff: BackoffConfig,
    /// When false, latencies are recorded as 0 so outputs are byte-stable.
    pub record_latency: bool,
    limiters: Mutex<HashMap<String, Arc<RateLimiter>>>,
    network_calls: AtomicUsize,
}

impl Annotator {
    pub fn new(transport: Box<dyn ChatTransport>, cache: ResponseCache) -> Self {
        Self {
            transport,
            cache,
            backoff: BackoffConfig::default(),
            record_latency: true,
            limiters: Mutex::new(HashMap::new()),
            network_calls: AtomicUsize::new(0),
        }
    }

    pub fn http(cache: ResponseCache) -> Self {
        Self::new(Box::new(HttpTransport::new()), cache)
    }

    pub fn cache(&self) -> &ResponseCache {
        &self.cache
    }

    /// Transport attempts made so far (cache hits excluded).
    pub fn network_calls(&self) -> usize {
        self.network_calls.load(Ordering::SeqCst)
    }

    fn limiter(&self, cfg: &ModelEndpointConfig) -> Arc<RateLimiter> {
        self.limiters
            .lock()
            .expect("limiter map lock")
            .entry(cfg.name.clone())
            .or_insert_with(|| Arc::new(RateLimiter::new(cfg.requests_per_minute)))
            .clone()
    }

    pub fn complete(&self, cfg: &ModelEndpointConfig, prompt: &RenderedPrompt) -> Result<Completion, AnnotateError> {
        let hash = prompt_hash(&cfg.model_id, &prompt.text, cfg.temperature);
        if let Some(hit) = self.cache.get(&hash) {
            return Ok(Completion {
                prompt_hash: hash,
                raw_response: hit.raw_response,
                latency_ms: hit.latency_ms,
                from_cache: true,
            });
        }
        let limiter = self.limiter(cfg);
        let mut jitter = rng(u64::from_str_radix(&hash[..16], 16).expect("hex digest"));
        let mut attempts = 0u32;
        loop {
            attempts += 1;
            limiter.acquire();
            self.network_calls.fetch_add(1, Ordering::SeqCst);
            let started = Instant::now();
            match self.transport.send(cfg, prompt) {
                Ok(raw) => {
                    let latency_ms = if self.record_latency {
                        started.elapsed().as_millis() as u64
                    } else {
                        0
                    };
                    self.cache
                        .insert(CacheEntry {
                            prompt_hash: hash.clone(),
                            model_id: cfg.model_id.clone(),
                            raw_response: raw.clone(),
                            latency_ms,
                        })
                        .map_err(|e| AnnotateError::Cache(e.to_string()))?;
                    return Ok(Completion {
                        prompt_hash: hash,
                        raw_response: raw,
                        latency_ms,
                        from_cache: false,
                    });
                }
                Err(TransportError::Transient(msg)) => {
                    if attempts > cfg.max_retries {
                        return Err(AnnotateError::EndpointExhausted {
                            model: cfg.name.clone(),
                            attempts,
                            last_error: msg,
                        });
                    }
                    std::thread::sleep(self.backoff.delay(attempts, jitter.random::<f64>()));
                }
                Err(TransportError::Rejected { status, body }) => {
                    return Err(AnnotateError::EndpointRejected {
                        model: cfg.name.clone(),
                        status,
                        body: body.chars().take(200).collect(),
                    })
                }
                Err(TransportError::Malformed(detail)) => {
                    return Err(AnnotateError::MalformedResponse {
                        model: cfg.name.clone(),
                        detail,
                    })
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompting::{render_prompt, PromptSettings};

    struct Flaky {
        failures: AtomicUsize,
        fail_times: usize,
    }

    impl ChatTransport for Flaky {
        fn send(&self, _: &ModelEndpointConfig, _: &RenderedPrompt) -> Result<String, TransportError> {
            if self.failures.fetch_add(1, Ordering::SeqCst) < self.fail_times {
                Err(TransportError::Transient("503".into()))
            } else {
                Ok("The answer is BIASED.".into())
            }
        }
    }

    fn fast(transport: Flaky) -> Annotator {
        let mut a = Annotator::new(Box::new(transport), ResponseCache::in_memory());
        a.backoff.base_ms = 1;
        a
    }

    fn setup(max_retries: u32) -> (ModelEndpointConfig, RenderedPrompt) {
        let mut cfg = ModelEndpointConfig::new("m", "http://unused", "m-1");
        cfg.max_retries = max_retries;
        cfg.requests_per_minute = 0;
        (cfg, render_prompt("A sentence.", &[], PromptSettings::new(0, false, false)).unwrap())
    }

    #[test]
    fn retries_then_succeeds_and_caches() {
        let (cfg, prompt) = setup(3);
        let a = fast(Flaky { failures: AtomicUsize::new(0), fail_times: 2 });
        let c = a.complete(&cfg, &prompt).unwrap();
        assert!(!c.from_cache);
        assert_eq!(a.network_calls(), 3);
        let again = a.complete(&cfg, &prompt).unwrap();
        assert!(again.from_cache);
        assert_eq!(again.raw_response, c.raw_response);
        assert_eq!(a.network_calls(), 3);
    }

    #[test]
    fn exhausts_retries() {
        let (cfg, prompt) = setup(2);
        let a = fast(Flaky { failures: AtomicUsize::new(0), fail_times: usize::MAX });
        match a.complete(&cfg, &prompt) {
            Err(AnnotateError::EndpointExhausted { attempts, .. }) => assert_eq!(attempts, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(a.cache().is_empty());
    }

    #[test]
    fn backoff_schedule() {
        let b = BackoffConfig::default();
        assert_eq!(b.delay(1, 0.0), Duration::from_secs(1));
        assert_eq!(b.delay(2, 0.0), Duration::from_secs(2));
        assert_eq!(b.delay(3, 0.0), Duration::from_secs(4));
        assert_eq!(b.delay(3, 1.0), Duration::from_secs(5));
        assert_eq!(b.delay(30, 0.0), Duration::from_secs(60));
    }

    #[test]
    fn rate_limiter_spaces_requests() {
        let limiter = RateLimiter::new(1200);
        let start = Instant::now();
        for _ in 0..4 {
            limiter.acquire();
        }
        assert!(start.elapsed() >= Duration::from_millis(140));
    }

    #[test]
    fn request_body_splits_system_message() {
        let cfg = ModelEndpointConfig::new("m", "http://x", "model-x");
        let p = render_prompt("S.", &[], PromptSettings::new(0, false, true)).unwrap();
        let body = chat_request_body(&cfg, &p);
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["messages"][0]["content"], "You are an expert in media bias.");
        assert_eq!(body["messages"][1]["content"], p.user.as_str());
        assert_eq!(body["temperature"], 0.0);
        let no_sys = render_prompt("S.", &[], PromptSettings::new(0, false, false)).unwrap();
        assert_eq!(chat_request_body(&cfg, &no_sys)["messages"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn message_extraction() {
        let ok = json!({"choices": [{"message": {"role": "assistant", "content": "hi"}}]});
        assert_eq!(extract_message(&ok).as_deref(), Some("hi"));
        assert_eq!(extract_message(&json!({"choices": []})), None);
    }
}
