use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicU32, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::prompting::{EmbeddingProvider, HashingEmbedder};

fn default_fail_status() -> u16 {
    503
}

/// Scripted reply for prompts matching `pattern`. The first `fail_first`
/// matching requests get `fail_status`; `raw_body` replaces the whole JSON
/// payload when set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockRule {
    pub pattern: String,
    #[serde(default)]
    pub response: String,
    #[serde(default)]
    pub fail_first: u32,
    #[serde(default = "default_fail_status")]
    pub fail_status: u16,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_body: Option<String>,
}

/// Rules per model id, tried in order against the full prompt text
/// (system message, newline, user message).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockScript {
    pub models: BTreeMap<String, Vec<MockRule>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_response: Option<String>,
}

struct CompiledRule {
    regex: Regex,
    rule: MockRule,
    seen: AtomicU32,
}

struct State {
    rules: BTreeMap<String, Vec<CompiledRule>>,
    default_response: Option<String>,
    requests: AtomicUsize,
    embedder: HashingEmbedder,
}

/// Chat-completion and embedding endpoint replaying a script on a local port.
pub struct MockServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    state: Arc<State>,
    handle: Option<JoinHandle<()>>,
}

impl MockServer {
    /// Bind `127.0.0.1:port` (0 picks a free port) and serve in the background.
    pub fn start(script: &MockScript, port: u16) -> Result<Self, String> {
        let mut rules = BTreeMap::new();
        for (model, list) in &script.models {
            let compiled = list
                .iter()
                .map(|r| {
                    Regex::new(&r.pattern)
                        .map(|regex| CompiledRule {
                            regex,
                            rule: r.clone(),
                            seen: AtomicU32::new(0),
                        })
                        .map_err(|e| format!("model {model}: bad pattern {:?}: {e}", r.pattern))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rules.insert(model.clone(), compiled);
        }
        let state = Arc::new(State {
            rules,
            default_response: script.default_response.clone(),
            requests: AtomicUsize::new(0),
            embedder: HashingEmbedder { dim: 64, seed: 0 },
        });
        let listener = TcpListener::bind(("127.0.0.1", port)).map_err(|e| e.to_string())?;
        let addr = listener.local_addr().map_err(|e| e.to_string())?;
        let stop = Arc::new(AtomicBool::new(false));
        let handle = {
            let stop = stop.clone();
            let state = state.clone();
            std::thread::spawn(move || {
                for conn in listener.incoming() {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(stream) = conn else { continue };
                    let state = state.clone();
                    std::thread::spawn(move || {
                        let _ = serve(stream, &state);
                    });
                }
            })
        };
        Ok(Self {
            addr,
            stop,
            state,
            handle: Some(handle),
        })
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn port(&self) -> u16 {
        self.addr.port()
    }

    /// Requests received so far, any path.
    pub fn requests(&self) -> usize {
        self.state.requests.load(Ordering::SeqCst)
    }

    /// Block until the accept loop ends, which only happens on shutdown.
    pub fn join(mut self) {
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

struct Request {
    method: String,
    path: String,
    body: Vec<u8>,
}

fn read_request(stream: &TcpStream) -> std::io::Result<Request> {
    let mut reader = BufReader::new(stream);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let mut parts = line.split_whitespace();
    let method = parts.next().unwrap_or_default().to_string();
    let path = parts.next().unwrap_or_default().to_string();
    let mut content_length = 0usize;
    let mut chunked = false;
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        let header = line.trim_end();
        if header.is_empty() {
            break;
        }
        if let Some((k, v)) = header.split_once(':') {
            let (k, v) = (k.trim().to_ascii_lowercase(), v.trim());
            if k == "content-length" {
                content_length = v.parse().unwrap_or(0);
            } else if k == "transfer-encoding" && v.eq_ignore_ascii_case("chunked") {
                chunked = true;
            }
        }
    }
    let mut body = Vec::new();
    if chunked {
        loop {
            line.clear();
            reader.read_line(&mut line)?;
            let size = usize::from_str_radix(line.trim().split(';').next().unwrap_or("0"), 16).unwrap_or(0);
            let mut chunk = vec![0; size + 2];
            reader.read_exact(&mut chunk)?;
            if size == 0 {
                break;
            }
            body.extend_from_slice(&chunk[..size]);
        }
    } else {
        body.resize(content_length, 0);
        reader.read_exact(&mut body)?;
    }
    Ok(Request { method, path, body })
}

fn respond(mut stream: &TcpStream, status: u16, body: &str) -> std::io::Result<()> {
    let reason = match status {
        200 => "OK",
        400 => "Bad Request",
        404 => "Not Found",
        429 => "Too Many Requests",
        500 => "Internal Server Error",
        503 => "Service Unavailable",
        _ => "Status",
    };
    write!(
        stream,
        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )?;
    stream.flush()
}

fn prompt_text(body: &Value) -> String {
    body["messages"]
        .as_array()
        .map(|msgs| {
            msgs.iter()
                .filter_map(|m| m["content"].as_str())
                .collect::<Vec<_>>()
                .join("\n")
        })
        .unwrap_or_default()
}

fn chat(state: &State, body: &Value) -> (u16, String) {
    let model = body["model"].as_str().unwrap_or_default();
    let text = prompt_text(body);
    let rule = state
        .rules
        .get(model)
        .and_then(|rules| rules.iter().find(|r| r.regex.is_match(&text)));
    let content = match rule {
        Some(r) => {
            if r.seen.fetch_add(1, Ordering::SeqCst) < r.rule.fail_first {
                return (r.rule.fail_status, json!({"error": "scripted failure"}).to_string());
            }
            if let Some(raw) = &r.rule.raw_body {
                return (200, raw.clone());
            }
            r.rule.response.clone()
        }
        None => match &state.default_response {
            Some(d) => d.clone(),
            None => return (404, json!({"error": format!("no rule for model {model:?}")}).to_string()),
        },
    };
    let payload = json!({
        "object": "chat.completion",
        "model": model,
        "choices": [{"index": 0, "message": {"role": "assistant", "content": content}, "finish_reason": "stop"}],
    });
    (200, payload.to_string())
}

fn embeddings(state: &State, body: &Value) -> (u16, String) {
    let inputs: Vec<String> = match &body["input"] {
        Value::String(s) => vec![s.clone()],
        Value::Array(items) => items.iter().filter_map(|v| v.as_str().map(str::to_string)).collect(),
        _ => Vec::new(),
    };
    let mut data = Vec::new();
    for (index, text) in inputs.iter().enumerate() {
        match state.embedder.embed(text) {
            Ok(v) => data.push(json!({"object": "embedding", "index": index, "embedding": v.values})),
            Err(e) => return (400, json!({"error": e.to_string()}).to_string()),
        }
    }
    (200, json!({"object": "list", "data": data}).to_string())
}

fn serve(stream: TcpStream, state: &State) -> std::io::Result<()> {
    let req = read_request(&stream)?;
    if req.method.is_empty() {
        return Ok(());
    }
    state.requests.fetch_add(1, Ordering::SeqCst);
    let parsed: Value = serde_json::from_slice(&req.body).unwrap_or(Value::Null);
    let (status, body) = match (req.method.as_str(), req.path.as_str()) {
        ("POST", p) if p.ends_with("/chat/completions") => chat(state, &parsed),
        ("POST", p) if p.ends_with("/embeddings") => embeddings(state, &parsed),
        ("GET", "/health") => (200, "{}".to_string()),
        _ => (404, json!({"error": "unknown route"}).to_string()),
    };
    respond(&stream, status, &body)
}
