use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::digest::sha256_fields;
use crate::error::{Error, Result};

/// Cache key: a pure function of (model id, prompt text, temperature).
pub fn prompt_hash(model_id: &str, prompt_text: &str, temperature: f64) -> String {
    sha256_fields(&[
        model_id.as_bytes(),
        prompt_text.as_bytes(),
        temperature.to_bits().to_le_bytes().as_slice(),
    ])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub prompt_hash: String,
    pub model_id: String,
    pub raw_response: String,
    pub latency_ms: u64,
}

struct Inner {
    index: HashMap<String, CacheEntry>,
    file: Option<File>,
}

/// Append-only JSONL response cache with an in-memory index. Appends go
/// through a single lock so concurrent workers never interleave lines.
pub struct ResponseCache {
    path: Option<PathBuf>,
    inner: Mutex<Inner>,
}

impl ResponseCache {
    pub fn in_memory() -> Self {
        Self {
            path: None,
            inner: Mutex::new(Inner {
                index: HashMap::new(),
                file: None,
            }),
        }
    }

    /// Open (creating if needed) and index an on-disk cache. A torn final
    /// line left by a crash is truncated away; corruption elsewhere is an error.
    pub fn open(path: &Path) -> Result<Self> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let mut index = HashMap::new();
        let mut keep_bytes = None;
        if path.exists() {
            let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let mut offset = 0;
            let lines: Vec<(usize, &str)> = content
                .split_inclusive('\n')
                .map(|l| {
                    let at = offset;
                    offset += l.len();
                    (at, l)
                })
                .collect();
            for (i, &(at, line)) in lines.iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<CacheEntry>(line) {
                    Ok(entry) => {
                        index.insert(entry.prompt_hash.clone(), entry);
                    }
                    Err(_) if i + 1 == lines.len() => keep_bytes = Some(at as u64),
                    Err(e) => return Err(Error::format(path, i + 1, e.to_string())),
                }
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        if let Some(len) = keep_bytes {
            file.set_len(len).map_err(|e| Error::io(path, e))?;
        }
        Ok(Self {
            path: Some(path.to_path_buf()),
            inner: Mutex::new(Inner {
                index,
                file: Some(file),
            }),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, prompt_hash: &str) -> Option<CacheEntry> {
        self.inner.lock().expect("cache lock").index.get(prompt_hash).cloned()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("cache lock").index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Persist then index. Returns once the line is flushed.
    pub fn insert(&self, entry: CacheEntry) -> Result<()> {
        let mut inner = self.inner.lock().expect("cache lock");
        if let Some(file) = inner.file.as_mut() {
            let mut line = serde_json::to_vec(&entry).expect("cache entry serializes");
            line.push(b'\n');
            let path = self.path.as_deref().unwrap_or(Path::new("<cache>"));
            file.write_all(&line).map_err(|e| Error::io(path, e))?;
            file.flush().map_err(|e| Error::io(path, e))?;
        }
        inner.index.insert(entry.prompt_hash.clone(), entry);
        Ok(())
    }
}
