//! Append-only JSONL transcript storage.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{BackendError, ChatRequest, ChatResponse};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transcript {
    pub key: String,
    pub request: ChatRequest,
    pub response: ChatResponse,
    /// Seconds since the Unix epoch at record time.
    pub timestamp: u64,
}

/// In-memory index over one or more JSONL transcript files, keyed by
/// request hash. Recording appends; an existing key may only be re-recorded
/// with an identical response.
#[derive(Debug, Default)]
pub struct TranscriptStore {
    entries: BTreeMap<String, ChatResponse>,
    /// Where `record` appends; unset for read-only stores.
    append_path: Option<PathBuf>,
}

impl TranscriptStore {
    /// Load every `*.jsonl` file under `path` (or `path` itself if it is a
    /// file). A missing path yields an empty store.
    pub fn load(path: &Path) -> Result<TranscriptStore, BackendError> {
        let mut store = TranscriptStore::default();
        if path.is_file() {
            store.load_file(path)?;
            store.append_path = Some(path.to_path_buf());
            return Ok(store);
        }
        if path.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(path)?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
                .collect();
            files.sort();
            for file in &files {
                store.load_file(file)?;
            }
            store.append_path = Some(path.join("session.jsonl"));
        } else {
            store.append_path = Some(path.to_path_buf());
        }
        Ok(store)
    }

    fn load_file(&mut self, path: &Path) -> Result<(), BackendError> {
        let content = fs::read_to_string(path)?;
        for (idx, line) in content.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let entry: Transcript =
                serde_json::from_str(line).map_err(|e| BackendError::TranscriptFormat {
                    line: idx + 1,
                    message: e.to_string(),
                })?;
            self.insert(entry.key, entry.response)?;
        }
        Ok(())
    }

    fn insert(&mut self, key: String, response: ChatResponse) -> Result<(), BackendError> {
        match self.entries.get(&key) {
            Some(existing) if existing.text != response.text => {
                Err(BackendError::TranscriptConflict { key })
            }
            Some(_) => Ok(()),
            None => {
                self.entries.insert(key, response);
                Ok(())
            }
        }
    }

    pub fn lookup(&self, key: &str) -> Option<&ChatResponse> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Record a request/response pair, appending to the backing file.
    pub fn record(
        &mut self,
        request: &ChatRequest,
        response: &ChatResponse,
    ) -> Result<(), BackendError> {
        let key = request.request_key();
        if let Some(existing) = self.entries.get(&key) {
            if existing.text != response.text {
                return Err(BackendError::TranscriptConflict { key });
            }
            return Ok(());
        }
        let entry = Transcript {
            key: key.clone(),
            request: request.clone(),
            response: response.clone(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        if let Some(path) = &self.append_path {
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            let mut file = fs::OpenOptions::new().create(true).append(true).open(path)?;
            let mut line = serde_json::to_string(&entry).expect("transcript serializes");
            line.push('\n');
            file.write_all(line.as_bytes())?;
        }
        self.entries.insert(key, response.clone());
        Ok(())
    }
}
