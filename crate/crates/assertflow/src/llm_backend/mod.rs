//! Model-backend abstraction: live HTTP, transcript replay, and a
//! deterministic offline mock.
//!
//! Every request has a stable content hash ([`ChatRequest::request_key`])
//! computed over a canonical JSON serialization with CRLF line endings
//! normalized. Transcripts are JSONL files keyed by that hash, so a run
//! recorded against a live endpoint replays byte-identically offline.

mod live;
mod mock;
mod transcript;

pub use live::LiveBackend;
pub use mock::{extract_json_block, MockBackend};
pub use transcript::{Transcript, TranscriptStore};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("no transcript entry for request key {key} (stage {stage})")]
    ReplayMiss { key: String, stage: String },
    #[error("transcript conflict for key {key}: same request, different response")]
    TranscriptConflict { key: String },
    #[error("transcript io: {0}")]
    TranscriptIo(#[from] std::io::Error),
    #[error("transcript line {line} is not valid: {message}")]
    TranscriptFormat { line: usize, message: String },
    #[error("live backend: {0}")]
    Live(String),
    #[error("backend response was malformed: {0}")]
    Malformed(String),
}

/// A single-turn completion request. Field order is part of the on-disk
/// key format; do not reorder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    /// Pipeline stage tag (`spec_analyzer`, `signal_mapper`, `sva_generator`).
    pub stage: String,
    pub model: String,
    pub system: String,
    pub user: String,
    pub temperature: f64,
}

impl ChatRequest {
    pub fn new(stage: &str, model: &str, system: String, user: String) -> Self {
        ChatRequest {
            stage: stage.to_string(),
            model: model.to_string(),
            system,
            user,
            temperature: 0.0,
        }
    }

    /// SHA-256 over the canonical serialization; stable across platforms
    /// because CRLF sequences are normalized to LF first.
    pub fn request_key(&self) -> String {
        let canonical = ChatRequest {
            stage: self.stage.clone(),
            model: self.model.clone(),
            system: self.system.replace("\r\n", "\n"),
            user: self.user.replace("\r\n", "\n"),
            temperature: self.temperature,
        };
        let json = serde_json::to_string(&canonical).expect("request serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        hex::encode(hasher.finalize())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
}

/// A completion provider. Implementations must be deterministic for replay
/// and mock; the live backend is inherently not.
pub trait ChatBackend {
    fn name(&self) -> &str;
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError>;
}

/// Replays recorded transcripts; any unseen request is an error.
pub struct ReplayBackend {
    store: TranscriptStore,
}

impl ReplayBackend {
    pub fn new(store: TranscriptStore) -> Self {
        ReplayBackend { store }
    }
}

impl ChatBackend for ReplayBackend {
    fn name(&self) -> &str {
        "replay"
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        let key = request.request_key();
        self.store
            .lookup(&key)
            .cloned()
            .ok_or_else(|| BackendError::ReplayMiss {
                key,
                stage: request.stage.clone(),
            })
    }
}

/// Wraps another backend and appends every exchange to a transcript store.
pub struct RecordingBackend<B> {
    inner: B,
    store: std::sync::Mutex<TranscriptStore>,
}

impl<B: ChatBackend> RecordingBackend<B> {
    pub fn new(inner: B, store: TranscriptStore) -> Self {
        RecordingBackend {
            inner,
            store: std::sync::Mutex::new(store),
        }
    }

    pub fn into_store(self) -> TranscriptStore {
        self.store.into_inner().expect("store lock")
    }
}

impl<B: ChatBackend> ChatBackend for RecordingBackend<B> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        let response = self.inner.complete(request)?;
        self.store
            .lock()
            .expect("store lock")
            .record(request, &response)?;
        Ok(response)
    }
}

/// Closure-driven backend for tests and fixture generation.
pub struct FnBackend<F> {
    f: F,
}

impl<F> FnBackend<F>
where
    F: Fn(&ChatRequest) -> Result<String, BackendError>,
{
    pub fn new(f: F) -> Self {
        FnBackend { f }
    }
}

impl<F> ChatBackend for FnBackend<F>
where
    F: Fn(&ChatRequest) -> Result<String, BackendError>,
{
    fn name(&self) -> &str {
        "scripted"
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        (self.f)(request).map(|text| ChatResponse { text })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req() -> ChatRequest {
        ChatRequest::new("spec_analyzer", "m1", "sys".into(), "user text".into())
    }

    #[test]
    fn request_key_is_stable_and_crlf_insensitive() {
        let a = req();
        let mut b = req();
        assert_eq!(a.request_key(), b.request_key());
        b.user = "user\r\ntext".into();
        let mut c = req();
        c.user = "user\ntext".into();
        assert_eq!(b.request_key(), c.request_key());
        assert_ne!(a.request_key(), b.request_key());
        assert_eq!(a.request_key().len(), 64);
    }

    #[test]
    fn replay_miss_reports_key_and_stage() {
        let backend = ReplayBackend::new(TranscriptStore::default());
        let err = backend.complete(&req()).unwrap_err();
        match err {
            BackendError::ReplayMiss { stage, .. } => assert_eq!(stage, "spec_analyzer"),
            other => panic!("unexpected error {other}"),
        }
    }
}
