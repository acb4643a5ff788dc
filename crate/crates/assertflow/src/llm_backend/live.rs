//! HTTP chat-completions backend.
//!
//! Configured entirely through the environment so credentials never live in
//! benchmark directories:
//!
//! - `ASSERTFLOW_API_URL` — completions endpoint (required)
//! - `ASSERTFLOW_API_KEY` — bearer token (optional, sent when present)
//! - `ASSERTFLOW_MODEL`   — model name (required)
//!
//! The wire format is the common chat-completions shape: a `messages` array
//! in, `choices[0].message.content` out.

use serde::Deserialize;
use serde_json::json;

use super::{BackendError, ChatBackend, ChatRequest, ChatResponse};

pub struct LiveBackend {
    url: String,
    api_key: Option<String>,
    model: String,
    client: reqwest::blocking::Client,
}

impl LiveBackend {
    pub fn from_env() -> Result<Self, BackendError> {
        let url = std::env::var("ASSERTFLOW_API_URL")
            .map_err(|_| BackendError::Live("ASSERTFLOW_API_URL is not set".to_string()))?;
        let model = std::env::var("ASSERTFLOW_MODEL")
            .map_err(|_| BackendError::Live("ASSERTFLOW_MODEL is not set".to_string()))?;
        let api_key = std::env::var("ASSERTFLOW_API_KEY").ok();
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(120))
            .build()
            .map_err(|e| BackendError::Live(e.to_string()))?;
        Ok(LiveBackend {
            url,
            api_key,
            model,
            client,
        })
    }

    pub fn model(&self) -> &str {
        &self.model
    }
}

#[derive(Deserialize)]
struct Completion {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: String,
}

impl ChatBackend for LiveBackend {
    fn name(&self) -> &str {
        "live"
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        let body = json!({
            "model": self.model,
            "temperature": request.temperature,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
        });
        let mut builder = self.client.post(&self.url).json(&body);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder
            .send()
            .map_err(|e| BackendError::Live(format!("request failed: {e}")))?;
        let status = response.status();
        if !status.is_success() {
            let text = response.text().unwrap_or_default();
            return Err(BackendError::Live(format!(
                "endpoint returned {status}: {text}"
            )));
        }
        let completion: Completion = response
            .json()
            .map_err(|e| BackendError::Live(format!("unparseable response body: {e}")))?;
        let text = completion
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| BackendError::Live("response had no choices".to_string()))?;
        Ok(ChatResponse { text })
    }
}
