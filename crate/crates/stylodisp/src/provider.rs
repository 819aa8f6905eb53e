//! Remote provider plumbing shared by the generation and embedding clients:
//! error taxonomy, jittered exponential backoff, and blocking HTTP clients
//! for OpenAI-compatible chat-completion and embedding endpoints.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ProviderError {
    #[error("rate limited: {0}")]
    RateLimit(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("provider protocol error: {0}")]
    Protocol(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("input rejected by provider: {0}")]
    InputRejected(String),
}

impl ProviderError {
    /// Transient failures are worth retrying; auth and input errors are not.
    pub fn is_retryable(&self) -> bool {
        matches!(self, ProviderError::RateLimit(_) | ProviderError::Transport(_))
    }
}

/// Jittered exponential backoff between retries. The attempt cap itself
/// comes from the caller's retry budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
    pub multiplier: f64,
    /// Fraction of the delay drawn uniformly at random and added on top.
    pub jitter: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { base_delay_ms: 500, max_delay_ms: 30_000, multiplier: 2.0, jitter: 0.2 }
    }
}

impl RetryPolicy {
    /// No sleeping at all; used by tests with scripted providers.
    pub fn immediate() -> Self {
        Self { base_delay_ms: 0, max_delay_ms: 0, multiplier: 1.0, jitter: 0.0 }
    }

    pub fn delay_for_attempt(&self, attempt: u32) -> Duration {
        let base = self.base_delay_ms as f64 * self.multiplier.powi(attempt as i32);
        let capped = base.min(self.max_delay_ms as f64);
        let jittered = capped * (1.0 + self.jitter * rand::random::<f64>());
        Duration::from_millis(jittered as u64)
    }
}

/// Runs `op` up to `budget` times, sleeping per policy between retryable
/// failures. A budget of zero never calls `op`.
pub fn with_retries<T>(
    budget: u32,
    policy: &RetryPolicy,
    mut op: impl FnMut() -> Result<T, ProviderError>,
) -> Result<T, ProviderError> {
    let mut last = ProviderError::Protocol("retry budget is zero".to_string());
    for attempt in 0..budget {
        match op() {
            Ok(v) => return Ok(v),
            Err(e) => {
                let retryable = e.is_retryable();
                last = e;
                if !retryable || attempt + 1 == budget {
                    break;
                }
                let delay = policy.delay_for_attempt(attempt);
                if !delay.is_zero() {
                    std::thread::sleep(delay);
                }
            }
        }
    }
    Err(last)
}

/// Connection details for an OpenAI-compatible HTTP API. The key is read
/// from the named environment variable at call time, never stored.
#[derive(Debug, Clone)]
pub struct HttpProviderConfig {
    pub endpoint: String,
    pub api_key_env: String,
    pub timeout: Duration,
}

impl HttpProviderConfig {
    pub fn new(endpoint: &str, api_key_env: &str) -> Self {
        Self {
            endpoint: endpoint.trim_end_matches('/').to_string(),
            api_key_env: api_key_env.to_string(),
            timeout: Duration::from_secs(120),
        }
    }

    fn api_key(&self) -> Result<String, ProviderError> {
        std::env::var(&self.api_key_env).map_err(|_| {
            ProviderError::Auth(format!("environment variable {} not set", self.api_key_env))
        })
    }

    fn client(&self) -> Result<reqwest::blocking::Client, ProviderError> {
        reqwest::blocking::Client::builder()
            .timeout(self.timeout)
            .build()
            .map_err(|e| ProviderError::Transport(e.to_string()))
    }

    fn post(&self, path: &str, body: serde_json::Value) -> Result<serde_json::Value, ProviderError> {
        let key = self.api_key()?;
        let url = format!("{}{path}", self.endpoint);
        let response = self
            .client()?
            .post(&url)
            .bearer_auth(key)
            .json(&body)
            .send()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        let status = response.status();
        let text = response.text().map_err(|e| ProviderError::Transport(e.to_string()))?;
        if status.as_u16() == 429 {
            return Err(ProviderError::RateLimit(text));
        }
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(ProviderError::Auth(text));
        }
        if status.is_server_error() {
            return Err(ProviderError::Transport(format!("{status}: {text}")));
        }
        if !status.is_success() {
            return Err(ProviderError::InputRejected(format!("{status}: {text}")));
        }
        serde_json::from_str(&text)
            .map_err(|e| ProviderError::Protocol(format!("bad JSON from provider: {e}")))
    }

    /// POST /chat/completions; returns the first choice's message content.
    pub fn chat_complete(
        &self,
        model: &str,
        prompt: &str,
        temperature: f64,
        max_tokens: u32,
    ) -> Result<String, ProviderError> {
        let body = json!({
            "model": model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
            "max_tokens": max_tokens,
        });
        let value = self.post("/chat/completions", body)?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| {
                ProviderError::Protocol("response missing choices[0].message.content".to_string())
            })
    }

    /// POST /embeddings; returns vectors in input order.
    pub fn embed(&self, model: &str, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        let body = json!({ "model": model, "input": texts });
        let value = self.post("/embeddings", body)?;
        let data = value["data"].as_array().ok_or_else(|| {
            ProviderError::Protocol("response missing data array".to_string())
        })?;
        // Providers may reorder; the index field is authoritative.
        let mut out: Vec<Option<Vec<f64>>> = vec![None; texts.len()];
        for item in data {
            let idx = item["index"].as_u64().ok_or_else(|| {
                ProviderError::Protocol("embedding item missing index".to_string())
            })? as usize;
            let vector: Vec<f64> = item["embedding"]
                .as_array()
                .ok_or_else(|| ProviderError::Protocol("embedding item missing vector".into()))?
                .iter()
                .map(|v| v.as_f64().unwrap_or(f64::NAN))
                .collect();
            if idx >= out.len() {
                return Err(ProviderError::Protocol(format!("embedding index {idx} out of range")));
            }
            out[idx] = Some(vector);
        }
        out.into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| ProviderError::Protocol(format!("no embedding for input {i}")))
            })
            .collect()
    }
}
