//! Blocking JSON-over-HTTP client with bounded retries and a concurrency cap.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::provider::{ChatRequest, ChatResponse, Provider};
use super::LlmError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpConfig {
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: String,
    pub max_retries: u32,
    pub initial_backoff_ms: u64,
    pub max_backoff_ms: u64,
    pub max_concurrency: usize,
    pub timeout_secs: u64,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            base_url: "http://localhost:8000/v1".into(),
            model: "gpt-4o-mini".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            max_retries: 3,
            initial_backoff_ms: 500,
            max_backoff_ms: 8_000,
            max_concurrency: 4,
            timeout_secs: 120,
        }
    }
}

/// Counting semaphore on a mutex and condvar.
pub(crate) struct Semaphore {
    permits: Mutex<usize>,
    freed: Condvar,
}

pub(crate) struct Permit<'a>(&'a Semaphore);

impl Semaphore {
    pub fn new(permits: usize) -> Self {
        Semaphore {
            permits: Mutex::new(permits.max(1)),
            freed: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut n = self.permits.lock().expect("semaphore lock");
        while *n == 0 {
            n = self.freed.wait(n).expect("semaphore wait");
        }
        *n -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.permits.lock().expect("semaphore lock") += 1;
        self.0.freed.notify_one();
    }
}

/// Shared transport used by the chat and embedding clients.
pub(crate) struct JsonClient {
    agent: ureq::Agent,
    config: HttpConfig,
    gate: Semaphore,
}

impl JsonClient {
    pub fn new(config: HttpConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .build()
            .into();
        JsonClient {
            agent,
            gate: Semaphore::new(config.max_concurrency),
            config,
        }
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    /// POSTs `body` to `base_url/path`. Transport errors, 429 and 5xx are
    /// retried with exponential backoff; other statuses fail at once.
    /// Returns the parsed body and the number of retries used.
    pub fn post(&self, path: &str, body: &serde_json::Value) -> Result<(serde_json::Value, u32), LlmError> {
        let _permit = self.gate.acquire();
        let url = format!("{}/{}", self.config.base_url.trim_end_matches('/'), path);
        let key = std::env::var(&self.config.api_key_env).ok();
        let mut backoff = self.config.initial_backoff_ms;
        let mut retries = 0;
        loop {
            let mut req = self.agent.post(&url).header("Content-Type", "application/json");
            if let Some(k) = &key {
                req = req.header("Authorization", &format!("Bearer {k}"));
            }
            let failure = match req.send_json(body) {
                Ok(mut resp) => {
                    let status = resp.status().as_u16();
                    if (200..300).contains(&status) {
                        return resp
                            .body_mut()
                            .read_json::<serde_json::Value>()
                            .map(|v| (v, retries))
                            .map_err(|e| LlmError::Provider {
                                message: format!("{url}: unreadable body: {e}"),
                                retries,
                            });
                    }
                    let text = resp.body_mut().read_to_string().unwrap_or_default();
                    let message = format!("{url}: HTTP {status}: {}", text.trim());
                    if status != 429 && status < 500 {
                        return Err(LlmError::Provider { message, retries });
                    }
                    message
                }
                Err(e) => format!("{url}: {e}"),
            };
            if retries >= self.config.max_retries {
                return Err(LlmError::Provider {
                    message: format!("gave up after {retries} retries: {failure}"),
                    retries,
                });
            }
            tracing::warn!(retry = retries + 1, %failure, "retrying request");
            std::thread::sleep(Duration::from_millis(backoff));
            backoff = (backoff * 2).min(self.config.max_backoff_ms);
            retries += 1;
        }
    }
}

/// Chat-completions client speaking the common `/chat/completions` shape.
pub struct HttpProvider {
    client: JsonClient,
}

impl HttpProvider {
    pub fn new(config: HttpConfig) -> Self {
        HttpProvider {
            client: JsonClient::new(config),
        }
    }
}

impl Provider for HttpProvider {
    fn name(&self) -> &str {
        "http"
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let body = serde_json::json!({
            "model": self.client.config().model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
            "temperature": request.sampling.temperature,
            "top_p": request.sampling.top_p,
            "max_tokens": request.sampling.max_tokens,
        });
        let (value, retries) = self.client.post("chat/completions", &body)?;
        let text = value
            .pointer("/choices/0/message/content")
            .and_then(|c| c.as_str())
            .ok_or_else(|| LlmError::Malformed {
                expected: "a chat completion with choices[0].message.content",
                raw: value.to_string(),
            })?;
        Ok(ChatResponse {
            text: text.to_string(),
            provider: "http".into(),
            model: value
                .get("model")
                .and_then(|m| m.as_str())
                .map(str::to_string)
                .or_else(|| Some(self.client.config().model.clone())),
            retries,
        })
    }
}
