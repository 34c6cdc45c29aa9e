//! Chat-completion client: HTTP transport, retry with exponential backoff,
//! request-rate pacing and a content-addressed response cache.
//!
//! The wire format is a chat-completion POST
//! `{"model", "temperature", "messages": [{"role": "user", "content": ...}]}`;
//! the reply text is read from the first choice's message content and
//! provider-specific extra fields are ignored.

use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::{LlmError, LlmExchange};

/// Endpoint, decoding and pacing settings for a live client.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientConfig {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub token_budget: usize,
    pub response_reserve: usize,
    pub max_retries: u32,
    pub requests_per_minute: u32,
    pub initial_backoff_ms: u64,
    /// Name of the environment variable holding the API key. The key itself
    /// is read per request and never stored or logged.
    pub api_key_env: String,
}

impl Default for ClientConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-3.5-turbo".into(),
            temperature: 0.0,
            token_budget: 4096,
            response_reserve: 1000,
            max_retries: 3,
            requests_per_minute: 60,
            initial_backoff_ms: 500,
            api_key_env: "OPENAI_API_KEY".into(),
        }
    }
}

/// One completion request; `raw_user` and `candidates` exist so offline
/// stubs can answer without parsing the prompt back.
#[derive(Debug, Clone)]
pub struct ChatRequest<'a> {
    pub raw_user: &'a str,
    pub prompt: &'a str,
    pub candidates: Option<&'a [String]>,
}

pub trait ChatClient {
    fn model_id(&self) -> &str;
    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, LlmError>;
}

/// Raw HTTP send, separated from retry/caching so failures can be scripted
/// in tests.
pub trait Transport: Send + Sync {
    fn send(
        &self,
        endpoint: &str,
        body: &serde_json::Value,
        api_key: Option<&str>,
    ) -> Result<TransportResponse, LlmError>;
}

#[derive(Debug, Clone)]
pub struct TransportResponse {
    pub status: u16,
    pub body: String,
}

/// Live transport over HTTPS.
pub struct UreqTransport;

impl Transport for UreqTransport {
    fn send(
        &self,
        endpoint: &str,
        body: &serde_json::Value,
        api_key: Option<&str>,
    ) -> Result<TransportResponse, LlmError> {
        let mut request = ureq::post(endpoint).set("Content-Type", "application/json");
        if let Some(key) = api_key {
            request = request.set("Authorization", &format!("Bearer {key}"));
        }
        match request.send_string(&body.to_string()) {
            Ok(response) => {
                let status = response.status();
                let body = response
                    .into_string()
                    .map_err(|e| LlmError::Transport(e.to_string()))?;
                Ok(TransportResponse { status, body })
            }
            Err(ureq::Error::Status(status, response)) => {
                let body = response.into_string().unwrap_or_default();
                Ok(TransportResponse { status, body })
            }
            Err(e) => Err(LlmError::Transport(e.to_string())),
        }
    }
}

/// One JSON file per exchange, keyed by SHA-256 of model, temperature and
/// prompt. Concurrent readers are safe; writes go through a temp file and
/// an atomic rename.
#[derive(Debug, Clone)]
pub struct ExchangeCache {
    dir: PathBuf,
}

impl ExchangeCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(model: &str, temperature: f64, prompt: &str) -> String {
        let mut hasher = Sha256::new();
        hasher.update(model.as_bytes());
        hasher.update([0]);
        hasher.update(temperature.to_le_bytes());
        hasher.update([0]);
        hasher.update(prompt.as_bytes());
        hex::encode(hasher.finalize())
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn load(&self, key: &str) -> Option<LlmExchange> {
        let raw = std::fs::read_to_string(self.path_for(key)).ok()?;
        serde_json::from_str(&raw).ok()
    }

    pub fn store(&self, exchange: &LlmExchange) -> Result<(), LlmError> {
        let path = self.path_for(&exchange.cache_key);
        let wrap = |source: std::io::Error| LlmError::Cache {
            path: path.display().to_string(),
            source,
        };
        std::fs::create_dir_all(&self.dir).map_err(wrap)?;
        let tmp = self.dir.join(format!("{}.tmp", exchange.cache_key));
        let body = serde_json::to_string_pretty(exchange).expect("exchange serializes");
        std::fs::write(&tmp, body).map_err(wrap)?;
        std::fs::rename(&tmp, &path).map_err(wrap)?;
        Ok(())
    }
}

#[derive(Deserialize)]
struct ChatCompletionReply {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: String,
}

/// Live chat-completion client. Responses are served from the cache when
/// the (model, temperature, prompt) key is warm; network requests honor the
/// rate limit and retry transient failures with exponential backoff.
pub struct HttpChatClient {
    config: ClientConfig,
    transport: Box<dyn Transport>,
    cache: Option<ExchangeCache>,
    last_request: Mutex<Option<Instant>>,
}

impl HttpChatClient {
    pub fn new(config: ClientConfig, cache: Option<ExchangeCache>) -> Self {
        Self::with_transport(config, Box::new(UreqTransport), cache)
    }

    pub fn with_transport(
        config: ClientConfig,
        transport: Box<dyn Transport>,
        cache: Option<ExchangeCache>,
    ) -> Self {
        Self {
            config,
            transport,
            cache,
            last_request: Mutex::new(None),
        }
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    fn pace(&self) {
        if self.config.requests_per_minute == 0 {
            return;
        }
        let min_gap =
            Duration::from_secs_f64(60.0 / f64::from(self.config.requests_per_minute));
        let mut last = self.last_request.lock().expect("pacing lock");
        if let Some(at) = *last {
            let elapsed = at.elapsed();
            if elapsed < min_gap {
                std::thread::sleep(min_gap - elapsed);
            }
        }
        *last = Some(Instant::now());
    }

    fn backoff(&self, attempt: u32) {
        let ms = self.config.initial_backoff_ms.saturating_mul(1u64 << attempt.min(16));
        if ms > 0 {
            std::thread::sleep(Duration::from_millis(ms));
        }
    }

    /// True for failures worth retrying: rate limiting and server errors.
    /// Budget-exceeded and other client errors are permanent.
    fn is_transient(status: u16) -> bool {
        status == 429 || status >= 500
    }

    fn extract_content(body: &str) -> Result<String, LlmError> {
        let reply: ChatCompletionReply = serde_json::from_str(body)
            .map_err(|e| LlmError::MalformedResponse(e.to_string()))?;
        reply
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| LlmError::MalformedResponse("no choices in reply".into()))
    }
}

impl ChatClient for HttpChatClient {
    fn model_id(&self) -> &str {
        &self.config.model
    }

    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, LlmError> {
        let key = ExchangeCache::key(&self.config.model, self.config.temperature, request.prompt);
        if let Some(cache) = &self.cache {
            if let Some(exchange) = cache.load(&key) {
                return Ok(exchange.raw_response);
            }
        }
        let api_key = std::env::var(&self.config.api_key_env).ok();
        let body = serde_json::json!({
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [{"role": "user", "content": request.prompt}],
        });
        let mut last_error: Option<LlmError> = None;
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                self.backoff(attempt - 1);
            }
            self.pace();
            match self.transport.send(&self.config.endpoint, &body, api_key.as_deref()) {
                Ok(TransportResponse { status, body }) if status == 200 => {
                    let content = Self::extract_content(&body)?;
                    if let Some(cache) = &self.cache {
                        cache.store(&LlmExchange {
                            user_id: request.raw_user.to_string(),
                            prompt: request.prompt.to_string(),
                            raw_response: content.clone(),
                            parsed_titles: Vec::new(),
                            matched: Vec::new(),
                            unmatched: Vec::new(),
                            duplicates: Vec::new(),
                            off_list: Vec::new(),
                            model_id: self.config.model.clone(),
                            cache_key: key.clone(),
                        })?;
                    }
                    return Ok(content);
                }
                Ok(TransportResponse { status, body }) => {
                    let retryable = Self::is_transient(status);
                    let error = LlmError::Endpoint {
                        status,
                        message: truncate_message(&body),
                        retryable,
                    };
                    if !retryable {
                        return Err(error);
                    }
                    last_error = Some(error);
                }
                Err(e) => {
                    last_error = Some(e);
                }
            }
        }
        Err(last_error.unwrap_or_else(|| LlmError::Transport("no attempts made".into())))
    }
}

fn truncate_message(body: &str) -> String {
    const LIMIT: usize = 300;
    if body.chars().count() <= LIMIT {
        body.to_string()
    } else {
        let cut: String = body.chars().take(LIMIT).collect();
        format!("{cut}…")
    }
}
