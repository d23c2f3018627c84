//! Chat-completion backends: an OpenAI-compatible HTTP client with retries
//! and a deterministic mock keyed by prompt digest.
//!
//! The HTTP token is read from the environment variable named in the config
//! at request time and never stored, logged or serialized.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const DEFAULT_TIMEOUT_MS: u64 = 30_000;
pub const DEFAULT_MAX_RETRIES: u32 = 3;
pub const DEFAULT_BACKOFF_MS: u64 = 500;
pub const DEFAULT_MAX_TOKENS: u32 = 512;
pub const DEFAULT_MODEL: &str = "mock";
/// Characters of a provider error body kept in the error message.
const BODY_EXCERPT: usize = 200;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("invalid request: {0}")]
    Request(String),
    #[error("backend configuration: {0}")]
    Config(String),
    #[error("transport error after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("provider returned status {status} after {attempts} attempts: {body}")]
    Provider { status: u16, attempts: u32, body: String },
    #[error("malformed provider response: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub system_text: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub model: String,
}

impl ChatRequest {
    /// A single user message at temperature 0.
    pub fn user(system_text: &str, text: &str, model: &str) -> ChatRequest {
        ChatRequest {
            system_text: system_text.to_string(),
            messages: vec![ChatMessage { role: Role::User, content: text.to_string() }],
            temperature: 0.0,
            max_tokens: DEFAULT_MAX_TOKENS,
            model: model.to_string(),
        }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if !self.messages.iter().any(|m| m.role == Role::User) {
            return Err(GatewayError::Request("at least one user message is required".into()));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(GatewayError::Request(format!("temperature {} must be >= 0", self.temperature)));
        }
        if self.max_tokens == 0 {
            return Err(GatewayError::Request("max_tokens must be positive".into()));
        }
        Ok(())
    }

    /// Wire messages with the system text first when present.
    pub fn wire_messages(&self) -> Vec<ChatMessage> {
        let system = (!self.system_text.is_empty())
            .then(|| ChatMessage { role: Role::System, content: self.system_text.clone() });
        system.into_iter().chain(self.messages.iter().cloned()).collect()
    }

    /// SHA-256 hex of each wire message as `role:content\n`, concatenated.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for m in self.wire_messages() {
            h.update(m.role.name().as_bytes());
            h.update(b":");
            h.update(m.content.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    #[default]
    Mock,
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "http" => Ok(BackendKind::Http),
            "mock" => Ok(BackendKind::Mock),
            _ => Err(format!("unknown backend `{s}` (expected http or mock)")),
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Http => "http",
            BackendKind::Mock => "mock",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub endpoint: Option<String>,
    /// Name of the environment variable holding the bearer token.
    pub token_env: Option<String>,
    pub model: String,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub backoff_ms: u64,
    /// Prompt digest to canned completion.
    pub mock_table: BTreeMap<String, String>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Mock,
            endpoint: None,
            token_env: None,
            model: DEFAULT_MODEL.to_string(),
            timeout_ms: DEFAULT_TIMEOUT_MS,
            max_retries: DEFAULT_MAX_RETRIES,
            backoff_ms: DEFAULT_BACKOFF_MS,
            mock_table: BTreeMap::new(),
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.kind == BackendKind::Http {
            if self.endpoint.as_deref().is_none_or(str::is_empty) {
                return Err(GatewayError::Config("http backend requires an endpoint".into()));
            }
            if self.token_env.as_deref().is_none_or(str::is_empty) {
                return Err(GatewayError::Config("http backend requires a token environment variable".into()));
            }
        }
        Ok(())
    }
}

pub struct HttpBackend {
    endpoint: String,
    token_env: String,
    max_retries: u32,
    backoff: Duration,
    agent: ureq::Agent,
}

impl fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpBackend")
            .field("endpoint", &self.endpoint)
            .field("token_env", &self.token_env)
            .field("token", &"<redacted>")
            .field("max_retries", &self.max_retries)
            .finish()
    }
}

enum Attempt {
    Done(String),
    Retry(GatewayError),
    Fail(GatewayError),
}

fn excerpt(s: &str) -> String {
    s.chars().take(BODY_EXCERPT).collect()
}

impl HttpBackend {
    fn url(&self) -> String {
        format!("{}/chat/completions", self.endpoint.trim_end_matches('/'))
    }

    fn attempt(&self, body: &str, token: &str, attempts: u32) -> Attempt {
        let sent = self
            .agent
            .post(&self.url())
            .header("Content-Type", "application/json")
            .header("Authorization", &format!("Bearer {token}"))
            .send(body);
        let mut resp = match sent {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(GatewayError::Transport { attempts, message: e.to_string() }),
        };
        let status = resp.status().as_u16();
        let text = match resp.body_mut().read_to_string() {
            Ok(t) => t,
            Err(e) => return Attempt::Retry(GatewayError::Transport { attempts, message: e.to_string() }),
        };
        log::debug!("chat completion attempt {attempts}: status {status}");
        if (200..300).contains(&status) {
            return match parse_completion(&text) {
                Ok(t) => Attempt::Done(t),
                Err(e) => Attempt::Fail(e),
            };
        }
        let err = GatewayError::Provider { status, attempts, body: excerpt(&text) };
        if status == 429 || status >= 500 {
            Attempt::Retry(err)
        } else {
            Attempt::Fail(err)
        }
    }

    pub fn complete(&self, req: &ChatRequest) -> Result<String, GatewayError> {
        let token = std::env::var(&self.token_env)
            .ok()
            .filter(|t| !t.is_empty())
            .ok_or_else(|| GatewayError::Config(format!("environment variable {} is not set", self.token_env)))?;
        let messages: Vec<Value> =
            req.wire_messages().iter().map(|m| json!({"role": m.role.name(), "content": m.content})).collect();
        let body = json!({
            "model": req.model,
            "messages": messages,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        })
        .to_string();
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.attempt(&body, &token, attempt) {
                Attempt::Done(t) => return Ok(t),
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(e) if attempt > self.max_retries => return Err(e),
                Attempt::Retry(e) => {
                    let wait = self.backoff * 2u32.saturating_pow(attempt - 1);
                    log::warn!("chat completion attempt {attempt} failed ({e}); retrying in {wait:?}");
                    std::thread::sleep(wait);
                }
            }
        }
    }
}

fn parse_completion(text: &str) -> Result<String, GatewayError> {
    let v: Value = serde_json::from_str(text).map_err(|e| GatewayError::Protocol(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| GatewayError::Protocol("missing choices[0].message.content".into()))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MockBackend {
    pub table: BTreeMap<String, String>,
}

impl MockBackend {
    /// The canned text for the request digest, else `[mock:<12 hex>]`.
    pub fn complete(&self, req: &ChatRequest) -> String {
        let d = req.digest();
        self.table.get(&d).cloned().unwrap_or_else(|| format!("[mock:{}]", &d[..12]))
    }
}

#[derive(Debug)]
pub enum Backend {
    Http(HttpBackend),
    Mock(MockBackend),
}

impl Backend {
    pub fn from_config(cfg: &BackendConfig) -> Result<Backend, GatewayError> {
        cfg.validate()?;
        Ok(match cfg.kind {
            BackendKind::Mock => Backend::Mock(MockBackend { table: cfg.mock_table.clone() }),
            BackendKind::Http => {
                let agent: ureq::Agent = ureq::Agent::config_builder()
                    .timeout_global(Some(Duration::from_millis(cfg.timeout_ms)))
                    .http_status_as_error(false)
                    .build()
                    .into();
                Backend::Http(HttpBackend {
                    endpoint: cfg.endpoint.clone().unwrap_or_default(),
                    token_env: cfg.token_env.clone().unwrap_or_default(),
                    max_retries: cfg.max_retries,
                    backoff: Duration::from_millis(cfg.backoff_ms),
                    agent,
                })
            }
        })
    }

    pub fn complete(&self, req: &ChatRequest) -> Result<String, GatewayError> {
        req.validate()?;
        match self {
            Backend::Http(b) => b.complete(req),
            Backend::Mock(m) => Ok(m.complete(req)),
        }
    }
}
