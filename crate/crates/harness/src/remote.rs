//! Chat-completions adapter. Everything provider-shaped lives here.

use crate::bundle::TrialBundle;
use crate::subject::{RequestedCall, Reply, Subject, SubjectError};
use crate::tools::{raw_schema, tool_schemas};
use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use serde_json::{json, Value};
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant};
use vpt_core::transcript::{Role, Transcript};

fn default_temperature() -> f64 {
    1.0
}
fn default_top_p() -> f64 {
    1.0
}
fn default_timeout() -> u64 {
    120
}
fn default_attempts() -> u32 {
    5
}
fn default_backoff() -> u64 {
    1000
}

/// Remote subject configuration, read from a JSON file. The credential is
/// named by environment variable, never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteConfig {
    /// Full URL of the chat-completions endpoint.
    pub endpoint: String,
    pub model: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_top_p")]
    pub top_p: f64,
    #[serde(default)]
    pub frequency_penalty: f64,
    #[serde(default)]
    pub presence_penalty: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning_effort: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    /// First retry delay; doubles on each further attempt.
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requests_per_minute: Option<f64>,
    /// Log request and response bodies, credentials redacted, to stderr.
    #[serde(default)]
    pub debug: bool,
}

impl RemoteConfig {
    pub fn new(endpoint: &str, model: &str) -> Self {
        RemoteConfig {
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            temperature: default_temperature(),
            top_p: default_top_p(),
            frequency_penalty: 0.0,
            presence_penalty: 0.0,
            reasoning_effort: None,
            api_key_env: None,
            timeout_secs: default_timeout(),
            max_attempts: default_attempts(),
            backoff_ms: default_backoff(),
            requests_per_minute: None,
            debug: false,
        }
    }

    pub fn load(path: &Path) -> Result<Self, SubjectError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SubjectError::Setup(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| SubjectError::Setup(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), SubjectError> {
        let bad = |m: String| Err(SubjectError::Setup(m));
        if !(self.endpoint.starts_with("http://") || self.endpoint.starts_with("https://")) {
            return bad(format!("endpoint {:?} is not an http(s) URL", self.endpoint));
        }
        if self.model.trim().is_empty() {
            return bad("model name is empty".into());
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be at least 1".into());
        }
        if let Some(rpm) = self.requests_per_minute {
            if !(rpm > 0.0) {
                return bad("requests_per_minute must be positive".into());
            }
        }
        Ok(())
    }
}

/// Spaces requests evenly to honour a requests-per-minute budget.
#[derive(Debug)]
struct RateLimiter {
    interval: Duration,
    next: Mutex<Instant>,
}

impl RateLimiter {
    fn new(rpm: f64) -> Self {
        RateLimiter { interval: Duration::from_secs_f64(60.0 / rpm), next: Mutex::new(Instant::now()) }
    }

    fn acquire(&self) {
        let wait = {
            let mut next = self.next.lock().expect("rate limiter lock");
            let now = Instant::now();
            let slot = (*next).max(now);
            *next = slot + self.interval;
            slot - now
        };
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
    }
}

pub struct RemoteSubject {
    config: RemoteConfig,
    api_key: Option<String>,
    agent: ureq::Agent,
    limiter: Option<RateLimiter>,
}

enum Attempt {
    Retry(String),
    Fatal(String),
}

impl RemoteSubject {
    /// Fails before any request if the config is invalid or the named
    /// credential variable is unset.
    pub fn new(config: RemoteConfig) -> Result<Self, SubjectError> {
        config.validate()?;
        let api_key = match &config.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                SubjectError::Setup(format!("environment variable {var} is not set"))
            })?),
            None => None,
        };
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs(config.timeout_secs)).build();
        let limiter = config.requests_per_minute.map(RateLimiter::new);
        Ok(RemoteSubject { config, api_key, agent, limiter })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn redact(&self, text: &str) -> String {
        let mut out = text.to_string();
        if let Some(key) = self.api_key.as_deref().filter(|k| !k.is_empty()) {
            out = out.replace(key, "[REDACTED]");
        }
        // Keep logs readable: drop inline image payloads.
        while let Some(start) = out.find("base64,") {
            let body = start + "base64,".len();
            let end = out[body..].find('"').map_or(out.len(), |e| body + e);
            out.replace_range(start..end, "base64:[elided]");
        }
        out
    }

    fn image_part(&self, bundle: &TrialBundle) -> Result<Option<Value>, SubjectError> {
        let Some(path) = &bundle.image_path else { return Ok(None) };
        let bytes = std::fs::read(path).map_err(|e| SubjectError::Setup(format!("{}: {e}", path.display())))?;
        let data = base64::engine::general_purpose::STANDARD.encode(bytes);
        Ok(Some(json!({ "type": "image_url", "image_url": { "url": format!("data:image/png;base64,{data}") } })))
    }

    /// Request body for the conversation so far.
    pub fn request_body(&self, bundle: &TrialBundle, transcript: &Transcript) -> Result<String, SubjectError> {
        let mut messages = Vec::new();
        let mut calls = transcript.tool_calls.iter().peekable();
        let mut turn = 0;
        for m in &transcript.messages {
            let v = match m.role {
                Role::System => json!({ "role": "system", "content": m.text }),
                Role::User if m.image.is_some() => match self.image_part(bundle)? {
                    Some(part) => json!({ "role": "user", "content": [part] }),
                    None => continue,
                },
                Role::User => json!({ "role": "user", "content": m.text }),
                Role::Assistant => {
                    turn += 1;
                    let mine: Vec<Value> = std::iter::from_fn(|| calls.next_if(|c| c.turn == turn))
                        .map(|c| {
                            json!({
                                "id": c.id,
                                "type": "function",
                                "function": { "name": c.name, "arguments": c.arguments.to_string() },
                            })
                        })
                        .collect();
                    let mut v = json!({ "role": "assistant", "content": m.text });
                    if !mine.is_empty() {
                        v["tool_calls"] = Value::Array(mine);
                    }
                    v
                }
                Role::Tool => json!({ "role": "tool", "tool_call_id": m.tool_call_id, "content": m.text }),
            };
            messages.push(v);
        }

        #[derive(Serialize)]
        struct Tool {
            #[serde(rename = "type")]
            kind: &'static str,
            function: Box<RawValue>,
        }
        #[derive(Serialize)]
        struct Body<'a> {
            model: &'a str,
            messages: Vec<Value>,
            tools: Vec<Tool>,
            temperature: f64,
            top_p: f64,
            frequency_penalty: f64,
            presence_penalty: f64,
            #[serde(skip_serializing_if = "Option::is_none")]
            reasoning_effort: Option<&'a str>,
        }
        let c = &self.config;
        let body = Body {
            model: &c.model,
            messages,
            tools: tool_schemas().iter().map(|s| Tool { kind: "function", function: raw_schema(s) }).collect(),
            temperature: c.temperature,
            top_p: c.top_p,
            frequency_penalty: c.frequency_penalty,
            presence_penalty: c.presence_penalty,
            reasoning_effort: c.reasoning_effort.as_deref(),
        };
        Ok(serde_json::to_string(&body).expect("request serializes"))
    }

    fn attempt(&self, body: &str) -> Result<String, Attempt> {
        if let Some(l) = &self.limiter {
            l.acquire();
        }
        let mut req = self.agent.post(&self.config.endpoint).set("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        match req.send_string(body) {
            Ok(resp) => resp.into_string().map_err(|e| Attempt::Retry(format!("reading response: {e}"))),
            Err(ureq::Error::Status(code, resp)) => {
                let text = resp.into_string().unwrap_or_default();
                let msg = format!("HTTP {code}: {}", self.redact(&text));
                if code == 429 || code >= 500 {
                    Err(Attempt::Retry(msg))
                } else {
                    Err(Attempt::Fatal(msg))
                }
            }
            Err(ureq::Error::Transport(t)) => Err(Attempt::Retry(self.redact(&t.to_string()))),
        }
    }

    /// Posts `body` with exponential backoff on transport and rate-limit
    /// failures.
    pub fn post(&self, body: &str) -> Result<String, SubjectError> {
        if self.config.debug {
            eprintln!("[remote] request: {}", self.redact(body));
        }
        let mut delay = Duration::from_millis(self.config.backoff_ms);
        let mut last = String::new();
        for attempt in 1..=self.config.max_attempts {
            match self.attempt(body) {
                Ok(text) => {
                    if self.config.debug {
                        eprintln!("[remote] response: {}", self.redact(&text));
                    }
                    return Ok(text);
                }
                Err(Attempt::Fatal(m)) => return Err(SubjectError::Transport(m)),
                Err(Attempt::Retry(m)) => {
                    if self.config.debug {
                        eprintln!("[remote] attempt {attempt} failed: {m}");
                    }
                    last = m;
                    if attempt < self.config.max_attempts {
                        std::thread::sleep(delay);
                        delay *= 2;
                    }
                }
            }
        }
        Err(SubjectError::Transport(format!("{} attempts failed; last: {last}", self.config.max_attempts)))
    }
}

/// Parses the first choice of a chat-completions response.
pub fn parse_reply(text: &str) -> Result<Reply, SubjectError> {
    let v: Value = serde_json::from_str(text).map_err(|e| SubjectError::Malformed(format!("response is not JSON: {e}")))?;
    let msg = v
        .pointer("/choices/0/message")
        .ok_or_else(|| SubjectError::Malformed("response has no choices[0].message".into()))?;
    let content = msg.get("content").and_then(Value::as_str).unwrap_or_default().to_string();
    let mut tool_calls = Vec::new();
    if let Some(calls) = msg.get("tool_calls").and_then(Value::as_array) {
        for (i, c) in calls.iter().enumerate() {
            let name = c
                .pointer("/function/name")
                .and_then(Value::as_str)
                .ok_or_else(|| SubjectError::Malformed(format!("tool call {i} has no function name")))?;
            let raw = c.pointer("/function/arguments").cloned().unwrap_or(Value::String("{}".into()));
            let arguments = match raw {
                Value::String(s) => serde_json::from_str(&s)
                    .map_err(|e| SubjectError::Malformed(format!("arguments of {name} are not JSON: {e}")))?,
                other => other,
            };
            let id = c.get("id").and_then(Value::as_str).map_or_else(|| format!("call_{i}"), str::to_string);
            tool_calls.push(RequestedCall { id, name: name.to_string(), arguments });
        }
    }
    Ok(Reply { text: content, tool_calls })
}

impl Subject for RemoteSubject {
    fn id(&self) -> String {
        self.config.model.clone()
    }

    fn reply(&self, bundle: &TrialBundle, transcript: &Transcript) -> Result<Reply, SubjectError> {
        let body = self.request_body(bundle, transcript)?;
        parse_reply(&self.post(&body)?)
    }
}
