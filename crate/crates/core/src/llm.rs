//! Chat-completion client that asks a generative model for triples with a
//! fixed few-shot instruction, and turns its JSON answer into extractions.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{canonical_element, Dialogue, Perspective, Triple, PLACEHOLDER};
use crate::extraction::{perspective_labels, Extraction, Source, SpeakerContext, UtteranceType};
use crate::parallel::map_ordered;

/// System instruction sent with every request, stored byte for byte.
pub const EXTRACTION_PROMPT: &str = include_str!("../data/extraction_prompt.txt");

/// SHA-256 of [`EXTRACTION_PROMPT`].
pub const PROMPT_SHA256: &str = "4aa0300792042815ac35a509000545a0484e644227c27f54fa21431816070444";

pub const ENV_ENDPOINT: &str = "LLM_ENDPOINT";
pub const ENV_API_KEY: &str = "LLM_API_KEY";
pub const ENV_MODEL: &str = "LLM_MODEL";

pub fn prompt_checksum() -> String {
    hex::encode(Sha256::digest(EXTRACTION_PROMPT.as_bytes()))
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("utterance is empty")]
    EmptyUtterance,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("request {request_id}: timed out")]
    Timeout { request_id: String },
    #[error("request {request_id}: HTTP {status}: {body}")]
    Http { request_id: String, status: u16, body: String },
    #[error("request {request_id}: transport error: {message}")]
    Transport { request_id: String, message: String },
    #[error("request {request_id}: gave up after {attempts} attempts; last error: {last}")]
    RetriesExhausted {
        request_id: String,
        attempts: u32,
        last: Box<LlmError>,
    },
    #[error("request {request_id}: unusable response: {reason}")]
    Malformed { request_id: String, reason: String },
}

impl LlmError {
    fn retryable(&self) -> bool {
        match self {
            LlmError::Timeout { .. } | LlmError::Transport { .. } => true,
            LlmError::Http { status, .. } => *status >= 500 || *status == 429,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmConfig {
    /// Full URL of the chat-completion route.
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: String,
    pub timeout_secs: u64,
    pub max_retries: u32,
    pub temperature: f64,
    /// First backoff delay; doubled after every failed attempt.
    pub backoff_ms: u64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://localhost:11434/v1/chat/completions".into(),
            model: "llama3.2".into(),
            api_key_env: ENV_API_KEY.into(),
            timeout_secs: 60,
            max_retries: 2,
            temperature: 0.0,
            backoff_ms: 500,
        }
    }
}

impl LlmConfig {
    /// Defaults overridden by `LLM_ENDPOINT` and `LLM_MODEL` when set.
    pub fn from_env() -> Self {
        let mut c = Self::default();
        if let Ok(e) = std::env::var(ENV_ENDPOINT) {
            c.endpoint = e;
        }
        if let Ok(m) = std::env::var(ENV_MODEL) {
            c.model = m;
        }
        c
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.timeout_secs == 0 {
            return Err(LlmError::Config("timeout must be positive".into()));
        }
        if self.endpoint.trim().is_empty() {
            return Err(LlmError::Config("endpoint is empty".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(LlmError::Config(format!("temperature {} outside [0, 2]", self.temperature)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
}

/// The fixed instruction as system message and the utterance as user message.
pub fn build_messages(utterance: &str) -> Result<Vec<Message>, LlmError> {
    if utterance.trim().is_empty() {
        return Err(LlmError::EmptyUtterance);
    }
    Ok(vec![
        Message {
            role: "system".into(),
            content: EXTRACTION_PROMPT.into(),
        },
        Message {
            role: "user".into(),
            content: utterance.into(),
        },
    ])
}

/// User message for a three-turn window: one `speaker: text` line per turn.
pub fn dialogue_message(d: &Dialogue) -> String {
    d.turns
        .iter()
        .map(|t| format!("{}: {}", t.speaker, t.text))
        .collect::<Vec<_>>()
        .join("\n")
}

/// One element of the answer's `dialogue` array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmRecord {
    #[serde(default)]
    pub sender: String,
    #[serde(default)]
    pub text: String,
    /// Triples as sent; validated by [`to_extractions`].
    #[serde(default)]
    pub triples: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmRawResult {
    pub request_id: String,
    /// Completion text exactly as received.
    pub raw: String,
    pub records: Vec<LlmRecord>,
    pub warnings: Vec<String>,
}

/// Byte range of the first balanced `{...}` object in `text`, skipping
/// braces inside JSON strings.
pub fn first_json_object(text: &str) -> Option<std::ops::Range<usize>> {
    let start = text.find('{')?;
    let mut depth = 0usize;
    let mut in_str = false;
    let mut escaped = false;
    for (i, c) in text[start..].char_indices() {
        if in_str {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_str = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_str = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(start..start + i + 1);
                }
            }
            _ => {}
        }
    }
    None
}

/// Parses a completion. Text around the first JSON object is tolerated and
/// reported as a warning.
pub fn parse_completion(request_id: &str, raw: &str) -> Result<LlmRawResult, LlmError> {
    let malformed = |reason: String| LlmError::Malformed {
        request_id: request_id.to_string(),
        reason,
    };
    let range = first_json_object(raw).ok_or_else(|| malformed("no JSON object found".into()))?;
    let mut warnings = Vec::new();
    if !raw[..range.start].trim().is_empty() || !raw[range.end..].trim().is_empty() {
        warnings.push("text outside the JSON object was ignored".to_string());
    }
    let value: Value = serde_json::from_str(&raw[range]).map_err(|e| malformed(e.to_string()))?;
    let records = match value.get("dialogue") {
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| serde_json::from_value::<LlmRecord>(v.clone()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| malformed(e.to_string()))?,
        Some(_) => return Err(malformed("`dialogue` is not an array".into())),
        None if value.get("triples").is_some() => {
            vec![serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?]
        }
        None => return Err(malformed("missing `dialogue` array".into())),
    };
    Ok(LlmRawResult {
        request_id: request_id.to_string(),
        raw: raw.to_string(),
        records,
        warnings,
    })
}

/// Output of [`to_extractions`]: usable triples plus per-triple problems.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Converted {
    pub extractions: Vec<Extraction>,
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

fn element(v: &Map<String, Value>, key: &str) -> Result<String, String> {
    match v.get(key) {
        Some(Value::String(s)) => Ok(s.trim().to_string()),
        Some(Value::Null) | None => Err(format!("missing `{key}`")),
        Some(other) => Ok(other.to_string()),
    }
}

fn number(v: &Map<String, Value>, key: &str, default: f64, lo: f64, hi: f64, warnings: &mut Vec<String>) -> f64 {
    let x = match v.get(key) {
        Some(Value::Number(n)) => n.as_f64().unwrap_or(default),
        Some(Value::String(s)) => s.trim().parse().unwrap_or(default),
        _ => default,
    };
    if !x.is_finite() {
        warnings.push(format!("`{key}` is not a number; using {default}"));
        return default;
    }
    if x < lo || x > hi {
        let c = x.clamp(lo, hi);
        warnings.push(format!("`{key}` {x} clamped to {c}"));
        return c;
    }
    x
}

fn slot_text(raw: &str, ctx: &SpeakerContext) -> String {
    if raw.is_empty() {
        return PLACEHOLDER.to_string();
    }
    if let Some(label) = ctx.resolve(raw) {
        return label.to_string();
    }
    canonical_element(&raw.split_whitespace().collect::<Vec<_>>().join("-"))
}

/// Converts parsed records into extractions: separators become hyphens,
/// empty subjects or objects become `?`, pronouns resolve through `ctx` and
/// perspective values are clamped into range.
pub fn to_extractions(raw: &LlmRawResult, ctx: &SpeakerContext) -> Converted {
    let mut out = Converted {
        warnings: raw.warnings.clone(),
        ..Converted::default()
    };
    for (ri, record) in raw.records.iter().enumerate() {
        for (ti, t) in record.triples.iter().enumerate() {
            let at = format!("record {ri}, triple {ti}");
            let Some(obj) = t.as_object() else {
                out.errors.push(format!("{at}: not an object"));
                continue;
            };
            let slots = (element(obj, "subject"), element(obj, "predicate"), element(obj, "object"));
            let (s, p, o) = match slots {
                (Ok(s), Ok(p), Ok(o)) if !p.is_empty() => (s, p, o),
                (Ok(_), Ok(_), Ok(_)) => {
                    out.errors.push(format!("{at}: empty `predicate`"));
                    continue;
                }
                (s, p, o) => {
                    let reason = [s.err(), p.err(), o.err()].into_iter().flatten().collect::<Vec<_>>().join(", ");
                    out.errors.push(format!("{at}: {reason}"));
                    continue;
                }
            };
            let mut warnings = Vec::new();
            let certainty = number(obj, "certainty", 1.0, 0.0, 1.0, &mut warnings);
            let polarity = number(obj, "polarity", 1.0, -1.0, 1.0, &mut warnings).round() as i8;
            let sentiment = number(obj, "sentiment", 0.0, -1.0, 1.0, &mut warnings);
            out.warnings.extend(warnings.into_iter().map(|w| format!("{at}: {w}")));
            let perspective = Perspective {
                certainty,
                polarity,
                sentiment,
            };
            let triple = Triple::new(slot_text(&s, ctx), canonical_element(&p.split_whitespace().collect::<Vec<_>>().join("-")).to_lowercase(), slot_text(&o, ctx));
            let utterance_type = if triple.placeholder_count() > 0 {
                UtteranceType::WhQuestion
            } else {
                UtteranceType::Statement
            };
            out.extractions.push(Extraction {
                labels: perspective_labels(&perspective, false),
                triple,
                perspective,
                utterance_type,
                source: Source {
                    id: raw.request_id.clone(),
                    ..Source::default()
                },
            });
        }
    }
    out
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: &'a [Message],
    temperature: f64,
}

fn completion_text(request_id: &str, body: &str) -> Result<String, LlmError> {
    let v: Value = serde_json::from_str(body).map_err(|e| LlmError::Malformed {
        request_id: request_id.into(),
        reason: format!("response body is not JSON: {e}"),
    })?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| LlmError::Malformed {
            request_id: request_id.into(),
            reason: "no `choices[0].message.content`".into(),
        })
}

fn attempt(agent: &ureq::Agent, config: &LlmConfig, request_id: &str, body: &ChatRequest) -> Result<String, LlmError> {
    let mut req = agent
        .post(&config.endpoint)
        .header("X-Request-Id", request_id)
        .header("Content-Type", "application/json");
    if let Ok(key) = std::env::var(&config.api_key_env) {
        req = req.header("Authorization", &format!("Bearer {key}"));
    }
    let payload = serde_json::to_vec(body).expect("request serializes");
    let mut resp = req.send(&payload[..]).map_err(|e| match e {
        ureq::Error::Timeout(_) => LlmError::Timeout {
            request_id: request_id.into(),
        },
        other => LlmError::Transport {
            request_id: request_id.into(),
            message: other.to_string(),
        },
    })?;
    let status = resp.status().as_u16();
    let text = resp.body_mut().read_to_string().map_err(|e| match e {
        ureq::Error::Timeout(_) => LlmError::Timeout {
            request_id: request_id.into(),
        },
        other => LlmError::Transport {
            request_id: request_id.into(),
            message: other.to_string(),
        },
    })?;
    if !(200..300).contains(&status) {
        return Err(LlmError::Http {
            request_id: request_id.into(),
            status,
            body: text,
        });
    }
    completion_text(request_id, &text)
}

/// Requests one completion, retrying timeouts, transport errors and 5xx or
/// 429 answers with exponential backoff.
pub fn call(config: &LlmConfig, messages: &[Message]) -> Result<LlmRawResult, LlmError> {
    config.validate()?;
    let request_id = uuid::Uuid::new_v4().to_string();
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
        .http_status_as_error(false)
        .build()
        .into();
    let body = ChatRequest {
        model: &config.model,
        messages,
        temperature: config.temperature,
    };
    let mut delay = config.backoff_ms;
    let mut attempts = 0;
    loop {
        attempts += 1;
        match attempt(&agent, config, &request_id, &body) {
            Ok(text) => return parse_completion(&request_id, &text),
            Err(e) if e.retryable() => {
                if attempts > config.max_retries {
                    return Err(LlmError::RetriesExhausted {
                        request_id,
                        attempts,
                        last: Box::new(e),
                    });
                }
                std::thread::sleep(Duration::from_millis(delay));
                delay = delay.saturating_mul(2);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Runs [`call`] for every utterance with at most `workers` requests in
/// flight; results come back in input order.
pub fn call_many(config: &LlmConfig, utterances: &[String], workers: usize) -> Vec<Result<LlmRawResult, LlmError>> {
    map_ordered(utterances, workers, |u| call(config, &build_messages(u)?))
}
