use std::sync::{Condvar, Mutex, OnceLock};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{baseline_text, FramingKind, GenerationConfig, PromptPair, SynthesisMode};

pub const ENV_LLM_URL: &str = "ENTANGLE_LLM_URL";
pub const ENV_LLM_KEY: &str = "ENTANGLE_LLM_KEY";
pub const ENV_LLM_MODEL: &str = "ENTANGLE_LLM_MODEL";

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("generation endpoint {endpoint} unreachable after {retries} retries: {message}")]
    Unreachable {
        endpoint: String,
        message: String,
        retries: u32,
    },
    #[error("generation timed out after {secs}s ({retries} retries)")]
    Timeout { secs: u64, retries: u32 },
    #[error("generation endpoint returned HTTP {status} after {retries} retries: {body}")]
    Http {
        status: u16,
        body: String,
        retries: u32,
    },
    #[error("provider refused the request after {retries} retries: {reason}")]
    Refusal { reason: String, retries: u32 },
    #[error("malformed completion response: {0}")]
    Decode(String),
    #[error("provider returned an empty narrative")]
    EmptyNarrative,
    #[error("generation provider misconfigured: {0}")]
    Config(String),
}

impl GenerationError {
    pub fn is_timeout(&self) -> bool {
        matches!(self, GenerationError::Timeout { .. })
    }

    pub fn retries(&self) -> u32 {
        match self {
            GenerationError::Unreachable { retries, .. }
            | GenerationError::Timeout { retries, .. }
            | GenerationError::Http { retries, .. }
            | GenerationError::Refusal { retries, .. } => *retries,
            _ => 0,
        }
    }
}

/// Structured view of what a prompt was built from. Remote providers only
/// see the prompt; the mock renders its narrative from these.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NarrativeHints {
    pub mode: SynthesisMode,
    pub framing: Option<FramingKind>,
    pub prescriptions: Vec<String>,
}

pub struct CompletionRequest<'a> {
    pub prompt: &'a PromptPair,
    pub config: &'a GenerationConfig,
    pub hints: &'a NarrativeHints,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub text: String,
    pub provider: String,
    pub model: String,
    pub prompt_tokens: Option<u32>,
    pub completion_tokens: Option<u32>,
    pub retries: u32,
}

pub trait TextGenerator: Send + Sync {
    fn complete(&self, req: &CompletionRequest<'_>) -> Result<Completion, GenerationError>;
    fn name(&self) -> &str;
    fn ready(&self) -> bool {
        true
    }
}

/// Offline generator with a fixed narrative template.
///
/// Entangled mode, with prescriptions `p1..pn` in activation order:
///
/// | framing    | narrative |
/// |------------|-----------|
/// | dominant   | `From a position of strength, p1.` then `Press the advantage and pk.` per further prescription, then `Hold the initiative throughout.` |
/// | contrarian | `Against the conventional reading, p1.` then `Where rivals expect the obvious, pk.` per further prescription, then `Let the unexpected move define the strategy.` |
/// | minimalist | `In short: p1; p2; ...; pn.` |
///
/// Baseline mode returns the concatenation template unchanged (see
/// [`baseline_text`]). Token counts are whitespace-separated word counts.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockGenerator;

impl MockGenerator {
    pub const MODEL: &'static str = "deterministic-mock/1";

    pub fn narrative(
        framing: Option<FramingKind>,
        mode: SynthesisMode,
        prescriptions: &[String],
    ) -> String {
        if prescriptions.is_empty() {
            return String::new();
        }
        if mode == SynthesisMode::Baseline {
            return baseline_text(prescriptions);
        }
        let (first, rest) = prescriptions.split_first().expect("non-empty");
        let sentences = |opener: &str, connective: &str, closer: &str| {
            let mut out = vec![format!("{opener}{first}.")];
            out.extend(rest.iter().map(|p| format!("{connective}{p}.")));
            out.push(closer.to_string());
            out.join(" ")
        };
        match framing.unwrap_or(FramingKind::Dominant) {
            FramingKind::Dominant => sentences(
                "From a position of strength, ",
                "Press the advantage and ",
                "Hold the initiative throughout.",
            ),
            FramingKind::Contrarian => sentences(
                "Against the conventional reading, ",
                "Where rivals expect the obvious, ",
                "Let the unexpected move define the strategy.",
            ),
            FramingKind::Minimalist => format!("In short: {}.", prescriptions.join("; ")),
        }
    }
}

fn word_count(s: &str) -> u32 {
    s.split_whitespace().count() as u32
}

impl TextGenerator for MockGenerator {
    fn complete(&self, req: &CompletionRequest<'_>) -> Result<Completion, GenerationError> {
        let text = Self::narrative(req.hints.framing, req.hints.mode, &req.hints.prescriptions);
        Ok(Completion {
            prompt_tokens: Some(word_count(&req.prompt.system) + word_count(&req.prompt.user)),
            completion_tokens: Some(word_count(&text)),
            text,
            provider: "deterministic_mock".into(),
            model: Self::MODEL.into(),
            retries: 0,
        })
    }

    fn name(&self) -> &str {
        "deterministic_mock"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    /// Full URL of the chat-completions endpoint.
    pub endpoint: Option<String>,
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
    pub model: String,
    pub timeout_secs: u64,
    pub max_retries: u32,
    pub max_in_flight: usize,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            endpoint: None,
            api_key: None,
            model: "gpt-4".into(),
            timeout_secs: 60,
            max_retries: 2,
            max_in_flight: 4,
        }
    }
}

impl LlmConfig {
    /// Fill unset fields from `ENTANGLE_LLM_*`.
    pub fn with_env(mut self) -> Self {
        let var = |k: &str| std::env::var(k).ok().filter(|v| !v.is_empty());
        if self.endpoint.is_none() {
            self.endpoint = var(ENV_LLM_URL);
        }
        if self.api_key.is_none() {
            self.api_key = var(ENV_LLM_KEY);
        }
        if let Some(m) = var(ENV_LLM_MODEL) {
            if self.model == LlmConfig::default().model {
                self.model = m;
            }
        }
        self
    }

    pub fn validate(&self) -> Result<(), GenerationError> {
        if self.endpoint.as_deref().is_none_or(str::is_empty) {
            return Err(GenerationError::Config(format!(
                "remote generation needs an endpoint (set {ENV_LLM_URL})"
            )));
        }
        if self.max_in_flight == 0 {
            return Err(GenerationError::Config(
                "max_in_flight must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Counting gate bounding concurrent requests.
struct InFlight {
    limit: usize,
    busy: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn acquire(&self) -> Permit<'_> {
        let mut busy = self.busy.lock().expect("in-flight lock");
        while *busy >= self.limit {
            busy = self.freed.wait(busy).expect("in-flight lock");
        }
        *busy += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.busy.lock().expect("in-flight lock") -= 1;
        self.0.freed.notify_one();
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 2],
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<Usage>,
    #[serde(default)]
    model: Option<String>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct ResponseMessage {
    #[serde(default)]
    content: Option<String>,
    #[serde(default)]
    refusal: Option<String>,
}

#[derive(Deserialize)]
struct Usage {
    prompt_tokens: Option<u32>,
    completion_tokens: Option<u32>,
}

enum Attempt {
    Retry(GenerationError),
    Fatal(GenerationError),
}

/// Chat-completions client with bounded retries and an in-flight limit.
pub struct RemoteGenerator {
    cfg: LlmConfig,
    gate: InFlight,
    client: OnceLock<reqwest::blocking::Client>,
}

impl RemoteGenerator {
    pub fn new(cfg: LlmConfig) -> Result<Self, GenerationError> {
        cfg.validate()?;
        Ok(Self {
            gate: InFlight {
                limit: cfg.max_in_flight,
                busy: Mutex::new(0),
                freed: Condvar::new(),
            },
            cfg,
            client: OnceLock::new(),
        })
    }

    fn endpoint(&self) -> &str {
        self.cfg.endpoint.as_deref().expect("validated")
    }

    fn client(&self) -> &reqwest::blocking::Client {
        self.client.get_or_init(|| {
            reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(self.cfg.timeout_secs))
                .build()
                .expect("http client")
        })
    }

    fn attempt(&self, req: &CompletionRequest<'_>, retries: u32) -> Result<Completion, Attempt> {
        let body = ChatRequest {
            model: &self.cfg.model,
            messages: [
                ChatMessage {
                    role: "system",
                    content: &req.prompt.system,
                },
                ChatMessage {
                    role: "user",
                    content: &req.prompt.user,
                },
            ],
            temperature: req.config.temperature,
            max_tokens: req.config.max_tokens,
        };
        let mut http = self.client().post(self.endpoint()).json(&body);
        if let Some(key) = &self.cfg.api_key {
            http = http.bearer_auth(key);
        }
        let resp = http.send().map_err(|e| {
            Attempt::Retry(if e.is_timeout() {
                GenerationError::Timeout {
                    secs: self.cfg.timeout_secs,
                    retries,
                }
            } else {
                GenerationError::Unreachable {
                    endpoint: self.endpoint().to_string(),
                    message: e.to_string(),
                    retries,
                }
            })
        })?;
        let status = resp.status();
        let text = resp
            .text()
            .map_err(|e| Attempt::Fatal(GenerationError::Decode(e.to_string())))?;
        if !status.is_success() {
            let err = GenerationError::Http {
                status: status.as_u16(),
                body: text.chars().take(500).collect(),
                retries,
            };
            return Err(if status.as_u16() == 429 || status.is_server_error() {
                Attempt::Retry(err)
            } else {
                Attempt::Fatal(err)
            });
        }
        let parsed: ChatResponse = serde_json::from_str(&text)
            .map_err(|e| Attempt::Fatal(GenerationError::Decode(e.to_string())))?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| Attempt::Fatal(GenerationError::Decode("no choices".into())))?;
        if let Some(reason) = choice.message.refusal.filter(|r| !r.is_empty()) {
            return Err(Attempt::Fatal(GenerationError::Refusal { reason, retries }));
        }
        if choice.finish_reason.as_deref() == Some("content_filter") {
            return Err(Attempt::Fatal(GenerationError::Refusal {
                reason: "content_filter".into(),
                retries,
            }));
        }
        let usage = parsed.usage;
        Ok(Completion {
            text: choice.message.content.unwrap_or_default(),
            provider: "remote".into(),
            model: parsed.model.unwrap_or_else(|| self.cfg.model.clone()),
            prompt_tokens: usage.as_ref().and_then(|u| u.prompt_tokens),
            completion_tokens: usage.as_ref().and_then(|u| u.completion_tokens),
            retries,
        })
    }
}

impl TextGenerator for RemoteGenerator {
    fn complete(&self, req: &CompletionRequest<'_>) -> Result<Completion, GenerationError> {
        let _permit = self.gate.acquire();
        let mut retries = 0;
        loop {
            match self.attempt(req, retries) {
                Ok(c) => return Ok(c),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(e)) if retries >= self.cfg.max_retries => return Err(e),
                Err(Attempt::Retry(_)) => {
                    std::thread::sleep(Duration::from_millis(250 << retries));
                    retries += 1;
                }
            }
        }
    }

    fn name(&self) -> &str {
        "remote"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn ps(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn mock_templates() {
        let p = ps(&["redefine the game", "test small adaptations"]);
        assert_eq!(
            MockGenerator::narrative(Some(FramingKind::Dominant), SynthesisMode::Entangled, &p),
            "From a position of strength, redefine the game. Press the advantage and test small adaptations. Hold the initiative throughout."
        );
        assert_eq!(
            MockGenerator::narrative(Some(FramingKind::Contrarian), SynthesisMode::Entangled, &p),
            "Against the conventional reading, redefine the game. Where rivals expect the obvious, test small adaptations. Let the unexpected move define the strategy."
        );
        assert_eq!(
            MockGenerator::narrative(Some(FramingKind::Minimalist), SynthesisMode::Entangled, &p),
            "In short: redefine the game; test small adaptations."
        );
        assert_eq!(
            MockGenerator::narrative(None, SynthesisMode::Baseline, &p),
            baseline_text(&p)
        );
    }

    #[test]
    fn remote_requires_endpoint() {
        assert!(matches!(
            RemoteGenerator::new(LlmConfig::default()),
            Err(GenerationError::Config(_))
        ));
    }

    #[test]
    fn unreachable_endpoint_reports_retries() {
        let gen = RemoteGenerator::new(LlmConfig {
            endpoint: Some("http://127.0.0.1:9/v1/chat/completions".into()),
            max_retries: 1,
            timeout_secs: 2,
            ..Default::default()
        })
        .unwrap();
        let prompt = PromptPair {
            system: "s".into(),
            user: "u".into(),
        };
        let hints = NarrativeHints {
            mode: SynthesisMode::Entangled,
            framing: None,
            prescriptions: vec![],
        };
        let err = gen
            .complete(&CompletionRequest {
                prompt: &prompt,
                config: &GenerationConfig::default(),
                hints: &hints,
            })
            .unwrap_err();
        assert_eq!(err.retries(), 1, "{err}");
    }

    #[test]
    fn in_flight_gate_bounds_concurrency() {
        let gate = Arc::new(InFlight {
            limit: 2,
            busy: Mutex::new(0),
            freed: Condvar::new(),
        });
        let peak = Arc::new(Mutex::new(0usize));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let (gate, peak) = (gate.clone(), peak.clone());
                std::thread::spawn(move || {
                    let _p = gate.acquire();
                    let now = *gate.busy.lock().unwrap();
                    let mut pk = peak.lock().unwrap();
                    *pk = (*pk).max(now);
                    drop(pk);
                    std::thread::sleep(Duration::from_millis(5));
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert!(*peak.lock().unwrap() <= 2);
    }
}
