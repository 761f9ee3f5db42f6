//! Remote LLM agent speaking a chat-completions-compatible HTTP endpoint.
//!
//! Each question resends the entire accumulated transcript as one chat:
//! the intro as the system message, then alternating user/assistant messages
//! (consecutive game fragments are coalesced into a single user message).
//! Temperature is fixed to 0 so a given endpoint answers reproducibly.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{AgentBehavior, AgentError, QuestionCtx, Role, TranscriptEntry};

/// Temperature sent with every request and echoed into reports.
pub const TEMPERATURE: f32 = 0.0;

#[derive(Debug, Clone)]
pub struct LlmConfig {
    /// Full URL of the chat completions endpoint,
    /// e.g. `https://api.openai.com/v1/chat/completions`.
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API key; when set and
    /// the variable is non-empty, requests carry `Authorization: Bearer`.
    /// Key material never reaches reports or transcripts.
    pub api_key_env: Option<String>,
    pub timeout: Duration,
    /// Total attempts per question (first try included).
    pub max_attempts: u32,
    /// Backoff before the second attempt; doubles per retry.
    pub initial_backoff: Duration,
}

impl LlmConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key_env: None,
            timeout: Duration::from_secs(120),
            max_attempts: 3,
            initial_backoff: Duration::from_millis(500),
        }
    }
}

#[derive(Debug, Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    temperature: f32,
    messages: Vec<ChatMessage>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Debug, Deserialize)]
struct ChatChoice {
    #[serde(default)]
    message: Option<ChatChoiceMessage>,
    #[serde(default)]
    text: Option<String>,
}

#[derive(Debug, Deserialize)]
struct ChatChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

/// Map a transcript to chat messages: system entries become the system
/// message, consecutive game entries coalesce into one user message, agent
/// entries become assistant messages.
pub fn build_messages(transcript: &[TranscriptEntry]) -> Vec<ChatMessage> {
    let mut messages: Vec<ChatMessage> = Vec::new();
    let mut pending_game = String::new();
    for entry in transcript {
        match entry.role {
            Role::System => messages.push(ChatMessage {
                role: "system".into(),
                content: entry.text.clone(),
            }),
            Role::Game => pending_game.push_str(&entry.text),
            Role::Agent => {
                if !pending_game.is_empty() {
                    messages.push(ChatMessage {
                        role: "user".into(),
                        content: std::mem::take(&mut pending_game),
                    });
                }
                messages.push(ChatMessage {
                    role: "assistant".into(),
                    content: entry.text.clone(),
                });
            }
        }
    }
    if !pending_game.is_empty() {
        messages.push(ChatMessage {
            role: "user".into(),
            content: pending_game,
        });
    }
    messages
}

pub struct LlmBehavior {
    config: LlmConfig,
    client: reqwest::blocking::Client,
}

impl LlmBehavior {
    pub fn new(config: LlmConfig) -> Result<Self, AgentError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| AgentError::Transport {
                endpoint: config.endpoint.clone(),
                message: format!("building HTTP client: {e}"),
            })?;
        Ok(Self { config, client })
    }

    fn api_key(&self) -> Option<String> {
        let var = self.config.api_key_env.as_deref()?;
        match std::env::var(var) {
            Ok(key) if !key.is_empty() => Some(key),
            _ => None,
        }
    }

    fn request_once(&self, messages: &[ChatMessage]) -> Result<String, String> {
        let body = ChatRequest {
            model: &self.config.model,
            temperature: TEMPERATURE,
            messages: messages.to_vec(),
        };
        let mut request = self.client.post(&self.config.endpoint).json(&body);
        if let Some(key) = self.api_key() {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(|e| e.to_string())?;
        let status = response.status();
        if !status.is_success() {
            let text = response.text().unwrap_or_default();
            return Err(format!(
                "HTTP {status}: {}",
                text.chars().take(200).collect::<String>()
            ));
        }
        let parsed: ChatResponse = response.json().map_err(|e| format!("bad JSON: {e}"))?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| "response has no choices".to_string())?;
        choice
            .message
            .and_then(|m| m.content)
            .or(choice.text)
            .ok_or_else(|| "first choice carries no text".to_string())
    }
}

impl AgentBehavior for LlmBehavior {
    fn answer(
        &mut self,
        transcript: &[TranscriptEntry],
        _ctx: &QuestionCtx<'_>,
    ) -> Result<String, AgentError> {
        let messages = build_messages(transcript);
        let mut backoff = self.config.initial_backoff;
        let mut last_error = String::new();
        for attempt in 1..=self.config.max_attempts.max(1) {
            match self.request_once(&messages) {
                Ok(text) => return Ok(text),
                Err(message) => {
                    last_error = format!("attempt {attempt}: {message}");
                    if attempt < self.config.max_attempts {
                        std::thread::sleep(backoff);
                        backoff = backoff.saturating_mul(2);
                    }
                }
            }
        }
        Err(AgentError::Transport {
            endpoint: self.config.endpoint.clone(),
            message: last_error,
        })
    }
}
