use std::path::Path;
use std::time::Duration;

use serde::Deserialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("authentication: {0}")]
    Auth(String),
    #[error("network: {0}")]
    Network(String),
    #[error("timed out after {0}s")]
    Timeout(u64),
    #[error("unexpected response: {0}")]
    Protocol(String),
    #[error("fixture: {0}")]
    Fixture(String),
}

impl TransportError {
    /// Short machine-readable kind.
    pub fn kind(&self) -> &'static str {
        match self {
            TransportError::Auth(_) => "auth",
            TransportError::Network(_) => "network",
            TransportError::Timeout(_) => "timeout",
            TransportError::Protocol(_) => "protocol",
            TransportError::Fixture(_) => "fixture",
        }
    }
}

pub trait CompletionTransport: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, TransportError>;
}

impl<F> CompletionTransport for F
where
    F: Fn(&str) -> Result<String, TransportError> + Send + Sync,
{
    fn complete(&self, prompt: &str) -> Result<String, TransportError> {
        self(prompt)
    }
}

/// The text after the last `Question: ` marker, up to the end of that line.
pub fn final_question(prompt: &str) -> &str {
    let tail = prompt.rfind("Question: ").map_or(prompt, |i| &prompt[i + "Question: ".len()..]);
    tail.lines().next().unwrap_or("").trim()
}

#[derive(Debug, Clone, Deserialize)]
struct FixturePair {
    question: String,
    answer: String,
}

/// Canned answers keyed by question text.
#[derive(Debug, Clone, Default)]
pub struct FixtureTransport {
    pairs: Vec<(String, String)>,
}

impl FixtureTransport {
    pub fn new(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        FixtureTransport { pairs: pairs.into_iter().collect() }
    }

    pub fn from_json(text: &str) -> Result<Self, TransportError> {
        let pairs: Vec<FixturePair> =
            serde_json::from_str(text).map_err(|e| TransportError::Fixture(format!("malformed fixture file: {e}")))?;
        Ok(Self::new(pairs.into_iter().map(|p| (p.question, p.answer))))
    }

    pub fn from_path(path: &Path) -> Result<Self, TransportError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TransportError::Fixture(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn answer_for(&self, question: &str) -> Option<&str> {
        let question = question.trim();
        self.pairs.iter().find(|(q, _)| q.trim() == question).map(|(_, a)| a.as_str())
    }
}

impl CompletionTransport for FixtureTransport {
    fn complete(&self, prompt: &str) -> Result<String, TransportError> {
        let question = final_question(prompt);
        self.answer_for(question)
            .map(str::to_string)
            .ok_or_else(|| TransportError::Fixture(format!("no answer recorded for {question:?}")))
    }
}

pub const ENV_ENDPOINT: &str = "SCRATCHKIT_ENDPOINT";
pub const ENV_API_KEY: &str = "SCRATCHKIT_API_KEY";
pub const ENV_MODEL: &str = "SCRATCHKIT_MODEL";
pub const ENV_TIMEOUT: &str = "SCRATCHKIT_TIMEOUT_SECS";

/// Chat-completions client.
#[derive(Debug, Clone)]
pub struct LiveTransport {
    pub endpoint: String,
    pub api_key: Option<String>,
    pub model: String,
    pub timeout_secs: u64,
}

impl LiveTransport {
    pub fn from_env() -> Self {
        let var = |name| std::env::var(name).ok().filter(|v: &String| !v.is_empty());
        LiveTransport {
            endpoint: var(ENV_ENDPOINT).unwrap_or_else(|| "https://api.openai.com/v1/chat/completions".into()),
            api_key: var(ENV_API_KEY),
            model: var(ENV_MODEL).unwrap_or_else(|| "gpt-4".into()),
            timeout_secs: var(ENV_TIMEOUT).and_then(|v| v.parse().ok()).unwrap_or(60),
        }
    }
}

impl CompletionTransport for LiveTransport {
    fn complete(&self, prompt: &str) -> Result<String, TransportError> {
        let key = self
            .api_key
            .as_deref()
            .ok_or_else(|| TransportError::Auth(format!("{ENV_API_KEY} is not set")))?;
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs(self.timeout_secs)).build();
        let body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        });
        let response = agent
            .post(&self.endpoint)
            .set("Authorization", &format!("Bearer {key}"))
            .send_json(body)
            .map_err(|e| match e {
                ureq::Error::Status(401 | 403, _) => TransportError::Auth(e.to_string()),
                ureq::Error::Transport(t) if t.to_string().contains("timed out") => {
                    TransportError::Timeout(self.timeout_secs)
                }
                other => TransportError::Network(other.to_string()),
            })?;
        let value: Value = response.into_json().map_err(|e| TransportError::Protocol(e.to_string()))?;
        value
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| TransportError::Protocol("missing choices[0].message.content".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn final_question_takes_last_marker() {
        let prompt = "x\nQuestion: a?\nAnswer: b\nQuestion: c?\nPlease answer again.";
        assert_eq!(final_question(prompt), "c?");
    }

    #[test]
    fn missing_key_is_auth_failure() {
        let live = LiveTransport { endpoint: "http://127.0.0.1:9".into(), api_key: None, model: "m".into(), timeout_secs: 1 };
        assert_eq!(live.complete("hi").unwrap_err().kind(), "auth");
    }

    #[test]
    fn fixture_miss() {
        let f = FixtureTransport::from_json(r#"[{"question": "q", "answer": "a"}]"#).unwrap();
        assert_eq!(f.complete("Question: q").unwrap(), "a");
        assert!(matches!(f.complete("Question: z"), Err(TransportError::Fixture(_))));
    }
}
