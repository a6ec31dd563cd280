use std::thread;
use std::time::Duration;

use reqwest::blocking::Client;
use serde::Deserialize;
use serde_json::json;

use super::provider::ChatProvider;
use super::{Message, ProviderError};

#[derive(Debug, Clone)]
pub struct HttpSettings {
    /// Base URL; `/chat/completions` is appended.
    pub endpoint: String,
    pub model: String,
    pub api_key: String,
    pub timeout: Duration,
    /// Retries after the first attempt, on timeouts and 5xx only.
    pub max_retries: u32,
    /// Delay before the first retry, doubled for each one after it.
    pub backoff: Duration,
}

/// Chat-completion client for endpoints speaking the common
/// `POST /chat/completions` JSON shape.
pub struct HttpProvider {
    client: Client,
    url: String,
    settings: HttpSettings,
}

#[derive(Deserialize)]
struct CompletionBody {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

enum Attempt {
    Done(Result<String, ProviderError>),
    Retry(ProviderError),
}

impl HttpProvider {
    pub fn new(settings: HttpSettings) -> Result<Self, ProviderError> {
        let client = Client::builder()
            .timeout(settings.timeout)
            .build()
            .map_err(|e| ProviderError::MalformedReply(format!("cannot build HTTP client: {e}")))?;
        let url = format!(
            "{}/chat/completions",
            settings.endpoint.trim_end_matches('/')
        );
        Ok(Self {
            client,
            url,
            settings,
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    fn attempt(&self, body: &serde_json::Value, attempts: u32) -> Attempt {
        let response = match self
            .client
            .post(&self.url)
            .bearer_auth(&self.settings.api_key)
            .json(body)
            .send()
        {
            Ok(r) => r,
            Err(e) => {
                return Attempt::Retry(ProviderError::Timeout {
                    attempts,
                    detail: e.to_string(),
                })
            }
        };
        let status = response.status();
        if status.is_server_error() {
            return Attempt::Retry(ProviderError::Http {
                status: status.as_u16(),
                attempts,
            });
        }
        if !status.is_success() {
            return Attempt::Done(Err(ProviderError::Http {
                status: status.as_u16(),
                attempts,
            }));
        }
        let text = match response.text() {
            Ok(t) => t,
            Err(e) => {
                return Attempt::Retry(ProviderError::Timeout {
                    attempts,
                    detail: e.to_string(),
                })
            }
        };
        Attempt::Done(
            serde_json::from_str::<CompletionBody>(&text)
                .map_err(|e| ProviderError::MalformedReply(e.to_string()))
                .and_then(|b| {
                    b.choices
                        .into_iter()
                        .next()
                        .and_then(|c| c.message.content)
                        .ok_or_else(|| {
                            ProviderError::MalformedReply("no choices[0].message.content".into())
                        })
                }),
        )
    }
}

impl ChatProvider for HttpProvider {
    fn id(&self) -> &str {
        &self.settings.model
    }

    fn complete(&mut self, messages: &[Message]) -> Result<String, ProviderError> {
        let body = json!({
            "model": self.settings.model,
            "messages": messages,
            "temperature": 0,
        });
        let mut delay = self.settings.backoff;
        let mut attempts = 0;
        loop {
            attempts += 1;
            match self.attempt(&body, attempts) {
                Attempt::Done(result) => return result,
                Attempt::Retry(err) => {
                    if attempts > self.settings.max_retries {
                        return Err(err);
                    }
                    log::warn!("{err}; retrying in {delay:?}");
                    thread::sleep(delay);
                    delay *= 2;
                }
            }
        }
    }
}
