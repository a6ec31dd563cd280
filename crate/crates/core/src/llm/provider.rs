use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::http::{HttpProvider, HttpSettings};
use super::{Message, ProviderError, Role};
use crate::hash::fnv1a64;

pub const DEFAULT_API_KEY_ENV: &str = "CHATSIM_API_KEY";

/// A chat-completion backend.
pub trait ChatProvider: Send {
    /// Short identifier recorded in the transcript.
    fn id(&self) -> &str;

    /// Returns the text of the reply to `messages`.
    fn complete(&mut self, messages: &[Message]) -> Result<String, ProviderError>;
}

impl<P: ChatProvider + ?Sized> ChatProvider for Box<P> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn complete(&mut self, messages: &[Message]) -> Result<String, ProviderError> {
        (**self).complete(messages)
    }
}

fn default_timeout_secs() -> f64 {
    30.0
}

fn default_max_retries() -> u32 {
    3
}

fn default_backoff_ms() -> u64 {
    1000
}

fn default_key_env() -> String {
    DEFAULT_API_KEY_ENV.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProviderConfig {
    Http {
        endpoint: String,
        model: String,
        #[serde(default = "default_timeout_secs")]
        timeout_secs: f64,
        /// Retries after the first attempt.
        #[serde(default = "default_max_retries")]
        max_retries: u32,
        /// First retry delay; each later retry doubles it.
        #[serde(default = "default_backoff_ms")]
        backoff_ms: u64,
        #[serde(default = "default_key_env")]
        api_key_env: String,
    },
    Replay {
        fixture: PathBuf,
    },
}

impl ProviderConfig {
    /// Checks field values. Errors name the offending field.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        match self {
            ProviderConfig::Http {
                endpoint,
                model,
                timeout_secs,
                api_key_env,
                ..
            } => {
                if !(endpoint.starts_with("http://") || endpoint.starts_with("https://")) {
                    return Err((
                        "endpoint",
                        format!("expected an http(s) URL, got {endpoint:?}"),
                    ));
                }
                if model.trim().is_empty() {
                    return Err(("model", "must not be empty".into()));
                }
                if !(timeout_secs.is_finite() && *timeout_secs > 0.0) {
                    return Err(("timeout_secs", format!("must be > 0, got {timeout_secs}")));
                }
                if api_key_env.trim().is_empty() {
                    return Err(("api_key_env", "must not be empty".into()));
                }
                Ok(())
            }
            ProviderConfig::Replay { fixture } => {
                if fixture.as_os_str().is_empty() {
                    Err(("fixture", "must not be empty".into()))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Instantiates the configured provider. HTTP providers read their key from
/// the environment here, so a missing key fails before the run starts.
pub fn build_provider(config: &ProviderConfig) -> Result<Box<dyn ChatProvider>, ProviderError> {
    match config {
        ProviderConfig::Http {
            endpoint,
            model,
            timeout_secs,
            max_retries,
            backoff_ms,
            api_key_env,
        } => {
            let api_key = std::env::var(api_key_env)
                .ok()
                .filter(|k| !k.is_empty())
                .ok_or_else(|| ProviderError::MissingApiKey(api_key_env.clone()))?;
            let provider = HttpProvider::new(HttpSettings {
                endpoint: endpoint.clone(),
                model: model.clone(),
                api_key,
                timeout: Duration::from_secs_f64(*timeout_secs),
                max_retries: *max_retries,
                backoff: Duration::from_millis(*backoff_ms),
            })?;
            Ok(Box::new(provider))
        }
        ProviderConfig::Replay { fixture } => Ok(Box::new(ReplayProvider::load(fixture)?)),
    }
}

/// Fixture key: FNV-1a of the trimmed, lowercased text, as 16 hex digits.
pub fn replay_key(text: &str) -> String {
    format!("{:016x}", fnv1a64(text.trim().to_lowercase().as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplayEntry {
    pub text: String,
    pub reply: String,
}

/// Canned replies keyed by the user's text.
#[derive(Debug, Clone, Default)]
pub struct ReplayProvider {
    fixtures: BTreeMap<String, ReplayEntry>,
}

impl ReplayProvider {
    pub fn from_entries<I, T, R>(entries: I) -> Self
    where
        I: IntoIterator<Item = (T, R)>,
        T: Into<String>,
        R: Into<String>,
    {
        let fixtures = entries
            .into_iter()
            .map(|(t, r)| {
                let text = t.into();
                (
                    replay_key(&text),
                    ReplayEntry {
                        text,
                        reply: r.into(),
                    },
                )
            })
            .collect();
        Self { fixtures }
    }

    /// Parses a fixture map and checks every key against its text.
    pub fn from_json(json: &str) -> Result<Self, ProviderError> {
        let fixtures: BTreeMap<String, ReplayEntry> =
            serde_json::from_str(json).map_err(|e| ProviderError::Fixture(e.to_string()))?;
        for (key, entry) in &fixtures {
            let expected = replay_key(&entry.text);
            if *key != expected {
                return Err(ProviderError::Fixture(format!(
                    "key {key} does not match text {:?} (expected {expected})",
                    entry.text
                )));
            }
        }
        Ok(Self { fixtures })
    }

    pub fn load(path: &Path) -> Result<Self, ProviderError> {
        let json = fs::read_to_string(path)
            .map_err(|e| ProviderError::Fixture(format!("{}: {e}", path.display())))?;
        Self::from_json(&json)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.fixtures).expect("fixture map serializes")
    }

    pub fn len(&self) -> usize {
        self.fixtures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixtures.is_empty()
    }
}

impl ChatProvider for ReplayProvider {
    fn id(&self) -> &str {
        "replay"
    }

    fn complete(&mut self, messages: &[Message]) -> Result<String, ProviderError> {
        let text = messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
            .unwrap_or_default();
        let key = replay_key(text);
        self.fixtures
            .get(&key)
            .map(|e| e.reply.clone())
            .ok_or_else(|| ProviderError::ReplayMiss {
                key,
                text: text.to_string(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_ignores_case_and_outer_space() {
        assert_eq!(
            replay_key("  Move To 15,25,0\n"),
            replay_key("move to 15,25,0")
        );
        assert_ne!(replay_key("move to 15,25,0"), replay_key("move to 15,25,1"));
        assert_eq!(replay_key("").len(), 16);
    }

    #[test]
    fn replay_is_pure() {
        let mut p = ReplayProvider::from_entries([(
            "move to 15,25,0",
            "```\nset_bot_position((15,25,0))\n```",
        )]);
        let msgs = [Message::system("s"), Message::user("Move to 15,25,0")];
        let a = p.complete(&msgs).unwrap();
        let b = p.complete(&msgs).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("set_bot_position((15,25,0))"));
        let miss = p.complete(&[Message::user("dance")]).unwrap_err();
        assert!(matches!(miss, ProviderError::ReplayMiss { .. }));
    }

    #[test]
    fn fixture_json_round_trips_and_checks_keys() {
        let p = ReplayProvider::from_entries([("a", "x"), ("b", "y")]);
        let q = ReplayProvider::from_json(&p.to_json()).unwrap();
        assert_eq!(q.len(), 2);
        let bad = r#"{"0000000000000000": {"text": "a", "reply": "x"}}"#;
        assert!(matches!(
            ReplayProvider::from_json(bad),
            Err(ProviderError::Fixture(_))
        ));
    }

    #[test]
    fn config_parses_with_defaults() {
        let c: ProviderConfig = serde_json::from_str(
            r#"{"kind": "http", "endpoint": "http://localhost:1", "model": "m"}"#,
        )
        .unwrap();
        match &c {
            ProviderConfig::Http {
                max_retries,
                backoff_ms,
                api_key_env,
                ..
            } => {
                assert_eq!((*max_retries, *backoff_ms), (3, 1000));
                assert_eq!(api_key_env, "CHATSIM_API_KEY");
            }
            _ => unreachable!(),
        }
        assert!(c.validate().is_ok());
        assert!(serde_json::from_str::<ProviderConfig>(
            r#"{"kind": "replay", "fixture": "f", "x": 1}"#
        )
        .is_err());
    }

    #[test]
    fn missing_key_fails_at_build_time() {
        let c = ProviderConfig::Http {
            endpoint: "http://127.0.0.1:9".into(),
            model: "m".into(),
            timeout_secs: 1.0,
            max_retries: 0,
            backoff_ms: 0,
            api_key_env: "CHATSIM_TEST_KEY_THAT_IS_NEVER_SET".into(),
        };
        assert_eq!(
            build_provider(&c).err(),
            Some(ProviderError::MissingApiKey(
                "CHATSIM_TEST_KEY_THAT_IS_NEVER_SET".into()
            ))
        );
    }
}
