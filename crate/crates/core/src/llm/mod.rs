//! Everything between a user's instruction and a list of commands: the system
//! prompt, chat providers, the exchange transcript and the closed-loop audit.

mod bridge;
mod guard;
mod http;
mod prompt;
mod provider;
mod transcript;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bridge::{Bridge, InstructionResult, InstructionStatus};
pub use guard::{assert_closed_loop, LoopViolation};
pub use http::{HttpProvider, HttpSettings};
pub use prompt::build_system_prompt;
pub use provider::{
    build_provider, replay_key, ChatProvider, ProviderConfig, ReplayEntry, ReplayProvider,
    DEFAULT_API_KEY_ENV,
};
pub use transcript::{Direction, Exchange, Transcript, TranscriptEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    /// No usable response within the time limit, after all retries. Also
    /// covers endpoints that cannot be reached at all.
    #[error("provider timed out after {attempts} attempt(s): {detail}")]
    Timeout { attempts: u32, detail: String },
    #[error("provider returned HTTP {status} after {attempts} attempt(s)")]
    Http { status: u16, attempts: u32 },
    #[error("no replay fixture for key {key} (text {text:?})")]
    ReplayMiss { key: String, text: String },
    #[error("environment variable {0} holding the API key is not set")]
    MissingApiKey(String),
    #[error("unusable provider reply: {0}")]
    MalformedReply(String),
    #[error("replay fixture error: {0}")]
    Fixture(String),
}
