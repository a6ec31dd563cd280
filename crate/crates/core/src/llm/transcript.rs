use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{Message, ProviderError, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Outbound,
    Inbound,
}

/// One message as it crossed the provider boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub exchange: usize,
    pub direction: Direction,
    pub role: Role,
    pub content: String,
    pub timestamp_ms: u64,
    pub provider: String,
}

/// One call to a provider: what was sent and what came back.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub index: usize,
    pub provider: String,
    /// Index into [`Transcript::user_inputs`] of the instruction that caused
    /// this exchange.
    pub input: usize,
    pub sent_ms: u64,
    pub outbound: Vec<Message>,
    #[serde(default)]
    pub received_ms: Option<u64>,
    #[serde(default)]
    pub reply: Option<String>,
    #[serde(default)]
    pub error: Option<String>,
}

/// Append-only record of every provider exchange, plus the user inputs that
/// caused them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    inputs: Vec<String>,
    exchanges: Vec<Exchange>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records text exactly as the user entered it; returns its index.
    pub fn record_input(&mut self, text: &str) -> usize {
        self.inputs.push(text.to_string());
        self.inputs.len() - 1
    }

    /// Records the outgoing half of an exchange before the provider is called.
    pub fn begin(&mut self, provider: &str, input: usize, outbound: &[Message]) -> usize {
        let index = self.exchanges.len();
        self.exchanges.push(Exchange {
            index,
            provider: provider.to_string(),
            input,
            sent_ms: now_ms(),
            outbound: outbound.to_vec(),
            received_ms: None,
            reply: None,
            error: None,
        });
        index
    }

    /// Records the provider's answer to exchange `index`.
    pub fn finish(&mut self, index: usize, result: Result<&str, &ProviderError>) {
        let ex = &mut self.exchanges[index];
        ex.received_ms = Some(now_ms());
        match result {
            Ok(reply) => ex.reply = Some(reply.to_string()),
            Err(e) => ex.error = Some(e.to_string()),
        }
    }

    pub fn user_inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn exchanges(&self) -> &[Exchange] {
        &self.exchanges
    }

    /// Flattened per-message view; replies appear as inbound assistant
    /// messages.
    pub fn entries(&self) -> Vec<TranscriptEntry> {
        let mut out = Vec::new();
        for ex in &self.exchanges {
            for m in &ex.outbound {
                out.push(TranscriptEntry {
                    exchange: ex.index,
                    direction: Direction::Outbound,
                    role: m.role,
                    content: m.content.clone(),
                    timestamp_ms: ex.sent_ms,
                    provider: ex.provider.clone(),
                });
            }
            if let (Some(reply), Some(at)) = (&ex.reply, ex.received_ms) {
                out.push(TranscriptEntry {
                    exchange: ex.index,
                    direction: Direction::Inbound,
                    role: Role::Assistant,
                    content: reply.clone(),
                    timestamp_ms: at,
                    provider: ex.provider.clone(),
                });
            }
        }
        out
    }

    /// JSON Lines, one exchange per line.
    pub fn to_jsonl(&self) -> String {
        self.exchanges
            .iter()
            .map(|e| serde_json::to_string(e).expect("exchange serializes") + "\n")
            .collect()
    }

    /// Test hook for building tampered transcripts.
    pub fn exchanges_mut(&mut self) -> &mut [Exchange] {
        &mut self.exchanges
    }
}
