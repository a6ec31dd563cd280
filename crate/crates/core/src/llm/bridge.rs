use serde::{Deserialize, Serialize};

use super::prompt::build_system_prompt;
use super::provider::ChatProvider;
use super::transcript::Transcript;
use super::Message;
use crate::chatscript::{
    evaluate, extract_script, parse, pretty_print, validate, Catalog, Finding, FindingCode, Span,
    SyntaxError,
};
use crate::command::Command;
use crate::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstructionStatus {
    Accepted,
    Rejected,
    ProviderError,
}

/// Outcome of one instruction. `commands` is empty unless `status` is
/// `Accepted`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionResult {
    pub text: String,
    pub status: InstructionStatus,
    pub raw_reply: Option<String>,
    pub extracted: Option<String>,
    /// Canonical rendering of the parsed script.
    pub script: Option<String>,
    pub findings: Vec<Finding>,
    pub commands: Vec<Command>,
    pub error: Option<String>,
}

impl InstructionResult {
    fn new(text: &str) -> Self {
        Self {
            text: text.to_string(),
            status: InstructionStatus::Rejected,
            raw_reply: None,
            extracted: None,
            script: None,
            findings: Vec::new(),
            commands: Vec::new(),
            error: None,
        }
    }

    pub fn is_accepted(&self) -> bool {
        self.status == InstructionStatus::Accepted
    }

    fn reject(mut self, findings: Vec<Finding>) -> Self {
        self.status = InstructionStatus::Rejected;
        self.findings = findings;
        self.commands.clear();
        self
    }
}

/// Turns user text into commands through a provider. Only the system prompt
/// and the user's own text are ever sent; nothing read from the scene is.
pub struct Bridge {
    provider: Box<dyn ChatProvider>,
    catalog: Catalog,
    system_prompt: String,
    transcript: Transcript,
}

impl Bridge {
    pub fn new(provider: Box<dyn ChatProvider>, catalog: Catalog) -> Self {
        let system_prompt = build_system_prompt(&catalog);
        Self {
            provider,
            catalog,
            system_prompt,
            transcript: Transcript::new(),
        }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn system_prompt(&self) -> &str {
        &self.system_prompt
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn provider_id(&self) -> &str {
        self.provider.id()
    }

    /// Runs the whole pipeline for one instruction. `scene` is read by getter
    /// calls during evaluation and is not modified.
    pub fn instruct(&mut self, text: &str, scene: &Scene) -> InstructionResult {
        let mut result = InstructionResult::new(text);
        let input = self.transcript.record_input(text);
        let messages = [
            Message::system(self.system_prompt.clone()),
            Message::user(text),
        ];
        let exchange = self.transcript.begin(self.provider.id(), input, &messages);
        let reply = self.provider.complete(&messages);
        self.transcript.finish(exchange, reply.as_deref());
        let reply = match reply {
            Ok(r) => r,
            Err(e) => {
                log::warn!("instruction {text:?}: {e}");
                result.status = InstructionStatus::ProviderError;
                result.error = Some(e.to_string());
                return result;
            }
        };
        let source = extract_script(&reply);
        result.raw_reply = Some(reply);
        result.extracted = Some(source.clone());

        let script = match parse(&source) {
            Ok(s) => s,
            Err(e) => {
                let code = match e {
                    SyntaxError::Lex(_) => FindingCode::LexError,
                    SyntaxError::Parse(_) => FindingCode::ParseError,
                };
                return result.reject(vec![Finding::error(code, e.span(), e.to_string())]);
            }
        };
        result.script = Some(pretty_print(&script));
        if script.is_empty() {
            return result.reject(vec![Finding::error(
                FindingCode::EmptyScript,
                Span::new(1, 1),
                "the reply contains no statements",
            )]);
        }
        let report = validate(&script, &self.catalog);
        if !report.is_empty() {
            return result.reject(report.findings);
        }
        match evaluate(&script, scene) {
            Ok(commands) => {
                result.status = InstructionStatus::Accepted;
                result.commands = commands;
                result
            }
            Err(e) => result.reject(vec![e.to_finding()]),
        }
    }
}
