use serde::{Deserialize, Serialize};

use super::simulation::{LogRecord, SimSink, Simulation};
use super::Mode;
use crate::llm::{Bridge, InstructionResult, InstructionStatus};

/// Where interactive instructions come from (a terminal, a test vector, an
/// HTTP queue). `None` means no more input.
pub trait InputSource {
    fn next_instruction(&mut self) -> Option<String>;
}

impl<I: Iterator<Item = String>> InputSource for I {
    fn next_instruction(&mut self) -> Option<String> {
        self.next()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub frames_executed: u64,
    pub instructions_processed: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub provider_errors: usize,
    pub captures_written: usize,
    pub halted: bool,
    pub instructions: Vec<InstructionResult>,
    pub log: Vec<LogRecord>,
}

/// Sends `text` through the bridge against the scene as it will be after
/// everything already queued, and queues the result if accepted.
pub(crate) fn submit(sim: &mut Simulation, bridge: &mut Bridge, text: &str) -> InstructionResult {
    let result = bridge.instruct(text, &sim.projected_scene());
    match result.status {
        InstructionStatus::Accepted => sim.enqueue(&result.commands),
        InstructionStatus::Rejected => {
            for f in &result.findings {
                log::warn!("instruction {text:?} rejected: {f}");
            }
        }
        InstructionStatus::ProviderError => {}
    }
    result
}

/// Runs `sim` to completion in its configured mode.
///
/// Predefined instructions go first, each one fully executed before the next
/// is sent. In `without_input` mode the clock then runs to the frame limit.
/// In `with_input` mode one instruction is read from `input` at every
/// interaction-interval frame; when input runs out, queued actions finish and
/// the run ends. Bridge calls happen only between frames.
pub fn run(
    sim: &mut Simulation,
    bridge: &mut Bridge,
    input: &mut dyn InputSource,
    sink: &mut dyn SimSink,
) -> RunReport {
    let mut results = Vec::new();
    let start = sim.current_frame();
    let config = sim.config().clone();

    for text in &config.predefined_instructions {
        if sim.is_halted() {
            break;
        }
        let r = submit(sim, bridge, text);
        sink.instruction(&r);
        results.push(r);
        sim.drain(sink);
    }

    match config.mode {
        Mode::WithoutInput => {
            sim.step(u64::MAX, sink);
        }
        Mode::WithInput => {
            while !sim.is_halted() {
                if sim
                    .current_frame()
                    .is_multiple_of(config.interaction_interval_frames)
                {
                    match input.next_instruction() {
                        Some(text) => {
                            let r = submit(sim, bridge, &text);
                            sink.instruction(&r);
                            results.push(r);
                        }
                        None => {
                            sim.drain(sink);
                            break;
                        }
                    }
                }
                sim.step(1, sink);
            }
        }
    }

    let count = |s| {
        results
            .iter()
            .filter(|r: &&InstructionResult| r.status == s)
            .count()
    };
    RunReport {
        frames_executed: sim.current_frame() - start,
        instructions_processed: results.len(),
        accepted: count(InstructionStatus::Accepted),
        rejected: count(InstructionStatus::Rejected),
        provider_errors: count(InstructionStatus::ProviderError),
        captures_written: sim.captures().len(),
        halted: sim.is_halted(),
        log: sim.log().to_vec(),
        instructions: results,
    }
}
