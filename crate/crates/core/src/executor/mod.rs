//! Frame-stepped execution of commands, and the two run modes.

mod action;
mod runner;
mod simulation;

use serde::{Deserialize, Serialize};

pub use action::{compile, Action};
pub use runner::{run, InputSource, RunReport};
pub use simulation::{LogRecord, NullSink, SimSink, Simulation, TrajectoryRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Predefined instructions, then the clock runs to the frame limit.
    WithoutInput,
    /// Predefined instructions, then one interactive instruction per
    /// interaction interval.
    WithInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub frame_limit: u64,
    pub action_interval_frames: u64,
    pub capture_interval_frames: u64,
    pub interaction_interval_frames: u64,
    pub mode: Mode,
    pub predefined_instructions: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            frame_limit: 1000,
            action_interval_frames: 8,
            capture_interval_frames: 8,
            interaction_interval_frames: 64,
            mode: Mode::WithoutInput,
            predefined_instructions: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        for (field, v) in [
            ("frame_limit", self.frame_limit),
            ("action_interval_frames", self.action_interval_frames),
            ("capture_interval_frames", self.capture_interval_frames),
            (
                "interaction_interval_frames",
                self.interaction_interval_frames,
            ),
        ] {
            if v == 0 {
                return Err((field, "must be at least 1".into()));
            }
        }
        Ok(())
    }
}
