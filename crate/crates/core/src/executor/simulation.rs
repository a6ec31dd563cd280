use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::action::{compile, Action};
use super::RunConfig;
use crate::capture::{capture, CameraIntrinsics, CaptureRecord};
use crate::command::Command;
use crate::llm::InstructionResult;
use crate::scene::{shortest_arc, Orientation, Scene, Vec3};

/// Agent pose after a frame was processed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub frame: u64,
    pub position: Vec3,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub frame: u64,
    pub label: String,
    pub value: Vec3,
}

/// Observer of simulation progress. All methods default to doing nothing.
pub trait SimSink {
    fn frame(&mut self, _record: &TrajectoryRecord) {}
    fn capture(&mut self, _record: &CaptureRecord, _scene: &Scene) {}
    fn log(&mut self, _record: &LogRecord) {}
    fn instruction(&mut self, _result: &InstructionResult) {}
    fn halted(&mut self, _frame: u64) {}
}

/// Sink that ignores everything.
pub struct NullSink;

impl SimSink for NullSink {}

#[derive(Debug, Clone, PartialEq)]
struct Active {
    action: Action,
    start_frame: u64,
}

/// The live scene plus its action queue and frame clock.
///
/// Frames are numbered from 0. Processing frame `f` means: advance the active
/// action; if none is active and `f` is a multiple of the action interval,
/// begin the next queued action; capture if `f` is a multiple of the capture
/// interval; append the trajectory record for `f`. The clock halts once
/// `frame_limit` frames have been processed.
#[derive(Debug, Clone)]
pub struct Simulation {
    scene: Scene,
    config: RunConfig,
    intrinsics: CameraIntrinsics,
    queue: VecDeque<Action>,
    active: Option<Active>,
    frame: u64,
    halted: bool,
    trajectory: Vec<TrajectoryRecord>,
    captures: Vec<CaptureRecord>,
    log: Vec<LogRecord>,
}

impl Simulation {
    pub fn new(scene: Scene, config: RunConfig, intrinsics: CameraIntrinsics) -> Self {
        Self {
            scene,
            config,
            intrinsics,
            queue: VecDeque::new(),
            active: None,
            frame: 0,
            halted: false,
            trajectory: Vec::new(),
            captures: Vec::new(),
            log: Vec::new(),
        }
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn intrinsics(&self) -> &CameraIntrinsics {
        &self.intrinsics
    }

    /// Next frame to be processed; equals the number of frames processed.
    pub fn current_frame(&self) -> u64 {
        self.frame
    }

    pub fn is_halted(&self) -> bool {
        self.halted
    }

    /// No action running and none queued.
    pub fn is_idle(&self) -> bool {
        self.active.is_none() && self.queue.is_empty()
    }

    pub fn pending_actions(&self) -> usize {
        self.queue.len() + usize::from(self.active.is_some())
    }

    pub fn trajectory(&self) -> &[TrajectoryRecord] {
        &self.trajectory
    }

    pub fn captures(&self) -> &[CaptureRecord] {
        &self.captures
    }

    pub fn log(&self) -> &[LogRecord] {
        &self.log
    }

    pub fn enqueue(&mut self, commands: &[Command]) {
        self.queue.extend(commands.iter().flat_map(compile));
    }

    /// The scene as it will be once every pending action has finished.
    pub fn projected_scene(&self) -> Scene {
        let mut scene = self.scene.clone();
        let pending = self.active.iter().map(|a| &a.action).chain(&self.queue);
        for action in pending {
            if let Err(e) = action.apply_final(&mut scene) {
                log::error!("pending action {action:?} cannot be projected: {e}");
            }
        }
        scene
    }

    /// Processes up to `n` frames; returns how many were processed.
    pub fn step(&mut self, n: u64, sink: &mut dyn SimSink) -> u64 {
        let mut done = 0;
        while done < n && !self.halted {
            self.process_frame(sink);
            done += 1;
        }
        done
    }

    /// Steps until no action is pending or the clock halts.
    pub fn drain(&mut self, sink: &mut dyn SimSink) -> u64 {
        let mut done = 0;
        while !self.is_idle() && !self.halted {
            self.process_frame(sink);
            done += 1;
        }
        done
    }

    fn process_frame(&mut self, sink: &mut dyn SimSink) {
        let f = self.frame;
        let interval = self.config.action_interval_frames;

        if let Some(active) = &self.active {
            let elapsed = f - active.start_frame;
            if elapsed > 0 {
                let t = elapsed as f64 / interval as f64;
                let finished = elapsed >= interval;
                self.progress(t, finished);
                if finished {
                    self.active = None;
                }
            }
        }

        if self.active.is_none() && f.is_multiple_of(interval) {
            if let Some(action) = self.queue.pop_front() {
                self.begin(action, f, sink);
            }
        }

        if f.is_multiple_of(self.config.capture_interval_frames) {
            let record = capture(&self.scene, f, &self.intrinsics);
            sink.capture(&record, &self.scene);
            self.captures.push(record);
        }

        let agent = self.scene.agent();
        let record = TrajectoryRecord {
            frame: f,
            position: agent.position,
            orientation: agent.orientation,
        };
        sink.frame(&record);
        self.trajectory.push(record);

        self.frame += 1;
        if self.frame >= self.config.frame_limit {
            self.halted = true;
            sink.halted(self.frame);
        }
    }

    fn begin(&mut self, mut action: Action, frame: u64, sink: &mut dyn SimSink) {
        let agent = *self.scene.agent();
        match &mut action {
            Action::MoveTo { start, .. } => *start = Some(agent.position),
            Action::RotateTo { axis, start, .. } => *start = Some(agent.orientation.get(*axis)),
            Action::Log { label, value } => {
                let record = LogRecord {
                    frame,
                    label: label.clone(),
                    value: *value,
                };
                log::info!("frame {frame}: {} = {}", record.label, record.value);
                sink.log(&record);
                self.log.push(record);
            }
            _ => {}
        }
        if action.is_instant() {
            if let Err(e) = action.apply_final(&mut self.scene) {
                log::error!("frame {frame}: {action:?} failed: {e}");
            }
        }
        self.active = Some(Active {
            action,
            start_frame: frame,
        });
    }

    fn progress(&mut self, t: f64, finished: bool) {
        let Some(active) = &self.active else { return };
        let result = match &active.action {
            Action::MoveTo { target, start } => {
                let p = if finished {
                    *target
                } else {
                    start.unwrap_or(*target).lerp(*target, t)
                };
                self.scene.set_agent_position(p)
            }
            Action::RotateTo {
                axis,
                target,
                start,
            } => {
                let angle = if finished {
                    *target
                } else {
                    let s = start.unwrap_or(*target);
                    s + shortest_arc(s, *target) * t
                };
                self.scene.set_agent_angle(*axis, angle)
            }
            _ => Ok(()),
        };
        if let Err(e) = result {
            log::error!("interpolation failed: {e}");
        }
    }
}
