//! One live simulation driven over HTTP. The session thread owns the
//! simulation and the bridge; handlers talk to it through a channel and read
//! a shared view that the thread keeps current.

use std::sync::{Arc, RwLock};
use std::thread;
use std::time::Duration;

use chatsim_core::capture::{CaptureRecord, SnapshotSettings};
use chatsim_core::executor::{LogRecord, SimSink, Simulation, TrajectoryRecord};
use chatsim_core::llm::{Bridge, InstructionResult};
use chatsim_core::scene::{save_scene, Scene};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::{broadcast, mpsc, oneshot};

use crate::output::RunRecorder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Pause,
    WithInput,
    WithoutInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    FrameAdvanced,
    InstructionResult,
    CaptureWritten,
    RunHalted,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::FrameAdvanced => "frame_advanced",
            EventKind::InstructionResult => "instruction_result",
            EventKind::CaptureWritten => "capture_written",
            EventKind::RunHalted => "run_halted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventEnvelope {
    pub seq: u64,
    pub kind: EventKind,
    pub payload: serde_json::Value,
}

/// State readable without going through the session thread.
#[derive(Debug, Clone)]
pub struct SharedView {
    pub scene: Scene,
    pub frame: u64,
    pub halted: bool,
    pub pending_actions: usize,
    pub mode: RunMode,
    pub awaiting_input: bool,
    pub trajectory: Vec<TrajectoryRecord>,
    pub captures: Vec<CaptureRecord>,
    pub snapshot: SnapshotSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReply {
    pub frame: u64,
    pub stepped: u64,
    pub halted: bool,
}

#[derive(Debug)]
pub enum InstructReply {
    Done(Box<InstructionResult>),
    /// Earlier actions are still queued; try again after this many seconds.
    Busy {
        retry_after_secs: u64,
        pending_actions: usize,
    },
    Halted,
}

#[derive(Debug)]
pub enum Request {
    Instruct {
        text: String,
        reply: oneshot::Sender<InstructReply>,
    },
    Step {
        frames: u64,
        reply: oneshot::Sender<StepReply>,
    },
    Run {
        mode: RunMode,
        reply: oneshot::Sender<RunMode>,
    },
}

struct EventBus {
    next_seq: u64,
    tx: broadcast::Sender<EventEnvelope>,
}

impl EventBus {
    fn publish(&mut self, kind: EventKind, payload: serde_json::Value) {
        let env = EventEnvelope {
            seq: self.next_seq,
            kind,
            payload,
        };
        self.next_seq += 1;
        // no subscribers is fine
        let _ = self.tx.send(env);
    }
}

struct SessionSink<'a> {
    recorder: Option<&'a mut RunRecorder>,
    bus: &'a mut EventBus,
}

impl SimSink for SessionSink<'_> {
    fn frame(&mut self, record: &TrajectoryRecord) {
        if let Some(r) = self.recorder.as_deref_mut() {
            r.frame(record);
        }
        self.bus.publish(EventKind::FrameAdvanced, json!(record));
    }

    fn capture(&mut self, record: &CaptureRecord, scene: &Scene) {
        if let Some(r) = self.recorder.as_deref_mut() {
            r.capture(record, scene);
        }
        self.bus.publish(
            EventKind::CaptureWritten,
            json!({"frame": record.frame, "visible": record.entries.len(), "camera": record.camera}),
        );
    }

    fn log(&mut self, record: &LogRecord) {
        if let Some(r) = self.recorder.as_deref_mut() {
            r.log(record);
        }
    }

    fn instruction(&mut self, result: &InstructionResult) {
        if let Some(r) = self.recorder.as_deref_mut() {
            r.instruction(result);
        }
        self.bus
            .publish(EventKind::InstructionResult, json!(result));
    }

    fn halted(&mut self, frame: u64) {
        self.bus
            .publish(EventKind::RunHalted, json!({ "frame": frame }));
    }
}

pub struct Session {
    sim: Simulation,
    bridge: Bridge,
    recorder: Option<RunRecorder>,
    bus: EventBus,
    view: Arc<RwLock<SharedView>>,
    mode: RunMode,
    frame_delay: Duration,
    /// Frame at which the last interactive instruction was taken in
    /// `with_input` mode, so each boundary reads at most one.
    input_taken_at: Option<u64>,
}

/// Handles for talking to a running session.
#[derive(Clone)]
pub struct SessionHandle {
    pub requests: mpsc::UnboundedSender<Request>,
    pub view: Arc<RwLock<SharedView>>,
    pub events: broadcast::Sender<EventEnvelope>,
}

impl Session {
    pub fn new(
        sim: Simulation,
        bridge: Bridge,
        recorder: Option<RunRecorder>,
        snapshot: SnapshotSettings,
        frame_delay: Duration,
    ) -> (Self, broadcast::Sender<EventEnvelope>) {
        let (tx, _) = broadcast::channel(4096);
        let view = SharedView {
            scene: sim.scene().clone(),
            frame: sim.current_frame(),
            halted: sim.is_halted(),
            pending_actions: 0,
            mode: RunMode::Pause,
            awaiting_input: false,
            trajectory: Vec::new(),
            captures: Vec::new(),
            snapshot,
        };
        let session = Self {
            sim,
            bridge,
            recorder,
            bus: EventBus {
                next_seq: 0,
                tx: tx.clone(),
            },
            view: Arc::new(RwLock::new(view)),
            mode: RunMode::Pause,
            frame_delay,
            input_taken_at: None,
        };
        (session, tx)
    }

    /// Starts the session thread. Predefined instructions run first, each to
    /// completion, before any request is served.
    pub fn spawn(mut self) -> (SessionHandle, thread::JoinHandle<Session>) {
        let (tx, rx) = mpsc::unbounded_channel();
        let handle = SessionHandle {
            requests: tx,
            view: self.view.clone(),
            events: self.bus.tx.clone(),
        };
        let join = thread::Builder::new()
            .name("chatsim-session".into())
            .spawn(move || {
                self.run_predefined();
                self.serve(rx);
                self
            })
            .expect("spawn session thread");
        (handle, join)
    }

    fn sink(&mut self) -> (&mut Simulation, SessionSink<'_>) {
        (
            &mut self.sim,
            SessionSink {
                recorder: self.recorder.as_mut(),
                bus: &mut self.bus,
            },
        )
    }

    fn run_predefined(&mut self) {
        for text in self.sim.config().predefined_instructions.clone() {
            if self.sim.is_halted() {
                break;
            }
            self.instruct(&text);
            let (sim, mut sink) = self.sink();
            sim.drain(&mut sink);
        }
        self.sync();
    }

    fn instruct(&mut self, text: &str) -> InstructionResult {
        let projected = self.sim.projected_scene();
        let result = self.bridge.instruct(text, &projected);
        if result.is_accepted() {
            self.sim.enqueue(&result.commands);
        }
        let (_, mut sink) = self.sink();
        sink.instruction(&result);
        result
    }

    fn at_input_boundary(&self) -> bool {
        let f = self.sim.current_frame();
        self.mode == RunMode::WithInput
            && f.is_multiple_of(self.sim.config().interaction_interval_frames)
            && self.input_taken_at != Some(f)
    }

    /// Applies one request. The shared view is updated before the reply goes
    /// out, so a client reading state after its reply sees the result.
    fn handle(&mut self, req: Request) {
        match req {
            Request::Instruct { text, reply } => {
                let answer = if self.sim.is_halted() {
                    InstructReply::Halted
                } else if !self.sim.is_idle() && !self.at_input_boundary() {
                    let frames = self.sim.pending_actions() as u64
                        * self.sim.config().action_interval_frames;
                    let secs = (frames * self.frame_delay.as_millis() as u64)
                        .div_ceil(1000)
                        .max(1);
                    InstructReply::Busy {
                        retry_after_secs: secs,
                        pending_actions: self.sim.pending_actions(),
                    }
                } else {
                    if self.at_input_boundary() {
                        self.input_taken_at = Some(self.sim.current_frame());
                    }
                    InstructReply::Done(Box::new(self.instruct(&text)))
                };
                self.sync();
                let _ = reply.send(answer);
            }
            Request::Step { frames, reply } => {
                let (sim, mut sink) = self.sink();
                let stepped = sim.step(frames, &mut sink);
                self.sync();
                let _ = reply.send(StepReply {
                    frame: self.sim.current_frame(),
                    stepped,
                    halted: self.sim.is_halted(),
                });
            }
            Request::Run { mode, reply } => {
                self.mode = if self.sim.is_halted() {
                    RunMode::Pause
                } else {
                    mode
                };
                self.sync();
                let _ = reply.send(self.mode);
            }
        }
    }

    fn serve(&mut self, mut rx: mpsc::UnboundedReceiver<Request>) {
        loop {
            let running = self.mode != RunMode::Pause && !self.sim.is_halted();
            let waiting = running && self.at_input_boundary();
            if !running || waiting {
                match rx.blocking_recv() {
                    Some(req) => self.handle(req),
                    None => break,
                }
                continue;
            }
            match rx.try_recv() {
                Ok(req) => {
                    self.handle(req);
                    continue;
                }
                Err(mpsc::error::TryRecvError::Disconnected) => break,
                Err(mpsc::error::TryRecvError::Empty) => {}
            }
            let (sim, mut sink) = self.sink();
            sim.step(1, &mut sink);
            if self.sim.is_halted() {
                self.mode = RunMode::Pause;
            }
            self.sync();
            if !self.frame_delay.is_zero() {
                thread::sleep(self.frame_delay);
            }
        }
    }

    /// Publishes the current state to the shared view and flushes files.
    fn sync(&mut self) {
        if let Some(r) = self.recorder.as_mut() {
            if let Err(e) = r.flush() {
                log::error!("run output: {e}");
            }
            let path = r.dir().join("scene.json");
            if let Err(e) = std::fs::write(&path, save_scene(self.sim.scene())) {
                log::error!("{}: {e}", path.display());
            }
        }
        let awaiting = self.mode == RunMode::WithInput && self.at_input_boundary();
        let mut v = self.view.write().expect("view lock");
        v.scene = self.sim.scene().clone();
        v.frame = self.sim.current_frame();
        v.halted = self.sim.is_halted();
        v.pending_actions = self.sim.pending_actions();
        v.mode = self.mode;
        v.awaiting_input = awaiting;
        let have = v.trajectory.len();
        v.trajectory
            .extend_from_slice(&self.sim.trajectory()[have..]);
        let have = v.captures.len();
        v.captures.extend_from_slice(&self.sim.captures()[have..]);
    }

    pub fn simulation(&self) -> &Simulation {
        &self.sim
    }

    pub fn bridge(&self) -> &Bridge {
        &self.bridge
    }

    /// Writes the final run documents.
    pub fn finish(self) -> std::io::Result<()> {
        if let Some(r) = self.recorder {
            let report = chatsim_core::executor::RunReport {
                frames_executed: self.sim.current_frame(),
                captures_written: self.sim.captures().len(),
                halted: self.sim.is_halted(),
                log: self.sim.log().to_vec(),
                ..Default::default()
            };
            r.finish(self.sim.scene(), self.bridge.transcript(), &report)?;
        }
        Ok(())
    }
}
