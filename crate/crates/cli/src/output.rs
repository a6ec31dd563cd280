//! Run-directory persistence.
//!
//! Layout: `trajectory.jsonl`, `captures.jsonl`, `capture_<frame>.ppm`,
//! `instructions.jsonl`, `log.jsonl`, and at the end `scene.json`,
//! `transcript.jsonl` and `report.json`.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use chatsim_core::capture::{render_topdown, CaptureRecord, SnapshotSettings};
use chatsim_core::executor::{LogRecord, RunReport, SimSink, TrajectoryRecord};
use chatsim_core::llm::{InstructionResult, Transcript};
use chatsim_core::scene::{save_scene, Scene};
use serde::Serialize;

/// Writes simulation output as it happens. I/O errors are kept and reported
/// by [`RunRecorder::finish`], so the frame loop never has to handle them.
pub struct RunRecorder {
    dir: PathBuf,
    snapshot: SnapshotSettings,
    trajectory: BufWriter<File>,
    captures: BufWriter<File>,
    instructions: BufWriter<File>,
    log: BufWriter<File>,
    error: Option<io::Error>,
}

fn create(dir: &Path, name: &str) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_line<T: Serialize>(w: &mut impl Write, value: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    w.write_all(b"\n")
}

impl RunRecorder {
    pub fn create(dir: &Path, snapshot: SnapshotSettings) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            snapshot,
            trajectory: create(dir, "trajectory.jsonl")?,
            captures: create(dir, "captures.jsonl")?,
            instructions: create(dir, "instructions.jsonl")?,
            log: create(dir, "log.jsonl")?,
            error: None,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn keep(&mut self, r: io::Result<()>) {
        if let (Err(e), None) = (r, &self.error) {
            log::error!("writing run output: {e}");
            self.error = Some(e);
        }
    }

    /// Flushes the streams; returns the first error seen.
    pub fn flush(&mut self) -> io::Result<()> {
        let r = self
            .trajectory
            .flush()
            .and_then(|_| self.captures.flush())
            .and_then(|_| self.instructions.flush())
            .and_then(|_| self.log.flush());
        self.keep(r);
        match self.error.take() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Writes the final documents.
    pub fn finish(
        mut self,
        scene: &Scene,
        transcript: &Transcript,
        report: &RunReport,
    ) -> io::Result<()> {
        self.flush()?;
        fs::write(self.dir.join("scene.json"), save_scene(scene))?;
        fs::write(self.dir.join("transcript.jsonl"), transcript.to_jsonl())?;
        let report = serde_json::to_string_pretty(report).map_err(io::Error::other)?;
        fs::write(self.dir.join("report.json"), report)?;
        Ok(())
    }
}

impl SimSink for RunRecorder {
    fn frame(&mut self, record: &TrajectoryRecord) {
        let r = write_line(&mut self.trajectory, record);
        self.keep(r);
    }

    fn capture(&mut self, record: &CaptureRecord, scene: &Scene) {
        let r = write_line(&mut self.captures, record);
        self.keep(r);
        if self.snapshot.enabled {
            let r = match render_topdown(scene, &self.snapshot) {
                Ok(ppm) => fs::write(self.dir.join(format!("capture_{}.ppm", record.frame)), ppm),
                Err(e) => Err(io::Error::other(e)),
            };
            self.keep(r);
        }
    }

    fn log(&mut self, record: &LogRecord) {
        let r = write_line(&mut self.log, record);
        self.keep(r);
    }

    fn instruction(&mut self, result: &InstructionResult) {
        let r = write_line(&mut self.instructions, result);
        self.keep(r);
    }
}
