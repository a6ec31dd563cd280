//! Wiring shared by the `run` command and the service.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chatsim_core::chatscript::{parse, validate, Catalog, Finding, FindingCode, SyntaxError};
use chatsim_core::executor::{run, InputSource, Mode, RunReport, Simulation};
use chatsim_core::llm::{build_provider, Bridge, ProviderConfig, ProviderError, ReplayProvider};
use chatsim_core::worldgen::{generate, WorldgenError};
use thiserror::Error;

use crate::config::{AppConfig, ConfigError};
use crate::output::RunRecorder;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    World(#[from] WorldgenError),
    #[error("cannot bind port {port}: {source}")]
    Bind {
        port: u16,
        #[source]
        source: io::Error,
    },
}

pub(crate) fn io_error(context: impl Into<String>) -> impl FnOnce(io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

pub fn build_simulation(config: &AppConfig) -> Result<Simulation, CliError> {
    let scene = generate(&config.world.scatter, &config.world.terrain)?;
    Ok(Simulation::new(scene, config.run.clone(), config.camera))
}

pub fn build_bridge(config: &AppConfig) -> Result<Bridge, CliError> {
    Ok(Bridge::new(
        build_provider(&config.provider)?,
        Catalog::standard(),
    ))
}

/// Reads a `--provider` override: either a provider block as it would appear
/// in the config, or a replay fixture file used as is.
pub fn load_provider_override(path: &Path) -> Result<ProviderConfig, CliError> {
    let json = fs::read_to_string(path).map_err(io_error(format!("reading {}", path.display())))?;
    if let Ok(provider) = serde_json::from_str::<ProviderConfig>(&json) {
        provider
            .validate()
            .map_err(|(field, message)| ConfigError::Invalid {
                field: format!("provider.{field}"),
                message,
            })?;
        return Ok(provider);
    }
    ReplayProvider::from_json(&json)?;
    Ok(ProviderConfig::Replay {
        fixture: path.to_path_buf(),
    })
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub output_dir: PathBuf,
    pub exit_code: i32,
}

/// Builds the world, runs it to completion and writes the run directory.
/// Exit code 1 when a provider call failed outright in `without_input` mode.
pub fn run_to_completion(
    config: &AppConfig,
    input: &mut dyn InputSource,
) -> Result<RunOutcome, CliError> {
    let mut sim = build_simulation(config)?;
    let mut bridge = build_bridge(config)?;
    let dir = &config.output_dir;
    let mut recorder = RunRecorder::create(dir, config.snapshot)
        .map_err(io_error(format!("creating {}", dir.display())))?;
    let report = run(&mut sim, &mut bridge, input, &mut recorder);
    recorder
        .finish(sim.scene(), bridge.transcript(), &report)
        .map_err(io_error(format!("writing {}", dir.display())))?;
    let hard_failure = config.run.mode == Mode::WithoutInput && report.provider_errors > 0;
    Ok(RunOutcome {
        report,
        output_dir: dir.clone(),
        exit_code: i32::from(hard_failure),
    })
}

/// Checks a script file. Prints one `line:col code message` line per finding
/// and returns whether the script is clean.
pub fn validate_source(source: &str, out: &mut dyn Write) -> io::Result<bool> {
    let script = match parse(source) {
        Ok(s) => s,
        Err(e) => {
            let code = match e {
                SyntaxError::Lex(_) => FindingCode::LexError,
                SyntaxError::Parse(_) => FindingCode::ParseError,
            };
            writeln!(out, "{}", Finding::error(code, e.span(), e.to_string()))?;
            return Ok(false);
        }
    };
    let report = validate(&script, &Catalog::standard());
    for f in &report.findings {
        writeln!(out, "{f}")?;
    }
    Ok(report.is_empty())
}
