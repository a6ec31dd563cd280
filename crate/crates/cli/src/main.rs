use std::fs;
use std::io::{self, BufRead};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chatsim_cli::app::{load_provider_override, run_to_completion, validate_source, CliError};
use chatsim_cli::config::AppConfig;
use chatsim_cli::service;
use chatsim_core::executor::Mode;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "chatsim",
    version,
    about = "Language-driven underwater simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ModeArg {
    WithInput,
    WithoutInput,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured simulation to its frame limit.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Provider block or replay fixture that replaces the configured provider.
        #[arg(long)]
        provider: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check a script file without running it.
    Validate { script: PathBuf },
    /// Serve the HTTP API for one live simulation.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        port: Option<u16>,
    },
}

fn load(config: &Path) -> Result<AppConfig, CliError> {
    Ok(AppConfig::load(config)?)
}

fn run(
    config: PathBuf,
    mode: Option<ModeArg>,
    provider: Option<PathBuf>,
    output: Option<PathBuf>,
) -> Result<i32, CliError> {
    let mut cfg = load(&config)?;
    if let Some(m) = mode {
        cfg.run.mode = match m {
            ModeArg::WithInput => Mode::WithInput,
            ModeArg::WithoutInput => Mode::WithoutInput,
        };
    }
    if let Some(p) = provider {
        cfg.provider = load_provider_override(&p)?;
    }
    if let Some(o) = output {
        cfg.output_dir = o;
    }
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines().map_while(Result::ok);
    let outcome = run_to_completion(&cfg, &mut lines)?;
    let r = &outcome.report;
    println!(
        "{} frames, {} instructions ({} accepted, {} rejected, {} provider errors), {} captures -> {}",
        r.frames_executed,
        r.instructions_processed,
        r.accepted,
        r.rejected,
        r.provider_errors,
        r.captures_written,
        outcome.output_dir.display()
    );
    Ok(outcome.exit_code)
}

fn serve(config: PathBuf, port: Option<u16>) -> Result<i32, CliError> {
    let cfg = load(&config)?;
    let port = port.unwrap_or(cfg.port);
    let rt = tokio::runtime::Runtime::new().map_err(|source| CliError::Io {
        context: "starting runtime".into(),
        source,
    })?;
    rt.block_on(service::serve(&cfg, port))?;
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            mode,
            provider,
            output,
        } => run(config, mode, provider, output),
        Command::Validate { script } => match fs::read_to_string(&script) {
            Ok(src) => match validate_source(&src, &mut io::stdout()) {
                Ok(clean) => Ok(i32::from(!clean)),
                Err(source) => Err(CliError::Io {
                    context: "writing output".into(),
                    source,
                }),
            },
            Err(source) => Err(CliError::Io {
                context: format!("reading {}", script.display()),
                source,
            }),
        },
        Command::Serve { config, port } => serve(config, port),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
