//! `gazeprompt`: synthesize, analyze and prompt offline; replay and serve live.
//!
//! Exit codes: 0 success, 1 data or runtime error, 2 usage error.

mod client;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use gazeprompt_core::{
    analyze, prompt_for_session, read_recording, synth_trace, write_recording, GazeRecording, InteractionMode,
    MetricsError, ProfileKind, RecordingFormat, ScanpathProfile,
};
use gazeprompt_service::{registry_from_config, ServiceConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "gazeprompt", version, about = "Gaze-informed refactoring prompts")]
struct Cli {
    /// Configuration file (thresholds, fixation, backend, session defaults).
    #[arg(long, global = true, env = "GAZE_PROMPT_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Jsonl,
    Csv,
}

impl From<FormatArg> for RecordingFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Jsonl => RecordingFormat::Jsonl,
            FormatArg::Csv => RecordingFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProfileArg {
    Novice,
    Expert,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Realtime,
    Preset,
}

impl From<ModeArg> for InteractionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Realtime => InteractionMode::Realtime,
            ModeArg::Preset => InteractionMode::Preset,
        }
    }
}

#[derive(Debug, Args)]
struct Input {
    /// Recording file.
    recording: PathBuf,
    /// Recording format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

impl Input {
    fn load(&self) -> Result<GazeRecording, CliError> {
        let format = self
            .format
            .map(Into::into)
            .unwrap_or_else(|| RecordingFormat::from_path(&self.recording));
        read_recording(&self.recording, format).map_err(data)
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("expected a positive number, got `{s}`")),
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(format!("expected a non-negative number, got `{s}`")),
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded synthetic recording.
    Synth {
        #[arg(long, value_enum, default_value = "novice")]
        profile: ProfileArg,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long = "duration-ms", value_parser = positive, default_value = "30000")]
        duration_ms: f64,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print the four gaze metrics of a recording.
    Analyze {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        json: bool,
    },
    /// Print the triggered flags and the prompt for a recording.
    Prompt {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        json: bool,
    },
    /// Stream a recording into a running service session.
    Replay {
        #[command(flatten)]
        input: Input,
        /// Service base URL.
        #[arg(long, default_value = "http://127.0.0.1:7878")]
        target: String,
        /// Playback speed; 0 sends as fast as possible.
        #[arg(long, value_parser = non_negative, default_value = "1")]
        speed: f64,
        /// Samples per request.
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
        batch: u64,
        /// Session id to create; the service picks one when omitted.
        #[arg(long)]
        session: Option<String>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Code under review; the service default snippet when omitted.
        #[arg(long)]
        snippet: Option<PathBuf>,
        /// Trigger prompt generation after the last sample.
        #[arg(long)]
        trigger: bool,
        /// Confirm the prompt and refactor (implies --trigger).
        #[arg(long)]
        confirm: bool,
        /// Close the session at the end.
        #[arg(long)]
        close: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run the session service.
    Serve {
        #[arg(long)]
        bind: Option<String>,
        /// Overrides the configured journal directory.
        #[arg(long = "log-dir")]
        log_dir: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>) -> Result<ServiceConfig, CliError> {
    match path {
        Some(p) => ServiceConfig::load(p).map_err(|e| CliError::Usage(e.to_string())),
        None => Ok(ServiceConfig::default()),
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(data)?;
    writeln!(out).map_err(data)
}

fn metrics_error(e: MetricsError) -> CliError {
    CliError::Data(format!("insufficient data: {e}"))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Synth {
            profile,
            seed,
            duration_ms,
            format,
            out,
            json,
        } => {
            let kind = match profile {
                ProfileArg::Novice => ProfileKind::Novice,
                ProfileArg::Expert => ProfileKind::Expert,
            };
            let trace = synth_trace(
                &ScanpathProfile::for_kind(kind, seed),
                &config.session.geometry,
                duration_ms,
            )
            .map_err(|e| CliError::Usage(e.to_string()))?;
            let format = format
                .map(Into::into)
                .unwrap_or_else(|| RecordingFormat::from_path(&out));
            write_recording(&trace.recording, &out, format).map_err(data)?;
            let summary = report::SynthSummary {
                path: out.display().to_string(),
                profile: kind.to_string(),
                seed,
                samples: trace.recording.len(),
                dwells: trace.dwells.len(),
            };
            if json {
                print_json(&summary)
            } else {
                println!(
                    "wrote {} samples ({} planned dwells) to {}",
                    summary.samples, summary.dwells, summary.path
                );
                Ok(())
            }
        }
        Command::Analyze { input, json } => {
            let rec = input.load()?;
            let metrics = analyze(&rec, &config.fixation).map_err(metrics_error)?;
            if json {
                print_json(&metrics)
            } else {
                print!("{}", report::metrics_table(&metrics, &config.thresholds));
                Ok(())
            }
        }
        Command::Prompt { input, mode, json } => {
            let rec = input.load()?;
            let metrics = analyze(&rec, &config.fixation).map_err(metrics_error)?;
            let mode = mode.map(Into::into).unwrap_or(config.session.mode);
            let (flags, prompt) = prompt_for_session(&metrics, &config.thresholds, mode);
            if json {
                print_json(&serde_json::json!({ "flags": flags, "prompt": prompt }))
            } else {
                println!("flags: {}", report::flag_names(&flags));
                println!("{}", prompt.text);
                Ok(())
            }
        }
        Command::Replay {
            input,
            target,
            speed,
            batch,
            session,
            mode,
            snippet,
            trigger,
            confirm,
            close,
            json,
        } => {
            let rec = input.load()?;
            let source_code = snippet
                .map(|p| std::fs::read_to_string(&p).map_err(|e| data(format!("{}: {e}", p.display()))))
                .transpose()?;
            let plan = client::ReplayPlan {
                target,
                speed,
                batch: batch as usize,
                session_id: session,
                mode: mode.map(Into::into),
                source_code,
                geometry: config.session.geometry.clone(),
                trigger: trigger || confirm,
                confirm,
                close,
            };
            let outcome = client::run_replay(&rec, &plan)?;
            if json {
                print_json(&outcome)
            } else {
                print!("{}", report::replay_text(&outcome));
                Ok(())
            }
        }
        Command::Serve { bind, log_dir } => {
            let mut config = config;
            if let Some(b) = bind {
                config.bind = b;
            }
            if let Some(dir) = log_dir {
                config.log_dir = std::env::current_dir().map_err(data)?.join(dir);
            }
            serve(config)
        }
    }
}

fn serve(config: ServiceConfig) -> Result<(), CliError> {
    let runtime = tokio::runtime::Runtime::new().map_err(data)?;
    runtime.block_on(async move {
        let listener = gazeprompt_service::http::bind(&config.bind)
            .await
            .map_err(|e| data(format!("cannot bind {}: {e}", config.bind)))?;
        let addr = listener.local_addr().map_err(data)?;
        let registry = registry_from_config(config).map_err(|e| CliError::Usage(e.to_string()))?;
        // The address line lets scripts bound to port 0 find the service.
        println!("listening on http://{addr}");
        std::io::stdout().flush().map_err(data)?;
        tokio::select! {
            r = gazeprompt_service::http::serve(listener, registry) => r.map_err(data),
            _ = tokio::signal::ctrl_c() => Ok(()),
        }
    })
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_env("GAZE_PROMPT_LOG")
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gazeprompt: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("run `gazeprompt --help` for usage");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
