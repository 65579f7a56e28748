//! Library side of the `quench` command line tool: configuration loading
//! with dotted-path overrides, scenario dispatch, and deterministic CSV/JSON
//! emission.

pub mod config;
pub mod emit;
pub mod scenario;

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Runtime(_) => "runtime",
            CliError::Io(_) => "io",
        }
    }

    /// Machine-readable form for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

/// Command line surface: one positional config path plus overrides.
#[derive(Debug, Clone, clap::Parser)]
#[command(name = "quench", about = "Standing-wave addressing simulator")]
pub struct Args {
    /// Scenario configuration (JSON object; {} selects all defaults)
    pub config: PathBuf,
    /// Override a config key by dotted path, e.g. --set pulses.peak=25
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output file path (overrides config)
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Output format (overrides config)
    #[arg(long, value_enum)]
    pub format: Option<config::OutputFormat>,
    /// Master seed (overrides config)
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Load, override, validate, run, write. Returns the path written.
pub fn run(args: &Args) -> Result<PathBuf, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = config::parse_config(&text, &args.set)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(format) = args.format {
        cfg.output_format = Some(format);
    }
    if let Some(path) = &args.output {
        cfg.output_path = Some(path.display().to_string());
    }
    scenario::run_scenario(&cfg)
}
