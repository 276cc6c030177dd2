//! `igp`: command-line front end for the intraguild-predation toolkit.
//!
//! Exit codes: 0 on success (including "not found" outcomes), 1 for usage or
//! configuration errors, 2 for numerical failures.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Numerical(_) => 2,
        }
    }
}

impl From<igp_core::Error> for CliError {
    fn from(e: igp_core::Error) -> Self {
        Self::Numerical(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Numerical(format!("i/o: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "igp",
    version,
    about = "Three-species intraguild predation with predator switching"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file (`[section]` headers, `key = value` lines).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one setting; `section.key=value` or a bare unique key.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Directory for outputs; created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,

    /// Worker threads for sweeps. Output does not depend on it.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Integrate one trajectory and write it as CSV.
    Simulate,
    /// List the five steady states with feasibility and stability.
    Equilibria,
    /// Saddle-focus chaos test at the coexistence point.
    Silnikov,
    /// Parameter sweep with extrema, exponents and the threshold bracket.
    Sweep,
    /// Largest Lyapunov exponent from the initial state.
    Lyapunov,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Equilibria => "equilibria",
            Self::Silnikov => "silnikov",
            Self::Sweep => "sweep",
            Self::Lyapunov => "lyapunov",
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let (source, path) = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            (text, p.display().to_string())
        }
        None => (String::new(), "<defaults>".to_owned()),
    };
    RunConfig::load(&source, &path, &cli.set)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    let jobs = cli.jobs.map(|j| j as usize).unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });
    let out = commands::Output::create(&cli.out)?;
    out.write(
        &format!("{}-manifest.conf", cli.command.name()),
        &cfg.manifest(cli.command.name()),
    )?;
    match cli.command {
        Command::Simulate => commands::simulate(&cfg, &out),
        Command::Equilibria => commands::equilibria(&cfg, &out),
        Command::Silnikov => commands::silnikov(&cfg, &out),
        Command::Sweep => commands::sweep(&cfg, &out, jobs),
        Command::Lyapunov => commands::lyapunov(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("igp {}: {e}", cli.command.name());
            ExitCode::from(e.code())
        }
    }
}
