mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;

/// Unfolding of optic-axis degeneracies in absorbing, optically active crystals.
#[derive(Debug, Parser)]
#[command(name = "unfold", version)]
struct Cli {
    /// TOML run configuration; the bundled reference crystal when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Optic axis by the signs of (s1, s3).
    #[arg(long, global = true, value_parser = ["++", "+-", "-+", "--"], allow_hyphen_values = true)]
    axis: Option<String>,
    /// Multiplier t applied to the absorbing and chiral parts.
    #[arg(long, global = true, value_name = "t", allow_hyphen_values = true)]
    scale: Option<f64>,
    /// Output file.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Grid points per side.
    #[arg(long, global = true, value_name = "N")]
    grid: Option<usize>,
    /// Window half-width (ring radii for unfold-hermitian).
    #[arg(long = "half-width", global = true, value_name = "W")]
    half_width: Option<f64>,
    /// Print the effective configuration and exit.
    #[arg(long = "dump-config", global = true)]
    dump_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// List the four optic axes.
    Axes,
    /// Per-axis discriminant, regime and singular axes.
    Classify,
    /// Sheets and exact eigenvalues over a window around an axis.
    Surface,
    /// Planar section through the exceptional ring of a Hermitian example.
    UnfoldHermitian,
    /// Run the numerical self-checks.
    Validate,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0:#}")]
    Config(anyhow::Error),
    #[error("{0} check(s) failed")]
    Validation(usize),
    #[error("{0:#}")]
    Runtime(anyhow::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Validation(_) | CliError::Runtime(_) => 1,
        }
    }
}

fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref()).map_err(CliError::Config)?;
    let hermitian = cli.command == Some(Command::UnfoldHermitian);
    if let Some(a) = &cli.axis {
        cfg.grid.axis = a.clone();
    }
    if let Some(t) = cli.scale {
        cfg.grid.perturbation_scale = t;
    }
    if let Some(n) = cli.grid {
        if hermitian {
            cfg.hermitian.resolution = n;
        } else {
            cfg.grid.resolution = n;
        }
    }
    if let Some(w) = cli.half_width {
        if hermitian {
            cfg.hermitian.half_width_radii = w;
        } else {
            cfg.grid.half_width = w;
        }
    }
    let writes_csv = matches!(
        cli.command,
        Some(Command::Surface | Command::UnfoldHermitian)
    );
    if let (Some(out), true) = (&cli.out, writes_csv) {
        *commands::csv_target(&mut cfg, hermitian) = out.clone();
    }
    cfg.validate().map_err(CliError::Config)?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = effective_config(cli)?;
    if cli.dump_config {
        print!("{}", cfg.to_toml().map_err(CliError::Runtime)?);
        return Ok(());
    }
    let out = cli.out.as_deref();
    match cli.command {
        None => Err(CliError::Config(anyhow::anyhow!(
            "no subcommand given; see --help"
        ))),
        Some(Command::Axes) => commands::axes(&cfg, out),
        Some(Command::Classify) => commands::classify(&cfg, out),
        Some(Command::Surface) => commands::surface(&cfg),
        Some(Command::UnfoldHermitian) => commands::unfold_hermitian(&cfg),
        Some(Command::Validate) => commands::validate(&cfg, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
