//! `parasim`: sweeps, beam-pattern tables and impedance-matrix export.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use parasim::config::{from_json, invalid_to_error, Validate, ZMatrixConfig};
use parasim::em_model::{assemble_impedance, export_impedance};
use parasim::pattern::{run_pattern, PatternConfig, PatternMode};
use parasim::sweep::{format_sweep_csv, run_sweep, SweepConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "parasim", version, about = "Hybrid parasitic array beamforming experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo sweep of spectral and energy efficiency.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `trials` from the config.
        #[arg(long)]
        trials: Option<usize>,
        /// Overrides `seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Beam-pattern table versus angle.
    Pattern {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = ["maxgain", "fixedload"])]
        mode: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Writes the impedance matrix of a dipole array.
    Zmatrix {
        #[arg(long)]
        geom: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure that maps to a specific exit status.
struct Exit {
    code: u8,
    error: anyhow::Error,
}

fn config_error(e: impl Into<anyhow::Error>) -> Exit {
    Exit {
        code: EXIT_CONFIG,
        error: e.into(),
    }
}

impl From<anyhow::Error> for Exit {
    fn from(error: anyhow::Error) -> Self {
        Exit { code: 1, error }
    }
}

fn read_config<T: serde::de::DeserializeOwned + Validate>(path: &Path) -> Result<(String, T), Exit> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(config_error)?;
    let value = from_json(&text)
        .with_context(|| format!("{}", path.display()))
        .map_err(config_error)?;
    Ok((text, value))
}

fn write(path: &Path, contents: &str) -> Result<(), Exit> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn sweep(config: &Path, trials: Option<usize>, seed: Option<u64>, out: &Path) -> Result<(), Exit> {
    let (text, mut cfg): (String, SweepConfig) = read_config(config)?;
    if let Some(t) = trials {
        cfg.trials = t;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.check()
        .map_err(|inv| config_error(anyhow::Error::new(invalid_to_error(&text, &inv)).context(config.display().to_string())))?;
    let result = run_sweep(&cfg).map_err(anyhow::Error::new)?;
    write(out, &format_sweep_csv(&result, &cfg).map_err(anyhow::Error::new)?)?;
    let rate = result.failure_rate();
    if rate > 0.5 {
        return Err(Exit {
            code: EXIT_NUMERICAL,
            error: anyhow::anyhow!("{:.1}% of trial evaluations failed", 100.0 * rate),
        });
    }
    log::info!("wrote {} rows to {}", result.rows.len(), out.display());
    Ok(())
}

fn pattern(config: &Path, mode: Option<&str>, out: &Path) -> Result<(), Exit> {
    let (text, mut cfg): (String, PatternConfig) = read_config(config)?;
    if let Some(m) = mode {
        cfg.mode = Some(m.parse::<PatternMode>().map_err(config_error)?);
    }
    cfg.check()
        .map_err(|inv| config_error(anyhow::Error::new(invalid_to_error(&text, &inv)).context(config.display().to_string())))?;
    let table = run_pattern(&cfg.theta.radians(), &cfg).map_err(anyhow::Error::new)?;
    write(out, &table.to_csv(&cfg).map_err(anyhow::Error::new)?)
}

fn zmatrix(geom: &Path, out: &Path) -> Result<(), Exit> {
    let (_, cfg): (String, ZMatrixConfig) = read_config(geom)?;
    let spec = cfg.dipole.spec().map_err(config_error)?;
    let array = cfg.geometry.build(&spec).map_err(config_error)?;
    let z = assemble_impedance(&array).map_err(anyhow::Error::new)?;
    export_impedance(&z, cfg.z0, out)
        .with_context(|| format!("writing {}", out.display()))
        .map_err(Exit::from)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep {
            config,
            trials,
            seed,
            out,
        } => sweep(config, *trials, *seed, out),
        Command::Pattern { config, mode, out } => pattern(config, mode.as_deref(), out),
        Command::Zmatrix { geom, out } => zmatrix(geom, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
