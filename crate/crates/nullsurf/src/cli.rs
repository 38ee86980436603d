use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nullsurf_core::evolution::Scheme;

use crate::commands::{self, Outcome};
use crate::config::{parse_number, ScenarioConfig};
use crate::{exit, CliError};

/// Numerical laboratory for timelike minimal surfaces in double-null gauge.
#[derive(Debug, Parser)]
#[command(name = "nullsurf", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario config file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Override the ψ-evolution scheme: leapfrog or characteristic.
    #[arg(long, global = true, value_name = "NAME")]
    pub scheme: Option<String>,
    /// Override the grid step (fractions like 1/128 are fine); a
    /// convergence ladder restarts from it.
    #[arg(long, global = true, value_name = "H")]
    pub resolution: Option<String>,
    /// Print nothing on success.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Convert graph data to null-gauge data (lambda0, nu0, psi0, psi1).
    Convert,
    /// Evolve ψ and write snapshots plus the monitor report.
    Evolve,
    /// Rebuild the embedding, regraph it, and report its defects.
    Reconstruct,
    /// Run every configured check; exit 5 if any fails.
    Verify,
    /// Convergence study of the configured pipeline.
    Convergence,
}

fn load(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    let path = cli.config.as_deref().ok_or_else(|| CliError::Usage("--config PATH is required".into()))?;
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(s) = &cli.scheme {
        cfg = cfg.with_scheme(Scheme::parse(s).map_err(|e| CliError::Usage(e.to_string()))?);
    }
    if let Some(h) = &cli.resolution {
        let h = parse_number(h)?;
        if !(h > 0.0) {
            return Err(CliError::Usage("--resolution must be positive".into()));
        }
        cfg = cfg.with_resolution(h);
    }
    Ok(cfg)
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = load(cli)?;
    let out: &Path = &cli.out;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    match cli.command {
        Command::Convert => commands::convert(&cfg, out),
        Command::Evolve => commands::evolve_cmd(&cfg, out),
        Command::Reconstruct => commands::reconstruct(&cfg, out),
        Command::Verify => commands::verify(&cfg, out),
        Command::Convergence => commands::convergence(&cfg, out),
    }
}

/// Parse `args`, run, print, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    match execute(&cli) {
        Ok(o) => {
            if !cli.quiet || !o.passed {
                for l in &o.lines {
                    println!("{l}");
                }
            }
            if o.passed {
                exit::OK
            } else {
                exit::VERIFICATION
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("usage: nullsurf <convert|evolve|reconstruct|verify|convergence> --config PATH [--out DIR]");
            }
            e.exit_code()
        }
    }
}
