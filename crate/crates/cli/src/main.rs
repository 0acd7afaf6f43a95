//! Command-line front end: `ptbs <actions|quantize|verify|oracle> --config run.toml`.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Failure, Output};
use config::{Format, RunConfig};

#[derive(Parser)]
#[command(name = "ptbs", version, about = "Bohr-Sommerfeld quasi-eigenvalues for PT-symmetric symbols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Data format; overrides `[output] format`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Data file; overrides `[output] path`. Without one the data goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Flip the star-product orientation (negative control for `verify`).
    #[arg(long, global = true)]
    debug_flip_star: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Table of S0, S1, S2 and the period over the energy grid.
    Actions,
    /// Quasi-eigenvalues for each h.
    Quantize,
    /// Identity suite plus PT and solvability checks of the configured problem.
    Verify,
    /// Finite-difference spectrum compared with the quasi-eigenvalues.
    Oracle,
}

fn load(cli: &Cli) -> Result<Option<RunConfig>, Failure> {
    cli.config.as_deref().map(config::load).transpose().map_err(Failure::Config)
}

fn execute(cli: &Cli) -> Result<(Output, Option<RunConfig>), Failure> {
    let cfg = load(cli)?;
    let need = |c: &Option<RunConfig>| -> Result<(), Failure> {
        if c.is_none() {
            return Err(Failure::Config("--config is required for this command".into()));
        }
        Ok(())
    };
    let out = match cli.command {
        Command::Verify => commands::verify(cfg.as_ref(), cli.debug_flip_star)?,
        cmd => {
            need(&cfg)?;
            let c = cfg.as_ref().unwrap();
            match cmd {
                Command::Actions => commands::actions(c)?,
                Command::Quantize => commands::quantize(c)?,
                _ => commands::oracle(c)?,
            }
        }
    };
    Ok((out, cfg))
}

fn emit(cli: &Cli, out: &Output, cfg: Option<&RunConfig>) -> Result<(), Failure> {
    let format = cli.format.or(cfg.and_then(|c| c.output.format)).unwrap_or_default();
    let data = match format {
        Format::Csv => out.csv.clone(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.json).map_err(|e| Failure::Config(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    match cli.out.clone().or(cfg.and_then(|c| c.output.path.clone())) {
        Some(path) => {
            std::fs::write(&path, data).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
            println!("{}", out.summary);
            println!("wrote {}", path.display());
        }
        None => {
            eprintln!("{}", out.summary);
            std::io::stdout()
                .write_all(data.as_bytes())
                .map_err(|e| Failure::Config(format!("cannot write to stdout: {e}")))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(&cli).and_then(|(out, cfg)| {
        emit(&cli, &out, cfg.as_ref())?;
        Ok(out.failed)
    });
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
