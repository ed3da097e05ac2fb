//! `spectral-mesh`: batch front end for meshes, splittings, tongues,
//! adjoint realizations and verification reports.
//!
//! Exit status: 0 on success, 1 on a numerical or verification failure,
//! 2 on a configuration or output error.

mod commands;
mod config;
mod custom;
mod error;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Command, RunConfig};
use error::{config as config_error, CliError};
use output::{write_table, Metadata, Table};

const THREADS_VAR: &str = "SPECTRAL_MESH_THREADS";

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize =
        raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            config_error(format!("{THREADS_VAR}='{raw}' is not a positive integer"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| config_error(format!("{THREADS_VAR}: {e}")))
}

/// The table, plus the names of failed checks for `verify`.
fn execute(cfg: &RunConfig) -> Result<(Table, Vec<String>), CliError> {
    let table = match &cfg.command {
        Command::Mesh {
            modes,
            samples,
            source,
            window,
        } => commands::mesh(cfg, *modes, *samples, *source, window.as_deref())?,
        Command::Nodes { modes } => commands::nodes(cfg, *modes)?,
        Command::Split {
            node,
            dir,
            oracle,
            radius,
        } => commands::split(cfg, node, dir, *oracle, *radius)?,
        Command::Tongues {
            node,
            grid,
            ellipses,
        } => commands::tongues(cfg, node.as_deref(), *grid, *ellipses)?,
        Command::Verify {
            node,
            dir,
            pairs,
            window,
        } => {
            return commands::verify(
                cfg,
                node.as_deref(),
                dir.as_deref(),
                *pairs,
                window.as_deref(),
            )
        }
        Command::AdjointDump { lambda } => commands::adjoint_dump(cfg, lambda)?,
    };
    Ok((table, Vec::new()))
}

fn emit(cfg: &RunConfig, table: &Table) -> Result<(), CliError> {
    let meta = Metadata {
        model: cfg.model().kind().to_string(),
        command: cfg.command.name().to_string(),
        version: env!("CARGO_PKG_VERSION"),
        config_hash: cfg.hash(),
    };
    let out_err = |e: io::Error| CliError::Output(e.to_string());
    match &cfg.output {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            write_table(&mut w, table, &meta, cfg.format)?;
            w.flush().map_err(out_err)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write_table(&mut w, table, &meta, cfg.format)?;
            w.flush().map_err(out_err)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let cfg = RunConfig::from_cli(cli)?;
    let (table, failed) = execute(&cfg)?;
    emit(&cfg, &table)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spectral-mesh: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
