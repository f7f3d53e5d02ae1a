#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use insulation_core::Error as CoreError;

use crate::commands::{Output, Status};
use crate::config::RunConfig;

/// Optimal boundary insulation for the Robin Laplacian.
#[derive(Parser)]
#[command(name = "insulation", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize λ over insulation profiles of one mass
    Solve(Flags),
    /// λ_m and radiality over a (beta, mass) grid
    Sweep(Flags),
    /// Dirichlet, Neumann and Robin eigenvalues and β*, FEM against the disk oracles
    Reference(Flags),
    /// Thin-layer eigenvalues approaching the insulated Robin limit
    Gamma(Flags),
    /// Mesh statistics
    MeshInfo(Flags),
}

#[derive(Args)]
struct Flags {
    /// key = value file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// disk:R, polygon:N:R, rect:W:H or convex:x1:y1:x2:y2:...
    #[arg(long)]
    domain: Option<String>,
    /// Robin coefficient; comma-separated list for sweep
    #[arg(long)]
    beta: Option<String>,
    /// Insulation mass; comma-separated list for sweep
    #[arg(long)]
    mass: Option<String>,
    #[arg(long)]
    mesh_h: Option<String>,
    /// Relative decrease of λ below which the alternation stops
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    /// Worker threads for sweep
    #[arg(long)]
    jobs: Option<String>,
    /// Directory for output files
    #[arg(long)]
    out: Option<String>,
    /// Seed of the randomized optimality audit
    #[arg(long)]
    seed: Option<String>,
    /// Layer profile for gamma
    #[arg(long)]
    layer_h: Option<String>,
    /// Comma-separated decreasing layer scales for gamma
    #[arg(long)]
    eps: Option<String>,
}

impl Flags {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let pairs = [
            ("domain", &self.domain),
            ("beta", &self.beta),
            ("mass", &self.mass),
            ("mesh_h", &self.mesh_h),
            ("tol", &self.tol),
            ("max_iter", &self.max_iter),
            ("jobs", &self.jobs),
            ("out", &self.out),
            ("seed", &self.seed),
            ("layer_h", &self.layer_h),
            ("eps", &self.eps),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v).map_err(|e| e.context(format!("--{}", key.replace('_', "-"))))?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Configuration problems exit with 1; numerical failures with 2.
fn run(cli: Cli) -> std::result::Result<Status, (u8, anyhow::Error)> {
    let (flags, cmd): (&Flags, fn(&RunConfig) -> Result<Output>) = match &cli.command {
        Command::Solve(f) => (f, commands::solve),
        Command::Sweep(f) => (f, commands::sweep),
        Command::Reference(f) => (f, commands::reference),
        Command::Gamma(f) => (f, commands::gamma),
        Command::MeshInfo(f) => (f, commands::mesh_info),
    };
    let cfg = flags.resolve().map_err(|e| (1, e))?;
    let output = cmd(&cfg).map_err(|e| (exit_code(&e), e))?;
    if let Some(dir) = &cfg.out {
        output.write_files(dir).map_err(|e| (1, e))?;
    }
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(output.stdout.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| (1, e.into()))?;
    Ok(output.status)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<CoreError>() {
        Some(
            CoreError::SolverDiverged { .. }
            | CoreError::EigenNotConverged { .. }
            | CoreError::NonDescent { .. }
            | CoreError::Bracket { .. }
            | CoreError::MassIdentity { .. }
            | CoreError::DegenerateTrace,
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::NotConverged) => {
            eprintln!("warning: alternating minimization did not converge");
            ExitCode::from(2)
        }
        Err((code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
