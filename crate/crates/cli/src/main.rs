mod format;
mod reproduce;
mod setup;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use telecert::certify::{teleportation_robustness_dual_with, teleportation_robustness_with};
use telecert::SolveStatus;

use crate::format::display;
use crate::setup::ScenarioArgs;

/// Certify quantum teleportation from teleportation data.
#[derive(Parser, Debug)]
#[command(name = "telecert", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Robustness of one scenario's teleportation data.
    Robustness(RobustnessArgs),
    /// Regenerate a published figure or table and check it against its
    /// closed form.
    Reproduce(reproduce::ReproduceArgs),
    /// Evaluate quantities on a grid of the noise parameter.
    Sweep(sweep::SweepArgs),
}

#[derive(Args, Debug)]
struct RobustnessArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Solve through the dual and report the extracted witness.
    #[arg(long)]
    dual: bool,
    /// Write the full result (value, certificate, diagnostics) as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the report as JSON instead of text.
    #[arg(long)]
    json: bool,
}

/// Failure classes mapped to exit codes: 1 for bad input, 2 for solver
/// failure, 3 for a reproduction check that did not pass.
#[derive(Debug)]
pub enum Failure {
    Solver(String),
    Check(String),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Solver(m) | Self::Check(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for Failure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return match f {
                Failure::Solver(_) => 2,
                Failure::Check(_) => 3,
            };
        }
        if let Some(telecert::Error::Solver { .. }) = cause.downcast_ref::<telecert::Error>() {
            return 2;
        }
    }
    1
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("TELECERT_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).with_context(|| format!("TELECERT_THREADS={v:?} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the worker pool")?;
    Ok(())
}

fn cmd_robustness(args: &RobustnessArgs) -> Result<()> {
    let built = args.scenario.build()?;
    let opts = args.scenario.solve_options()?;
    let rel = args.scenario.relaxation;
    let result = if args.dual {
        teleportation_robustness_dual_with(&built.assemblage, rel, &opts)?
    } else {
        teleportation_robustness_with(&built.assemblage, rel, &opts)?
    };
    if result.diagnostics.status != SolveStatus::Optimal {
        return Err(Failure::Solver(format!("solver stopped with status {:?}", result.diagnostics.status)).into());
    }
    let full = result.to_json();
    if let Some(path) = &args.out {
        std::fs::write(path, serde_json::to_string_pretty(&full)?).with_context(|| format!("writing {}", path.display()))?;
    }
    let cert_path = args.out.as_ref().map_or("-".to_string(), |p| p.display().to_string());
    if args.json {
        let report = serde_json::json!({
            "scenario": built.label,
            "quantity": "T_R",
            "value": result.value,
            "relaxation": rel.tag(),
            "exact": result.exact,
            "diagnostics": result.diagnostics,
            "witness_check": result.witness_check,
            "certificate_path": cert_path,
        });
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("scenario {}", built.label);
        println!("value {:.6}", display(result.value));
        println!("relaxation {}{}", rel.tag(), if result.exact { "" } else { " (outer relaxation: lower bound)" });
        println!(
            "solver {:?} iterations {} gap {:.3e}",
            result.diagnostics.status, result.diagnostics.iterations, result.diagnostics.relative_gap
        );
        println!("certificate {cert_path}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Robustness(a) => cmd_robustness(&a),
        Command::Reproduce(a) => reproduce::run(&a),
        Command::Sweep(a) => sweep::run(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
