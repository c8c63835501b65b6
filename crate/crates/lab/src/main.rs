use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use specmult::ops::{CONDITIONS, OPERATIONS};
use specmult::run::{list_scenarios, run_scenario, scenario_dir, RunOptions};
use specmult::verify;
use specmult_core::models::MODEL_FAMILIES;
use specmult_core::mult::MULTIPLIER_FAMILIES;

/// Spectral multiplier scenario runner.
#[derive(Debug, Parser)]
#[command(name = "specmult", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario file; exit 2 if any record is flagged.
    Run {
        config: PathBuf,
        /// Advisory thread count (recorded in the manifest).
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory (default: the config's `out`, else out/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed_override: Option<u64>,
        /// Multiplies every tolerance.
        #[arg(long)]
        tolerance_scale: Option<f64>,
    },
    /// Print a registry: models, scenarios, conditions, multipliers, operations.
    List { what: String },
    /// Run a self-check suite: lemmas, norms, specfun or all.
    Verify { suite: String },
}

fn list(what: &str) -> Result<(), specmult::LabError> {
    match what {
        "models" => {
            for (family, example) in MODEL_FAMILIES {
                println!("{family:<10} {example}");
            }
        }
        "conditions" => {
            for (tag, op) in CONDITIONS {
                println!("{tag:<11} {op}");
            }
        }
        "multipliers" => {
            for (family, template) in MULTIPLIER_FAMILIES {
                println!("{family:<10} {template}");
            }
            println!("{:<10} cut:<multiplier>", "cut");
        }
        "operations" => {
            for (op, about) in OPERATIONS {
                println!("{op:<13} {about}");
            }
        }
        "scenarios" => {
            for (file, cfg) in list_scenarios(&scenario_dir())? {
                println!("{:<28} {:<13} {:<32} {file}", cfg.scenario.name, cfg.scenario.operation, cfg.scenario.model);
            }
        }
        other => return Err(specmult::LabError::Unknown { kind: "list", key: other.to_string() }),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // exit code 2 is reserved for flagged scans
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run { config, threads, out, seed_override, tolerance_scale } => {
            let opts = RunOptions { threads, out, seed_override, tolerance_scale };
            match run_scenario(&config, &opts) {
                Ok(s) => {
                    println!("{} records, {} flagged, outputs in {}", s.records, s.flagged, s.out_dir.display());
                    if s.flagged > 0 {
                        ExitCode::from(2)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::List { what } => match list(&what) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Verify { suite } => {
            let checks = match verify::suite(&suite) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e} (expected one of {})", verify::SUITES.join(", "));
                    return ExitCode::from(1);
                }
            };
            let mut failed = Vec::new();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                if !c.passed {
                    failed.push(c.name);
                }
            }
            if failed.is_empty() {
                println!("{} checks passed", checks.len());
                ExitCode::SUCCESS
            } else {
                eprintln!("failed: {}", failed.join(", "));
                ExitCode::from(1)
            }
        }
    }
}
