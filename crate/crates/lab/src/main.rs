use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gkdv_core::io::read_field;
use gkdv_core::linearized::coercivity_estimate;
use gkdv_core::modulation::{decompose, NewtonOptions};
use gkdv_core::soliton::{q_direction, Direction};
use gkdv_core::{Frame, Grid};
use gkdv_lab::{load_config, report, run_scenario, sweep, verify_with, LabError, VerifyOptions};
use serde_json::json;

#[derive(Parser)]
#[command(name = "gkdv-lab", version, about = "Numerical laboratory for the mass-critical gKdV soliton")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity battery and print one line per check.
    Verify {
        #[arg(long = "N", default_value_t = 4096)]
        n: usize,
        #[arg(long = "L", default_value_t = 100.0)]
        length: f64,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run the scenario described by a TOML file.
    Simulate { config: PathBuf },
    /// Decompose a field file around the soliton family.
    Decompose {
        field: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0)]
        x: f64,
    },
    /// Constrained coercivity estimate of the virial quadratic form.
    Coercivity {
        #[arg(long = "N", default_value_t = 512)]
        n: usize,
        #[arg(long = "L", default_value_t = 50.0)]
        length: f64,
        /// Comma-separated constraint directions.
        #[arg(long, default_value = "Q,yLambdaQ")]
        constraints: String,
    },
    /// Recompute the report of a run directory from its persisted series.
    Report { run_dir: PathBuf },
    /// Run every `*.toml` scenario of a directory in parallel.
    Sweep { config_dir: PathBuf },
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn simulate(path: &Path) -> Result<(), LabError> {
    let config = load_config(path)?;
    let run = run_scenario(&config)?;
    let r = &run.analysis.report;
    println!("run directory: {}", run.dir.display());
    println!("mass gap: {:e} ({:?})", r.mass_gap, r.mass_gap_sign);
    match r.departure_time {
        Some(t) => println!("departed the soliton tube at t = {t}"),
        None => println!("stayed within delta = {} of the soliton family", config.delta),
    }
    for c in &r.checks {
        println!("{} {}: {:e} (threshold {:e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), LabError> {
    match cli.command {
        Command::Verify { n, length, json } => {
            let rep = verify_with(&VerifyOptions { n, length, ..VerifyOptions::default() });
            if json {
                print_json(&rep);
            } else {
                for c in &rep.checks {
                    let tag = if c.passed { "PASS" } else { "FAIL" };
                    println!("{tag} {}: {:e} (threshold {:e})", c.name, c.value, c.threshold);
                }
            }
        }
        Command::Simulate { config } => simulate(&config)?,
        Command::Decompose { field, lambda, x } => {
            let u = read_field(&field)?;
            match decompose(&u, Frame::new(lambda, x)?, NewtonOptions::default()) {
                Ok(d) => print_json(&json!({
                    "lambda": d.frame.lambda,
                    "x": d.frame.x,
                    "rho1": d.rho.0,
                    "rho2": d.rho.1,
                    "eps_l2": gkdv_core::functionals::l2(&d.eps),
                    "iterations": d.iterations,
                    "converged": d.converged,
                })),
                Err(e) => print_json(&json!({ "converged": false, "error": e.to_string() })),
            }
        }
        Command::Coercivity { n, length, constraints } => {
            let grid = Grid::new(length, n)?;
            let mut fields = Vec::new();
            let mut names = Vec::new();
            for name in constraints.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let dir = Direction::parse(name).ok_or_else(|| {
                    let valid: Vec<&str> = Direction::ALL.iter().map(|d| d.name()).collect();
                    LabError::Config(gkdv_lab::ConfigError::invalid(
                        "constraints",
                        format!("unknown direction `{name}`; valid: {}", valid.join(", ")),
                    ))
                })?;
                fields.push(q_direction(&grid, dir));
                names.push(dir.name());
            }
            let est = coercivity_estimate(&grid, &fields)?;
            print_json(&json!({
                "delta1": est.delta1(),
                "sign": est.sign,
                "extremal": est.extremal,
                "lowest": est.lowest,
                "highest": est.highest,
                "N": n,
                "L": length,
                "constraints": names,
            }));
        }
        Command::Report { run_dir } => print_json(&report(&run_dir)?),
        Command::Sweep { config_dir } => {
            for entry in sweep(&config_dir)? {
                match &entry.outcome {
                    Ok(r) => println!(
                        "{}: {} checks passed, departure {}",
                        entry.config.display(),
                        if r.all_passed() { "all" } else { "not all" },
                        r.departure_time.map_or("none".to_string(), |t| t.to_string())
                    ),
                    Err(e) => println!("{}: error: {e}", entry.config.display()),
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
