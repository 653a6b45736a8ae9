use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use iesp::sim::{compute_metrics, export, load_scenario, run, sweep_files};
use iesp::ScenarioError;

/// Tyre-burst vehicle simulator with a fuzzy stability program.
#[derive(Parser, Debug)]
#[command(name = "iesp", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario and write trace.csv and metrics.csv.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Disable the stability program.
        #[arg(long)]
        no_iesp: bool,
        /// Disable the anti-lock modulator.
        #[arg(long)]
        no_abs: bool,
        /// Also write SVG plots of slip angle, yaw rate and error.
        #[arg(long)]
        plots: bool,
    },
    /// Run a scenario template over a parameter grid; prints one CSV row per
    /// grid point.
    Sweep {
        template: PathBuf,
        grid: PathBuf,
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
    },
    /// Check a scenario file and report every problem.
    Validate { scenario: PathBuf },
}

const EXIT_INVALID: u8 = 1;
const EXIT_FAULT: u8 = 2;

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn invalid(e: ScenarioError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_INVALID)
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Command::Validate { scenario } => match load_scenario(&scenario) {
            Ok(sc) if sc.name.is_empty() => {
                println!("{}: ok", scenario.display());
                ExitCode::SUCCESS
            }
            Ok(sc) => {
                println!("{}: ok ({})", scenario.display(), sc.name);
                ExitCode::SUCCESS
            }
            Err(e) => invalid(e),
        },
        Command::Run {
            scenario,
            out,
            no_iesp,
            no_abs,
            plots,
        } => {
            let mut sc = match load_scenario(&scenario) {
                Ok(sc) => sc,
                Err(e) => return invalid(e),
            };
            sc.controllers.iesp &= !no_iesp;
            sc.controllers.abs &= !no_abs;
            let outcome = match run(&sc) {
                Ok(o) => o,
                Err(e) => return invalid(e),
            };
            let metrics = compute_metrics(&outcome.trace);
            let fault = outcome.fault.as_ref().map(|f| f.to_string());
            let files = match export(&out, &outcome.trace, &metrics, fault.as_deref(), plots) {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_FAULT);
                }
            };
            println!(
                "max |beta| {:.2} deg, spin {}, max error {:.3} m, max mean error {:.3} m",
                metrics.max_abs_beta_deg, metrics.spin, metrics.max_error_m, metrics.max_mean_error_m
            );
            println!("wrote {}", files.trace.display());
            println!("wrote {}", files.metrics.display());
            for p in &files.plots {
                println!("wrote {}", p.display());
            }
            match fault {
                Some(f) => {
                    eprintln!("error: {f}");
                    ExitCode::from(EXIT_FAULT)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Command::Sweep { template, grid, jobs } => match sweep_files(&template, &grid, jobs) {
            Ok(table) => {
                print!("{}", table.to_csv());
                let faults = table.rows.iter().filter(|r| r.fault.is_some()).count();
                if faults > 0 {
                    eprintln!("{faults} of {} runs faulted", table.rows.len());
                    ExitCode::from(EXIT_FAULT)
                } else {
                    ExitCode::SUCCESS
                }
            }
            Err(e) => invalid(e),
        },
    }
}
