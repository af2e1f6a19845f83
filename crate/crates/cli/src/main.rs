use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gcs_cli::{simulate, sweep, verify, CliError};

#[derive(Parser)]
#[command(name = "gcs", version, about = "Coherent-state trajectories and their quantum checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file; writes a CSV time series and a JSON summary.
    Simulate { config: PathBuf },
    /// Run the invariant suite and print a pass/fail table.
    Verify {
        /// Only checks whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Run every point of the scenario's sweep grid.
    Sweep { config: PathBuf },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Simulate { config } => {
            let (summary, csv, json) = simulate(&config)?;
            println!("wrote {} and {}", csv.display(), json.display());
            if let Some(f) = summary.min_fidelity {
                println!("min fidelity {f:.12}");
            }
            if let Some(p) = summary.passed {
                println!("checks {}", if p { "passed" } else { "FAILED" });
            }
            Ok(true)
        }
        Command::Verify { filter } => {
            let rows = verify(filter.as_deref())?;
            let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
            for r in &rows {
                println!(
                    "{:<width$}  {}  {}",
                    r.name,
                    if r.passed { "PASS" } else { "FAIL" },
                    r.detail
                );
            }
            let failed = rows.iter().filter(|r| !r.passed).count();
            println!("{} of {} checks passed", rows.len() - failed, rows.len());
            Ok(failed == 0)
        }
        Command::Sweep { config } => {
            let (report, path) = sweep(&config)?;
            println!(
                "{} scenarios, {} failed; wrote {}",
                report.scenarios.len(),
                report.failures,
                path.display()
            );
            for e in report.scenarios.iter().filter(|e| e.error.is_some()) {
                eprintln!("scenario {}: {}", e.index, e.error.as_deref().unwrap_or_default());
            }
            Ok(report.failures == 0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
