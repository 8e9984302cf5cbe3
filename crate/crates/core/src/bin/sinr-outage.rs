use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sinr_outage::cli::{cumulant_table, parse_config, run, write_cumulant_csv, write_outage_csv, RunConfig};

/// Outage probability of a CoMP downlink by Gil-Pelaez inversion, saddle
/// point approximation, Charlier expansion and simulation.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Outage per sweep point and method, as CSV on stdout.
    Run { config: PathBuf },
    /// κ_1..κ_8, skewness and excess kurtosis of Ω per sweep point.
    Cumulants { config: PathBuf },
}

const THREADS_VAR: &str = "SINR_OUTAGE_THREADS";

fn load(path: &PathBuf) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var(THREADS_VAR) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("warning: {THREADS_VAR}: {e}");
                }
            }
            _ => {
                eprintln!("error: {THREADS_VAR} must be a positive integer, got `{v}`");
                return ExitCode::from(1);
            }
        }
    }
    let path = match &cli.command {
        Command::Run { config } | Command::Cumulants { config } => config,
    };
    let cfg = match load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let stdout = std::io::stdout().lock();
    let (written, any_ok) = match cli.command {
        Command::Run { .. } => {
            let cells = run(&cfg);
            for c in &cells {
                if let Err(e) = &c.result {
                    let at = c.sweep_value.map(|x| format!(" at {x}")).unwrap_or_default();
                    eprintln!("note: {}{at}: {e}", c.method);
                }
            }
            (write_outage_csv(&cells, stdout), cells.iter().any(|c| c.result.is_ok()))
        }
        Command::Cumulants { .. } => {
            let rows = cumulant_table(&cfg);
            for r in &rows {
                if let Err(e) = &r.result {
                    eprintln!("note: cumulants: {e}");
                }
            }
            (write_cumulant_csv(&rows, stdout), rows.iter().any(|r| r.result.is_ok()))
        }
    };
    if let Err(e) = written {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(1);
    }
    if any_ok {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: no cell could be computed");
        ExitCode::from(2)
    }
}
