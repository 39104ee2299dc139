use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracfem::config::{parse_pairs, resolve, Overrides};
use fracfem::{run_experiment, HarnessError};

#[derive(Parser)]
#[command(
    name = "fracfem",
    version,
    about = "Fractional obstacle problems on graded meshes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study.
    Run {
        /// linear, explicit_obstacle or qualitative
        #[arg(long)]
        experiment: Option<String>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        /// Number of levels `h0 · h_ratio^k`.
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        h0: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Flat `key = value` file; its values override the flags.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let Command::Run {
        experiment,
        s,
        mu,
        levels,
        h0,
        out,
        config,
    } = cli.command;
    let pairs = match config {
        Some(p) => parse_pairs(&std::fs::read_to_string(p)?)?,
        None => Vec::new(),
    };
    let cfg = resolve(
        Overrides {
            experiment,
            s,
            mu,
            levels,
            h0,
            out,
        },
        &pairs,
    )?;
    let res = run_experiment(&cfg)?;
    println!(
        "{:>10} {:>8} {:>14} {:>6} {:>10}",
        "h", "ndof", "energy_error", "iters", "seconds"
    );
    for r in &res.table.rows {
        println!(
            "{:>10.5} {:>8} {:>14.6e} {:>6} {:>10.2}",
            r.h, r.ndof, r.energy_error, r.iters, r.wall_seconds
        );
    }
    if let (Ok(n), Ok(h)) = (res.table.fit_vs_ndof(), res.table.fit_vs_h()) {
        println!("slope vs ndof {:.4}, vs h {:.4}", n.slope, h.slope);
    }
    for (k, l) in res.levels.iter().enumerate() {
        if l.contact_dofs > 0 {
            println!(
                "level {k}: contact area {:.6e} ({} dofs)",
                l.contact_area, l.contact_dofs
            );
        }
    }
    println!("wrote {}", cfg.out.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fracfem: {e}");
            ExitCode::FAILURE
        }
    }
}
