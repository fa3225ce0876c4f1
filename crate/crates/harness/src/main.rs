use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ris_harness::{
    apply_seed_override, render_plot, run_oracle, run_sweep, write_csv, ExperimentSpec, Metric, SEED_ENV,
};

#[derive(Parser)]
#[command(name = "ris-sim", version, about = "Joint transceiver and RIS phase optimization sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write CSV results.
    Run {
        spec: PathBuf,
        /// Output directory for the CSV and plots.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the number of seeds per sweep value.
        #[arg(long)]
        seeds: Option<usize>,
        /// Also write one SVG per metric.
        #[arg(long)]
        plot: bool,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Compare against an exhaustive phase grid (surfaces of at most 3 elements).
    Oracle { spec: PathBuf },
}

const EXIT_SPEC: u8 = 2;
const EXIT_FAILED_CELL: u8 = 3;

fn load(path: &PathBuf, seeds: Option<usize>) -> Result<ExperimentSpec, ExitCode> {
    let fail = |e: &dyn std::fmt::Display| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_SPEC)
    };
    let mut spec = ExperimentSpec::from_path(path).map_err(|e| fail(&e))?;
    apply_seed_override(&mut spec, std::env::var(SEED_ENV).ok().as_deref()).map_err(|e| fail(&e))?;
    if let Some(k) = seeds {
        spec.num_seeds = k;
        spec.validate().map_err(|e| fail(&e))?;
    }
    Ok(spec)
}

fn run(spec_path: PathBuf, out: PathBuf, seeds: Option<usize>, plot: bool, jobs: usize) -> ExitCode {
    let spec = match load(&spec_path, seeds) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let rows = run_sweep(&spec, jobs);
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("error: {}: {e}", out.display());
        return ExitCode::FAILURE;
    }
    let csv_path = out.join(&spec.output_path);
    if let Err(e) = write_csv(&rows, &csv_path) {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    if plot {
        let stem = csv_path.file_stem().and_then(|s| s.to_str()).unwrap_or("results").to_string();
        for metric in Metric::ALL {
            let path = out.join(format!("{stem}_{}.svg", metric.name()));
            if let Err(e) = render_plot(&rows, metric, &path) {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
        }
    }
    let mut failed = 0;
    for row in &rows {
        if let ris_harness::RowStatus::Failed(msg) = &row.status {
            failed += 1;
            eprintln!("failed cell: value={} algorithm={} seed={}: {msg}", row.value, row.algorithm.name(), row.seed);
        }
    }
    eprintln!("wrote {} rows to {}", rows.len(), csv_path.display());
    if failed > 0 {
        ExitCode::from(EXIT_FAILED_CELL)
    } else {
        ExitCode::SUCCESS
    }
}

fn oracle(spec_path: PathBuf) -> ExitCode {
    let spec = match load(&spec_path, None) {
        Ok(s) => s,
        Err(code) => return code,
    };
    match run_oracle(&spec) {
        Ok(rows) => {
            println!("{:>12} {:>6} {:>14} {:>14} {:>12}", spec.axis.name(), "seed", "scf_rate", "grid_rate", "gap");
            for r in &rows {
                println!("{:>12} {:>6} {:>14.6} {:>14.6} {:>12.3e}", r.value, r.seed, r.scf_rate, r.grid_rate, r.gap());
            }
            let worst = rows.iter().map(|r| r.gap()).fold(f64::NEG_INFINITY, f64::max);
            println!("worst gap {worst:.3e}");
            ExitCode::SUCCESS
        }
        Err(ris_core::Error::Config(msg)) => {
            eprintln!("error: {}: {msg}", spec_path.display());
            ExitCode::from(EXIT_SPEC)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILED_CELL)
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { spec, out, seeds, plot, jobs } => run(spec, out, seeds, plot, jobs),
        Command::Oracle { spec } => oracle(spec),
    }
}
