//! Experiment runner for `ris-core`: spec files, seeded sweeps, CSV and SVG
//! output, and the brute-force comparison used by `ris-sim oracle`.

pub mod output;
pub mod spec;
pub mod sweep;

pub use output::{read_csv, render_plot, render_plot_svg, write_csv, Metric, OutputError, CSV_HEADER};
pub use spec::{ExperimentSpec, SpecError, SweepAxis};
pub use sweep::{channel_seed, run_sweep, ResultRow, RowStatus};

use ris_core::oracle::phase_grid_search;
use ris_core::{draw_channels, run_joint_optimization, AlgorithmOptions, Variant};

/// Environment variable that replaces `base_seed`.
pub const SEED_ENV: &str = "RIS_SIM_SEED";

/// Applies [`SEED_ENV`] if set.
pub fn apply_seed_override(spec: &mut ExperimentSpec, env: Option<&str>) -> Result<(), SpecError> {
    if let Some(v) = env {
        spec.base_seed = v.trim().parse().map_err(|_| SpecError {
            line: None,
            field: Some(SEED_ENV.into()),
            message: format!("expected an unsigned integer, got `{v}`"),
        })?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub value: f64,
    pub seed: u64,
    pub scf_rate: f64,
    pub grid_rate: f64,
}

impl OracleRow {
    /// How far the alternating optimization lands below the grid optimum.
    pub fn gap(&self) -> f64 {
        self.grid_rate - self.scf_rate
    }
}

/// Runs the reflector optimization and the exhaustive phase grid on the same
/// draws, for every sweep value and seed.
pub fn run_oracle(spec: &ExperimentSpec) -> Result<Vec<OracleRow>, ris_core::Error> {
    let mut rows = Vec::new();
    for &value in &spec.values {
        let cell = spec.cell(value);
        for k in 0..spec.num_seeds as u64 {
            let mut draw = cell.channel.clone();
            draw.seed = channel_seed(spec.base_seed, value, k);
            let ch = draw_channels(&draw)?;
            let mut opts = AlgorithmOptions::new(Variant::Scf);
            opts.outer_tol = spec.outer_tol;
            opts.max_outer = spec.max_outer;
            opts.scf.eps = spec.scf_eps;
            opts.scf.max_iter = spec.scf_max_iter;
            let res = run_joint_optimization(&ch, &cell.system, &opts)?;
            let grid = phase_grid_search(&ch, &cell.system, spec.oracle_grid)?;
            rows.push(OracleRow { value, seed: k, scf_rate: res.rate, grid_rate: grid.rate });
        }
    }
    Ok(rows)
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/sweeps.md")]
mod book_sweeps {}
