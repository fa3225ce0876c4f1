//! Monte-Carlo sweep over one axis with paired channel draws.

use std::time::Instant;

use rayon::prelude::*;
use ris_core::random::mix64;
use ris_core::{draw_channels, run_joint_optimization, AlgorithmOptions, ChannelSet, ScfOptions, SdrOptions, Variant};

use crate::spec::{ExperimentSpec, SweepAxis};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    /// Hit the outer iteration cap before the tolerance.
    MaxOuter,
    Failed(String),
}

impl RowStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::MaxOuter => "max_outer",
            RowStatus::Failed(_) => "failed",
        }
    }

    pub fn is_failed(&self) -> bool {
        matches!(self, RowStatus::Failed(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub algorithm: Variant,
    /// Seed index `k` within the cell, `0..num_seeds`.
    pub seed: u64,
    pub rate: f64,
    pub nmse: f64,
    pub channel_power: f64,
    pub iterations: usize,
    pub wall_time_ms: Option<f64>,
    pub status: RowStatus,
    /// Fingerprint of the channel draw the row was computed on.
    pub channel_checksum: u64,
}

/// Seed of the channel draw for sweep value `value` and seed index `k`.
pub fn channel_seed(base_seed: u64, value: f64, k: u64) -> u64 {
    base_seed ^ mix64(value.to_bits() ^ mix64(k))
}

fn algorithm_options(spec: &ExperimentSpec, variant: Variant, quant_bits: Option<u32>, seed: u64) -> AlgorithmOptions {
    AlgorithmOptions {
        outer_tol: spec.outer_tol,
        max_outer: spec.max_outer,
        scf: ScfOptions { eps: spec.scf_eps, max_iter: spec.scf_max_iter, lambda_override: None },
        sdr: SdrOptions { tol: spec.sdr_tol, max_iter: spec.sdr_max_iter, trials: spec.sdr_trials, seed: 0 },
        quant_bits,
        // Keep the phase draws off the channel's substreams.
        seed: mix64(seed ^ 0x5249_535f_5048_4153),
        ..AlgorithmOptions::new(variant)
    }
}

fn run_cell(spec: &ExperimentSpec, value: f64, k: u64) -> Vec<ResultRow> {
    let cell = spec.cell(value);
    let seed = channel_seed(spec.base_seed, value, k);
    let mut draw = cell.channel.clone();
    draw.seed = seed;
    let row = |algorithm, checksum| ResultRow {
        axis: spec.axis,
        value,
        algorithm,
        seed: k,
        rate: f64::NAN,
        nmse: f64::NAN,
        channel_power: f64::NAN,
        iterations: 0,
        wall_time_ms: None,
        status: RowStatus::Ok,
        channel_checksum: checksum,
    };
    let ch: ChannelSet = match draw_channels(&draw) {
        Ok(ch) => ch,
        Err(e) => {
            return spec
                .algorithms
                .iter()
                .map(|&a| ResultRow { status: RowStatus::Failed(e.to_string()), ..row(a, 0) })
                .collect()
        }
    };
    let checksum = ch.checksum();
    spec.algorithms
        .iter()
        .map(|&algorithm| {
            let opts = algorithm_options(spec, algorithm, cell.quant_bits, seed);
            let start = Instant::now();
            let outcome = run_joint_optimization(&ch, &cell.system, &opts);
            let wall = spec.record_timing.then(|| start.elapsed().as_secs_f64() * 1e3);
            match outcome {
                Ok(res) => ResultRow {
                    rate: res.rate,
                    nmse: res.nmse,
                    channel_power: res.channel_power,
                    iterations: res.outer_iterations,
                    wall_time_ms: wall,
                    status: if res.converged { RowStatus::Ok } else { RowStatus::MaxOuter },
                    ..row(algorithm, checksum)
                },
                Err(e) => ResultRow { wall_time_ms: wall, status: RowStatus::Failed(e.to_string()), ..row(algorithm, checksum) },
            }
        })
        .collect()
}

/// Runs every `(value, seed)` cell on up to `jobs` threads. Channels are drawn
/// once per cell and shared by all algorithms. Rows come back in canonical
/// order (value, then algorithm as listed, then seed) whatever the schedule.
pub fn run_sweep(spec: &ExperimentSpec, jobs: usize) -> Vec<ResultRow> {
    let cells: Vec<(f64, u64)> = spec
        .values
        .iter()
        .flat_map(|&v| (0..spec.num_seeds as u64).map(move |k| (v, k)))
        .collect();
    let run = || cells.par_iter().flat_map_iter(|&(v, k)| run_cell(spec, v, k)).collect::<Vec<_>>();
    let mut rows = match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(_) => cells.iter().flat_map(|&(v, k)| run_cell(spec, v, k)).collect(),
    };
    let order = |a: Variant| spec.algorithms.iter().position(|&x| x == a).unwrap_or(usize::MAX);
    rows.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(order(a.algorithm).cmp(&order(b.algorithm)))
            .then(a.seed.cmp(&b.seed))
    });
    rows
}
