//! Alternating minimization over `(W_d, W, W_s, θ)`, the fixed-phase
//! baselines, phase quantization and convergence diagnostics.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, trace_re, CMat, CVec};
use crate::random::{mix64, random_phases};
use crate::reflector::{build_reflector_quadratic, stack_real, RealLift};
use crate::scf::{reflector_kkt_residual, scf_solve, ScfOptions};
use crate::sdr::{sdr_solve, SdrOptions};
use crate::wmmse::{
    effective_channel, mmse_combiner, mse_matrix, precoder_update, rate_from_mse,
    svd_init_precoder, weight_update, wmmse_objective, SystemConfig, TransceiverState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Reflector by sequence of closed forms.
    Scf,
    /// Reflector by semidefinite relaxation and Gaussian randomization.
    Sdr,
    /// One uniformly random phase vector, transceiver optimized.
    RandomRis,
    /// Direct link only.
    NoRis,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Scf, Variant::Sdr, Variant::RandomRis, Variant::NoRis];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Scf => "scf",
            Variant::Sdr => "sdr",
            Variant::RandomRis => "random_ris",
            Variant::NoRis => "no_ris",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name().eq_ignore_ascii_case(s.trim()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaInit {
    AllOnes,
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmOptions {
    pub variant: Variant,
    /// Stop when `|Δf| / max(|f|, 1)` drops below this.
    pub outer_tol: f64,
    pub max_outer: usize,
    pub scf: ScfOptions,
    pub sdr: SdrOptions,
    pub quant_bits: Option<u32>,
    pub theta_init: ThetaInit,
    /// Seeds the random-RIS draw and the randomization trials.
    pub seed: u64,
}

impl AlgorithmOptions {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            outer_tol: 1e-4,
            max_outer: 100,
            scf: ScfOptions::default(),
            sdr: SdrOptions::default(),
            quant_bits: None,
            theta_init: ThetaInit::AllOnes,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.outer_tol > 0.0) {
            return Err(Error::Config("outer_tol must be positive".into()));
        }
        if self.max_outer == 0 {
            return Err(Error::Config("max_outer must be at least 1".into()));
        }
        if self.quant_bits == Some(0) {
            return Err(Error::Config("quantization needs at least one bit".into()));
        }
        Ok(())
    }
}

/// Objective values after each block update of one outer iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubUpdateTrace {
    /// `None` on the first iteration, where no previous weight exists.
    pub after_combiner: Option<f64>,
    pub after_weight: f64,
    pub after_precoder: f64,
    pub after_reflector: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub rate: f64,
    pub nmse: f64,
    pub channel_power: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub final_state: TransceiverState,
    /// `tr(W·E) − ln det W` at the end of each outer iteration.
    pub objective_trace: Vec<f64>,
    pub sub_updates: Vec<SubUpdateTrace>,
    pub rate: f64,
    pub nmse: f64,
    pub channel_power: f64,
    pub outer_iterations: usize,
    pub converged: bool,
    pub wall_time: Duration,
    /// Power multiplier of the last precoder update.
    pub mu: f64,
    /// Phases before quantization, when quantization was requested.
    pub continuous_theta: Option<CVec>,
    /// Inner reflector iterations summed over the run.
    pub reflector_iterations: usize,
}

fn objective(h_eq: &CMat, state: &TransceiverState, sigma2: f64) -> Result<f64> {
    let e = mse_matrix(h_eq, &state.precoder, &state.combiner, sigma2);
    wmmse_objective(&e, &state.weight)
}

fn initial_theta(n: usize, opts: &AlgorithmOptions) -> CVec {
    match (opts.variant, opts.theta_init) {
        (Variant::RandomRis, _) => random_phases(n, opts.seed),
        (_, ThetaInit::Random { seed }) => random_phases(n, seed),
        _ => CVec::from_element(n, Complex64::new(1.0, 0.0)),
    }
}

/// One combiner/weight/precoder sweep for fixed `θ`, returning the objective
/// after each block and the precoder multiplier.
fn transceiver_sweep(
    h_eq: &CMat,
    state: &mut TransceiverState,
    sys: &SystemConfig,
    have_weight: bool,
) -> Result<(Option<f64>, f64, f64, f64)> {
    state.combiner = mmse_combiner(h_eq, &state.precoder, sys.noise_power);
    let after_combiner = if have_weight {
        Some(objective(h_eq, state, sys.noise_power)?)
    } else {
        None
    };
    let e = mse_matrix(h_eq, &state.precoder, &state.combiner, sys.noise_power);
    state.weight = weight_update(&e)?;
    let after_weight = wmmse_objective(&e, &state.weight)?;
    let upd = precoder_update(h_eq, &state.combiner, &state.weight, sys.power_budget)?;
    state.precoder = upd.precoder;
    let after_precoder = objective(h_eq, state, sys.noise_power)?;
    Ok((after_combiner, after_weight, after_precoder, upd.mu))
}

/// Runs the alternating optimization for one channel draw.
///
/// `θ` starts at all ones (or a seeded random draw) and `W_s` at the dominant
/// right singular vectors of the effective channel. Each outer iteration
/// updates `W_d`, `W`, `W_s` and then `θ` with the configured reflector
/// solver. The baselines skip the `θ` update. With quantization, the final
/// phases are rounded to the `2^B` grid and one more transceiver sweep is run
/// on the quantized channel. The reported state always carries the MMSE
/// combiner and `W = E⁻¹` of its final precoder and phases.
pub fn run_joint_optimization(
    ch: &ChannelSet,
    sys: &SystemConfig,
    opts: &AlgorithmOptions,
) -> Result<OptimizationResult> {
    let start = Instant::now();
    ch.check()?;
    sys.validate(ch.n_tx(), ch.n_rx())?;
    opts.validate()?;

    let working = match opts.variant {
        Variant::NoRis => ch.without_reflection(),
        _ => ch.clone(),
    };
    let optimize_theta = matches!(opts.variant, Variant::Scf | Variant::Sdr);
    let n = working.n_elements();
    let ns = sys.n_streams;

    let theta = initial_theta(n, opts);
    let mut h_eq = effective_channel(&working, &theta)?;
    let mut state = TransceiverState {
        precoder: svd_init_precoder(&h_eq, ns, sys.power_budget),
        combiner: CMat::zeros(ch.n_rx(), ns),
        weight: CMat::identity(ns, ns),
        theta,
    };

    let mut objective_trace = Vec::new();
    let mut sub_updates = Vec::new();
    let mut mu = 0.0;
    let mut converged = false;
    let mut reflector_iterations = 0;
    let mut outer = 0;

    while outer < opts.max_outer {
        outer += 1;
        let t = outer;
        let step = (|| -> Result<SubUpdateTrace> {
            let (after_combiner, after_weight, after_precoder, m) =
                transceiver_sweep(&h_eq, &mut state, sys, t > 1)?;
            mu = m;
            if optimize_theta {
                let q = build_reflector_quadratic(&working, &state, sys.noise_power)?;
                let new_theta = match opts.variant {
                    Variant::Scf => {
                        let (theta, st) = scf_solve(&q, &state.theta, &opts.scf)?;
                        reflector_iterations += st.iterations;
                        theta
                    }
                    _ => {
                        let sdr = SdrOptions {
                            seed: mix64(opts.seed ^ mix64(t as u64)),
                            ..opts.sdr
                        };
                        sdr_solve(&q, &sdr)?.0
                    }
                };
                state.theta = new_theta;
                h_eq = effective_channel(&working, &state.theta)?;
            }
            let after_reflector = objective(&h_eq, &state, sys.noise_power)?;
            Ok(SubUpdateTrace {
                after_combiner,
                after_weight,
                after_precoder,
                after_reflector,
            })
        })()
        .map_err(|e| e.at_outer(t))?;

        let f = step.after_reflector;
        sub_updates.push(step);
        let prev = objective_trace.last().copied();
        objective_trace.push(f);
        if let Some(prev) = prev {
            if (f - prev).abs() / f.abs().max(1.0) < opts.outer_tol {
                converged = true;
                break;
            }
        }
    }

    let mut continuous_theta = None;
    if let Some(bits) = opts.quant_bits.filter(|_| opts.variant != Variant::NoRis) {
        continuous_theta = Some(state.theta.clone());
        state.theta = quantize_phases(&state.theta, bits);
        h_eq = effective_channel(&working, &state.theta)?;
        let (_, _, _, m) = transceiver_sweep(&h_eq, &mut state, sys, true)
            .map_err(|e| e.at_outer(outer + 1))?;
        mu = m;
    }

    state.combiner = mmse_combiner(&h_eq, &state.precoder, sys.noise_power);
    let e = mse_matrix(&h_eq, &state.precoder, &state.combiner, sys.noise_power);
    state.weight = weight_update(&e).map_err(|e| e.at_outer(outer))?;
    let metrics = compute_metrics(&working, sys, &state)?;

    Ok(OptimizationResult {
        final_state: state,
        objective_trace,
        sub_updates,
        rate: metrics.rate,
        nmse: metrics.nmse,
        channel_power: metrics.channel_power,
        outer_iterations: outer,
        converged,
        wall_time: start.elapsed(),
        mu,
        continuous_theta,
        reflector_iterations,
    })
}

/// Rounds each phase to the nearest point of the `2^bits` grid
/// `{2πm / 2^bits}`, measuring distance around the circle.
pub fn quantize_phases(theta: &CVec, bits: u32) -> CVec {
    let levels = 1u64 << bits.clamp(1, 62);
    let step = 2.0 * PI / levels as f64;
    theta.map(|z| {
        let phase = z.arg().rem_euclid(2.0 * PI);
        let m = ((phase / step).round() as u64) % levels;
        Complex64::from_polar(1.0, step * m as f64)
    })
}

/// Rate, normalized MSE and effective channel power of a state.
///
/// The rate is `log₂ det(E⁻¹)` with the MMSE combiner of the state's
/// precoder, which equals the general rate expression for any invertible
/// combiner applied on top of it. The NMSE is `tr(E)/N_s` for the state's own
/// combiner.
pub fn compute_metrics(ch: &ChannelSet, sys: &SystemConfig, state: &TransceiverState) -> Result<Metrics> {
    let h_eq = effective_channel(ch, &state.theta)?;
    let ns = state.precoder.ncols() as f64;
    let e = mse_matrix(&h_eq, &state.precoder, &state.combiner, sys.noise_power);
    let nmse = trace_re(&e) / ns;
    let wd = mmse_combiner(&h_eq, &state.precoder, sys.noise_power);
    let e_mmse = mse_matrix(&h_eq, &state.precoder, &wd, sys.noise_power);
    let rate = rate_from_mse(&e_mmse)?.max(0.0);
    Ok(Metrics {
        rate,
        nmse,
        channel_power: frobenius_sq(&h_eq),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResidual {
    /// `‖Hᴴ W_d W W_dᴴ H W_s − Hᴴ W_d W + μ W_s‖_F`.
    pub precoder_res: f64,
    /// `min_η ‖2(R + λI)x + Σ 2η_n E_n x‖₂`.
    pub reflector_res: f64,
    /// Power slack when the constraint is active, and unit-modulus violation.
    pub feasibility_res: f64,
    /// `‖Hᴴ W_d W‖_F`, the natural scale of the precoder residual.
    pub precoder_scale: f64,
    /// `‖2(R + λI)‖₂ · ‖x‖₂`, the natural scale of the reflector residual.
    pub reflector_scale: f64,
}

impl KktResidual {
    /// Residuals divided by their scales (feasibility is already relative).
    pub fn scaled(&self) -> (f64, f64, f64) {
        let div = |a: f64, b: f64| if b > 0.0 { a / b } else { a };
        (
            div(self.precoder_res, self.precoder_scale),
            div(self.reflector_res, self.reflector_scale),
            self.feasibility_res,
        )
    }

    pub fn max_scaled(&self) -> f64 {
        let (a, b, c) = self.scaled();
        a.max(b).max(c)
    }
}

/// First-order optimality residuals of a (claimed) converged state, for the
/// power multiplier `mu` used by its last precoder update.
pub fn kkt_residual(
    state: &TransceiverState,
    ch: &ChannelSet,
    sys: &SystemConfig,
    lift: &RealLift,
    mu: f64,
) -> Result<KktResidual> {
    let h_eq = effective_channel(ch, &state.theta)?;
    let b = h_eq.adjoint() * &state.combiner;
    let rhs = &b * &state.weight;
    let lhs = &rhs * b.adjoint() * &state.precoder;
    let precoder_res = (lhs - &rhs + state.precoder.scale(mu)).norm();

    let x = stack_real(&state.theta);
    let reflector_res = reflector_kkt_residual(lift, &x);
    let r_bar = lift.r_bar();
    let spectral = crate::linalg::sym_max_eigenvalue(&r_bar).abs();

    let power = trace_re(&(&state.precoder * state.precoder.adjoint()));
    let power_gap = if mu > 0.0 {
        (power - sys.power_budget).abs() / sys.power_budget
    } else {
        0.0
    };
    let n = state.theta.len();
    let modulus_gap = (0..=n)
        .map(|i| {
            if i < n {
                (x[i] * x[i] + x[i + n] * x[i + n] - 1.0).abs()
            } else {
                (x[2 * n] * x[2 * n] - 1.0).abs()
            }
        })
        .fold(0.0, f64::max);

    Ok(KktResidual {
        precoder_res,
        reflector_res,
        feasibility_res: power_gap.max(modulus_gap),
        precoder_scale: rhs.norm(),
        reflector_scale: spectral * x.norm(),
    })
}
