//! Semidefinite relaxation of the reflector problem.
//!
//! Homogenizing `θ̄ = [θ; 1]` gives `h(θ) = θ̄ᴴ R_r θ̄` with
//! `R_r = [A_rᴴA_r, −A_rᴴa_r; −a_rᴴA_r, a_rᴴa_r]`. Lifting `Θ̄ = θ̄θ̄ᴴ` and
//! dropping the rank constraint leaves
//!
//! ```text
//! min tr(R_r Θ̄)  s.t.  diag(Θ̄) = 1,  Θ̄ ⪰ 0
//! ```
//!
//! which is solved here by ADMM on the splitting `X = Z`, `X` in the affine
//! set `{diag = 1}`, `Z` in the PSD cone. Both projections are cheap: the
//! affine one overwrites the diagonal, the conic one clamps eigenvalues.
//! A feasible point is then recovered by Gaussian randomization.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, trace_re, CMat, CVec, HermitianEigen};
use crate::random::{complex_normal, seeded_rng};
use crate::reflector::{eval_reflector_objective_gram, ReflectorQuadratic};

#[derive(Debug, Clone)]
pub struct SdrProblem {
    pub r_r: CMat,
}

impl SdrProblem {
    pub fn dim(&self) -> usize {
        self.r_r.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpResiduals {
    pub primal_infeas: f64,
    pub dual_infeas: f64,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct SdrSolution {
    /// Unit-diagonal PSD matrix.
    pub big_theta: CMat,
    /// Certified lower bound on the relaxation optimum (dual objective of a
    /// feasible dual point), hence a lower bound on `h` over the unit circle.
    pub objective: f64,
    /// `tr(R_r Θ̄)` at the returned primal point.
    pub primal_objective: f64,
    pub residuals: SdpResiduals,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdrOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Number of Gaussian randomization trials.
    pub trials: usize,
    pub seed: u64,
}

impl Default for SdrOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 5000,
            trials: 500,
            seed: 0,
        }
    }
}

pub fn build_rr(q: &ReflectorQuadratic) -> SdrProblem {
    let n = q.n_elements();
    let mut r_r = CMat::zeros(n + 1, n + 1);
    r_r.view_mut((0, 0), (n, n)).copy_from(q.gram());
    for (i, z) in q.cross().iter().enumerate() {
        r_r[(i, n)] = -z;
        r_r[(n, i)] = -z.conj();
    }
    r_r[(n, n)] = Complex64::new(q.r_scalar(), 0.0);
    SdrProblem { r_r }
}

fn project_psd(m: &CMat) -> CMat {
    HermitianEigen::new(m).map(|v| v.max(0.0))
}

/// Rescales a PSD matrix to unit diagonal, `D^{-1/2} Z D^{-1/2}`.
fn unit_diagonal(z: &CMat) -> CMat {
    let n = z.nrows();
    let d: Vec<f64> = (0..n)
        .map(|i| {
            let v = z[(i, i)].re;
            if v > 0.0 {
                1.0 / v.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let mut out = CMat::from_fn(n, n, |i, j| z[(i, j)] * (d[i] * d[j]));
    for i in 0..n {
        // A zero diagonal entry means a zero row; the identity keeps PSD.
        out[(i, i)] = Complex64::new(1.0, 0.0);
    }
    hermitian_part(&out)
}

/// Dual bound `Σ y` after shifting `y` so that `C − Diag(y) ⪰ 0`.
fn certified_dual(c: &CMat, y: &[f64]) -> f64 {
    let n = c.nrows();
    let mut slack = c.clone();
    for i in 0..n {
        slack[(i, i)] -= Complex64::new(y[i], 0.0);
    }
    let shift = HermitianEigen::new(&slack).min().min(0.0);
    y.iter().sum::<f64>() + n as f64 * shift
}

/// Solves the unit-diagonal SDP to relative primal/dual residuals and
/// duality gap below `tol`. The gap is measured on the cost scaled to unit
/// Frobenius norm. The reported objective is a certified lower bound.
pub fn solve_unit_diag_sdp(p: &SdrProblem, tol: f64, max_iter: usize) -> Result<SdrSolution> {
    if !(tol > 0.0) {
        return Err(Error::Config("tol must be positive".into()));
    }
    let n = p.dim();
    let c_raw = hermitian_part(&p.r_r);
    // With diag(X) = 1 fixed, the diagonal of C only adds a constant.
    // Dropping it improves the conditioning of the splitting considerably.
    let mut c_off = c_raw.clone();
    let diag_sum: f64 = (0..n).map(|i| c_raw[(i, i)].re).sum();
    for i in 0..n {
        c_off[(i, i)] = Complex64::new(0.0, 0.0);
    }
    let scale = c_off.norm().max(f64::MIN_POSITIVE);
    let c = c_off.unscale(scale);

    let mut rho = 1.0;
    let mut z = CMat::identity(n, n);
    let mut u = CMat::zeros(n, n);
    let mut best = SdpResiduals {
        primal_infeas: f64::INFINITY,
        dual_infeas: f64::INFINITY,
        gap: f64::INFINITY,
    };

    for it in 1..=max_iter {
        let mut x = &z - &u - c.unscale(rho);
        for i in 0..n {
            x[(i, i)] = Complex64::new(1.0, 0.0);
        }
        let x = hermitian_part(&x);
        let z_old = z;
        let u_old = u.clone();
        z = project_psd(&(&x + &u));
        u += &x - &z;

        let r = (&x - &z).norm();
        let s = rho * (&z - &z_old).norm();
        let primal_rel = r / 1f64.max(x.norm()).max(z.norm());
        let dual_rel = s / (1.0 + rho * u.norm());

        if primal_rel <= tol && dual_rel <= tol {
            // X-update optimality: C + ρ(X − Z_old + U_old) = Diag(y).
            let m = &c + (&x - &z_old + &u_old).scale(rho);
            let dual_y: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
            let dual = certified_dual(&c, &dual_y);
            let theta_bar = unit_diagonal(&z);
            let primal = trace_re(&(&c * &theta_bar));
            let gap = (primal - dual).abs() / (1.0 + primal.abs() + dual.abs());
            let res = SdpResiduals {
                primal_infeas: primal_rel,
                dual_infeas: dual_rel,
                gap,
            };
            if gap <= tol {
                return Ok(SdrSolution {
                    primal_objective: trace_re(&(&c_raw * &theta_bar)),
                    big_theta: theta_bar,
                    objective: dual * scale + diag_sum,
                    residuals: res,
                    iterations: it,
                });
            }
            best = res;
        } else if primal_rel + dual_rel < best.primal_infeas + best.dual_infeas {
            best = SdpResiduals {
                primal_infeas: primal_rel,
                dual_infeas: dual_rel,
                gap: best.gap,
            };
        }

        if it % 10 == 0 {
            if primal_rel > 10.0 * dual_rel {
                rho *= 2.0;
                u.unscale_mut(2.0);
            } else if dual_rel > 10.0 * primal_rel {
                rho /= 2.0;
                u.scale_mut(2.0);
            }
        }
    }
    Err(Error::SdpNotConverged {
        iterations: max_iter,
        primal_infeas: best.primal_infeas,
        dual_infeas: best.dual_infeas,
        gap: best.gap,
    })
}

/// Draws `ξ ~ CN(0, Θ̄)` for each trial, references phases to the last
/// (homogenizing) entry and keeps the candidate with the smallest `h`.
/// Trial `k` uses substream `k` of `seed`, so results do not depend on the
/// order trials are evaluated in; ties go to the lowest index.
pub fn gaussian_randomize(
    sol: &SdrSolution,
    q: &ReflectorQuadratic,
    trials: usize,
    seed: u64,
) -> CVec {
    let n = q.n_elements();
    let eig = HermitianEigen::new(&sol.big_theta);
    let mut factor = eig.vectors.clone();
    // Round-off eigenvalues would otherwise enter at square-root size.
    let floor = eig.max().max(0.0) * 1e-12;
    for (j, v) in eig.values.iter().enumerate() {
        let v = if *v > floor { *v } else { 0.0 };
        factor.column_mut(j).scale_mut(v.sqrt());
    }
    let mut best: Option<(f64, CVec)> = None;
    for trial in 0..trials.max(1) {
        let mut rng = seeded_rng(seed, trial as u64);
        let z = CVec::from_fn(n + 1, |_, _| complex_normal(&mut rng));
        let xi = &factor * z;
        let reference = xi[n];
        let candidate = CVec::from_iterator(
            n,
            (0..n).map(|i| {
                let v = xi[i] * reference.conj();
                let r = v.norm();
                if r > 0.0 {
                    v / r
                } else {
                    Complex64::new(1.0, 0.0)
                }
            }),
        );
        let h = eval_reflector_objective_gram(q, &candidate);
        if best.as_ref().is_none_or(|(b, _)| h < *b) {
            best = Some((h, candidate));
        }
    }
    best.expect("at least one trial").1
}

#[derive(Debug, Clone)]
pub struct SdrOutcome {
    pub solution: SdrSolution,
    /// `h` at the randomized unit-modulus point.
    pub objective: f64,
}

/// Relaxation, then randomization.
pub fn sdr_solve(q: &ReflectorQuadratic, opts: &SdrOptions) -> Result<(CVec, SdrOutcome)> {
    let problem = build_rr(q);
    let solution = solve_unit_diag_sdp(&problem, opts.tol, opts.max_iter)?;
    let theta = gaussian_randomize(&solution, q, opts.trials, opts.seed);
    let objective = eval_reflector_objective_gram(q, &theta);
    Ok((theta, SdrOutcome { solution, objective }))
}
