//! Sequence of closed forms for `min ‖a_r − A_r θ‖²` over unit-modulus `θ`.
//!
//! The unit-modulus constraints `x_n² + x_{n+N}² = 1` of the real lift are
//! replaced by the affine constraints `B x = 1`, where row `n` of `B` is the
//! unit vector `(cos φ_n, sin φ_n)` placed on the coordinates of element `n`
//! and `φ` are the phases of the previous iterate. Each subproblem
//! `min xᵀ R̄ x  s.t.  B x = 1` with `R̄ = 2(R + λI)` has the closed form
//! `x = R̄⁻¹Bᵀ(B R̄⁻¹ Bᵀ)⁻¹ 1`. The phases of `x` seed the next `B`.
//!
//! With `λ ≥ (N/8)·λ_max(A_rᴴA_r) + ‖A_rᴴa_r‖` the objective at the projected
//! iterates is non-increasing.

use nalgebra::Cholesky;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{max_modulus_error, project_unit_modulus, CVec, HermitianEigen, RMat, RVec};
use crate::reflector::{eval_reflector_objective_gram, lift_to_real, RealLift, ReflectorQuadratic};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScfOptions {
    /// Stop once `|h(θ_i) − h(θ_{i−1})| < eps`.
    pub eps: f64,
    pub max_iter: usize,
    /// Replaces [`lambda_bound`]. Smaller shifts move faster but lose the
    /// monotonicity guarantee.
    pub lambda_override: Option<f64>,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self {
            eps: 1e-4,
            max_iter: 500,
            lambda_override: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScfState {
    /// Last lifted iterate `[Re θ⁽ⁱ⁾; Im θ⁽ⁱ⁾; 1]` (before projection).
    pub x: RVec,
    /// `exp(j·arg θ⁽ⁱ⁾)`.
    pub theta_proj: CVec,
    /// `h` at the projected iterates, starting with the initial point.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    /// `max_n ||θ⁽ⁱ⁾_n| − 1|` of the last unprojected iterate.
    pub modulus_error: f64,
    pub lambda: f64,
}

/// `(N/8)·λ_max(A_rᴴA_r) + ‖A_rᴴ a_r‖₂`.
pub fn lambda_bound(q: &ReflectorQuadratic) -> f64 {
    let n = q.n_elements();
    if n == 0 {
        return 0.0;
    }
    let lmax = HermitianEigen::new(q.gram()).max().max(0.0);
    n as f64 / 8.0 * lmax + q.cross().norm()
}

/// Affine constraint matrix built from the phases of `theta_prev`.
pub fn scf_constraint_matrix(theta_prev: &CVec) -> Result<RMat> {
    let n = theta_prev.len();
    let mut b = RMat::zeros(n + 1, 2 * n + 1);
    for (i, z) in theta_prev.iter().enumerate() {
        let r = z.norm();
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::UndefinedPhase { index: i });
        }
        b[(i, i)] = z.re / r;
        b[(i, i + n)] = z.im / r;
    }
    b[(n, 2 * n)] = 1.0;
    Ok(b)
}

/// Closed-form minimizer of `xᵀ R̄ x` over `{B x = 1}`.
pub fn scf_step(lift: &RealLift, b_mat: &RMat) -> Result<RVec> {
    let r_bar = lift.r_bar();
    if b_mat.ncols() != r_bar.nrows() {
        return Err(Error::Dimension("constraint matrix width".into()));
    }
    let chol = Cholesky::new(r_bar).ok_or(Error::DegenerateConstraintSystem)?;
    let k = chol.solve(&b_mat.transpose()); // R̄⁻¹ Bᵀ
    let s = b_mat * &k;
    let ones = RVec::from_element(b_mat.nrows(), 1.0);
    let y = Cholesky::new((&s + s.transpose()) * 0.5)
        .ok_or(Error::DegenerateConstraintSystem)?
        .solve(&ones);
    Ok(k * y)
}

/// Per-call cache of `R̄⁻¹`; only `B` changes between inner iterations.
struct ScfKernel {
    r_bar_inv: RMat,
    n: usize,
}

impl ScfKernel {
    fn new(lift: &RealLift) -> Result<Self> {
        let chol = Cholesky::new(lift.r_bar()).ok_or(Error::DegenerateConstraintSystem)?;
        let inv = chol.inverse();
        Ok(Self {
            r_bar_inv: (&inv + inv.transpose()) * 0.5,
            n: lift.n_elements(),
        })
    }

    /// Same as [`scf_step`] with `B` built from the unit-modulus `phases`.
    fn step(&self, phases: &CVec) -> Result<RVec> {
        let n = self.n;
        let m = &self.r_bar_inv;
        let dim = 2 * n + 1;
        let mut k = RMat::zeros(dim, n + 1);
        for (j, z) in phases.iter().enumerate() {
            let (c, s) = (z.re, z.im);
            for r in 0..dim {
                k[(r, j)] = c * m[(r, j)] + s * m[(r, j + n)];
            }
        }
        k.column_mut(n).copy_from(&m.column(2 * n));

        let mut bk = RMat::zeros(n + 1, n + 1);
        for (i, z) in phases.iter().enumerate() {
            let (c, s) = (z.re, z.im);
            for j in 0..=n {
                bk[(i, j)] = c * k[(i, j)] + s * k[(i + n, j)];
            }
        }
        for j in 0..=n {
            bk[(n, j)] = k[(2 * n, j)];
        }
        let sym = (&bk + bk.transpose()) * 0.5;
        let y = Cholesky::new(sym)
            .ok_or(Error::DegenerateConstraintSystem)?
            .solve(&RVec::from_element(n + 1, 1.0));
        Ok(k * y)
    }
}

fn complex_part(x: &RVec, n: usize) -> CVec {
    CVec::from_iterator(n, (0..n).map(|i| Complex64::new(x[i], x[i + n])))
}

/// Shift actually used: the requested one, floored so `R̄` stays definite.
fn effective_lambda(q: &ReflectorQuadratic, opts: &ScfOptions) -> f64 {
    let requested = opts.lambda_override.unwrap_or_else(|| lambda_bound(q));
    let scale = q.gram().norm().max(q.r_scalar()).max(1.0);
    requested.max(1e-12 * scale)
}

/// Runs the closed-form iterations from `theta_init` until the objective at
/// the projected iterates changes by less than `eps` (at least one step).
pub fn scf_solve(
    q: &ReflectorQuadratic,
    theta_init: &CVec,
    opts: &ScfOptions,
) -> Result<(CVec, ScfState)> {
    let n = q.n_elements();
    if theta_init.len() != n {
        return Err(Error::Dimension(format!(
            "theta_init has length {}, expected {n}",
            theta_init.len()
        )));
    }
    if !(opts.eps > 0.0) {
        return Err(Error::Config("eps must be positive".into()));
    }
    let lambda = effective_lambda(q, opts);
    let lift = lift_to_real(q, lambda)?;
    let kernel = ScfKernel::new(&lift)?;

    let ones = CVec::from_element(n, Complex64::new(1.0, 0.0));
    let mut theta = project_unit_modulus(theta_init, &ones);
    let mut h_prev = eval_reflector_objective_gram(q, &theta);
    let mut trace = vec![h_prev];
    let mut x = crate::reflector::stack_real(&theta);
    let mut modulus_error = 0.0;
    let mut iterations = 0;

    while iterations < opts.max_iter.max(1) {
        iterations += 1;
        x = kernel.step(&theta)?;
        // The last constraint row pins this coordinate; drop the round-off.
        x[2 * n] = 1.0;
        let raw = complex_part(&x, n);
        modulus_error = max_modulus_error(&raw);
        theta = project_unit_modulus(&raw, &theta);
        let h = eval_reflector_objective_gram(q, &theta);
        trace.push(h);
        let done = (h - h_prev).abs() < opts.eps;
        h_prev = h;
        if done {
            break;
        }
    }

    let state = ScfState {
        x,
        theta_proj: theta.clone(),
        objective_trace: trace,
        iterations,
        modulus_error,
        lambda,
    };
    Ok((theta, state))
}

/// `min_η ‖2(R + λI)x + Σ 2η_n E_n x‖₂`.
///
/// The `E_n x` have disjoint supports, so the least squares splits into one
/// projection per element: the residual on block `{n, n+N}` is the part of
/// `2(R+λI)x` orthogonal to `(x_n, x_{n+N})`. The shift `λ` drops out.
pub fn reflector_kkt_residual(lift: &RealLift, x: &RVec) -> f64 {
    let n = lift.n_elements();
    let v = lift.r_bar() * x;
    let mut acc = 0.0;
    for i in 0..n {
        let (a, b) = (x[i], x[i + n]);
        let (va, vb) = (v[i], v[i + n]);
        let norm_sq = a * a + b * b;
        acc += if norm_sq > 0.0 {
            let cross = va * b - vb * a;
            cross * cross / norm_sq
        } else {
            va * va + vb * vb
        };
    }
    if x[2 * n] == 0.0 {
        acc += v[2 * n] * v[2 * n];
    }
    acc.sqrt()
}
