//! Reduction of the reflector subproblem to a unit-modulus least squares.
//!
//! With the transceiver fixed, the weighted MSE as a function of the phase
//! vector is `tr(W·E(θ)) = ‖a_r − A_r θ‖² + c`. Writing `Ḡ = W_dᴴ Gᴴ`,
//! `H̄_d = W_dᴴ H_d W_s`, `H̄ = H W_s` and `R_y = H̄ H̄ᴴ`:
//!
//! * `W_x = (I − H̄_d) H̄ᴴ R_y⁺` (pseudo-inverse, `R_y` has rank at most `N_s`),
//! * `a_r = vec(W^{1/2} W_x R_y^{1/2})`,
//! * column `n` of `A_r` is `conj(r_n) ⊗ g_n`, with `r_n` the `n`-th column of
//!   the Hermitian root `R_y^{1/2}` and `g_n` the `n`-th column of `W^{1/2} Ḡ`.
//!
//! The conjugate comes from `vec(MΘK) = (Kᵀ ⊗ M) vec(Θ)` with Hermitian `K`.

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{psd_sqrt, trace_re, CMat, CVec, HermitianEigen, RMat, RVec};
use crate::wmmse::TransceiverState;

/// Eigenvalues of `H̄ᴴH̄` below this fraction of the largest count as zero.
pub const PINV_REL_TOL: f64 = 1e-12;

/// `min_θ ‖a_r − A_r θ‖²` plus the constant dropped from the weighted MSE.
#[derive(Debug, Clone)]
pub struct ReflectorQuadratic {
    pub a_r: CVec,
    pub a_mat: CMat,
    pub c_const: f64,
    gram: CMat,
    cross: CVec,
}

impl ReflectorQuadratic {
    pub fn new(a_r: CVec, a_mat: CMat, c_const: f64) -> Result<Self> {
        if a_mat.nrows() != a_r.len() {
            return Err(Error::Dimension(format!(
                "A_r has {} rows, a_r has length {}",
                a_mat.nrows(),
                a_r.len()
            )));
        }
        let gram = crate::linalg::hermitian_part(&(a_mat.adjoint() * &a_mat));
        let cross = a_mat.adjoint() * &a_r;
        Ok(Self {
            a_r,
            a_mat,
            c_const,
            gram,
            cross,
        })
    }

    /// Number of reflecting elements.
    pub fn n_elements(&self) -> usize {
        self.a_mat.ncols()
    }

    /// `A_rᴴ A_r`.
    pub fn gram(&self) -> &CMat {
        &self.gram
    }

    /// `A_rᴴ a_r`.
    pub fn cross(&self) -> &CVec {
        &self.cross
    }

    pub fn r_scalar(&self) -> f64 {
        self.a_r.norm_squared()
    }
}

/// Intermediate matrices of the reduction, exposed for inspection.
#[derive(Debug, Clone)]
pub struct ReflectorTerms {
    /// `Ḡ = W_dᴴ Gᴴ`, `N_s × N`.
    pub g_bar: CMat,
    /// `H̄_d = W_dᴴ H_d W_s`, `N_s × N_s`.
    pub h_d_bar: CMat,
    /// `H̄ = H W_s`, `N × N_s`.
    pub h_bar: CMat,
    /// `R_y = H̄ H̄ᴴ`.
    pub r_y: CMat,
    /// Hermitian PSD root of `R_y`.
    pub r_y_sqrt: CMat,
    /// `W_x = (I − H̄_d) H̄ᴴ R_y⁺`.
    pub w_x: CMat,
    /// Hermitian root of the weight matrix.
    pub w_sqrt: CMat,
}

impl ReflectorTerms {
    pub fn new(ch: &ChannelSet, state: &TransceiverState) -> Result<Self> {
        ch.check()?;
        let ns = state.precoder.ncols();
        if state.combiner.ncols() != ns
            || state.weight.shape() != (ns, ns)
            || state.precoder.nrows() != ch.n_tx()
            || state.combiner.nrows() != ch.n_rx()
        {
            return Err(Error::Dimension("transceiver state does not match channel".into()));
        }
        let w_d_h = state.combiner.adjoint();
        let g_bar = &w_d_h * ch.g_ue_ris.adjoint();
        let h_d_bar = &w_d_h * &ch.h_direct * &state.precoder;
        let h_bar = &ch.h_bs_ris * &state.precoder;

        // Thin route through the N_s × N_s Gram: H̄ᴴH̄ = V S² Vᴴ gives
        // R_y^{1/2} = H̄ V S⁻¹ Vᴴ H̄ᴴ and H̄ᴴ R_y⁺ = V S⁻² Vᴴ H̄ᴴ.
        let small = h_bar.adjoint() * &h_bar;
        let eig = HermitianEigen::new(&small);
        let cutoff = PINV_REL_TOL * eig.max().max(0.0);
        let inv_root = eig.map(|v| if v > cutoff && v > 0.0 { 1.0 / v.sqrt() } else { 0.0 });
        let inv = eig.map(|v| if v > cutoff && v > 0.0 { 1.0 / v } else { 0.0 });

        let r_y = crate::linalg::hermitian_part(&(&h_bar * h_bar.adjoint()));
        let r_y_sqrt = crate::linalg::hermitian_part(&(&h_bar * inv_root * h_bar.adjoint()));
        let eye = CMat::identity(ns, ns);
        let w_x = (&eye - &h_d_bar) * inv * h_bar.adjoint();
        let w_sqrt = psd_sqrt(&state.weight);
        Ok(Self {
            g_bar,
            h_d_bar,
            h_bar,
            r_y,
            r_y_sqrt,
            w_x,
            w_sqrt,
        })
    }
}

/// Builds `(a_r, A_r, c)` for the current transceiver.
pub fn build_reflector_quadratic(
    ch: &ChannelSet,
    state: &TransceiverState,
    noise_power: f64,
) -> Result<ReflectorQuadratic> {
    let t = ReflectorTerms::new(ch, state)?;
    let n = ch.n_elements();
    let ns = state.precoder.ncols();
    let w = &state.weight;

    let target = &t.w_sqrt * &t.w_x * &t.r_y_sqrt; // N_s × N
    let a_r = CVec::from_column_slice(target.as_slice());
    let g_tilde = &t.w_sqrt * &t.g_bar; // N_s × N
    let mut a_mat = CMat::zeros(ns * n, n);
    for col in 0..n {
        let r = t.r_y_sqrt.column(col);
        let g = g_tilde.column(col);
        let mut dst = a_mat.column_mut(col);
        for k in 0..n {
            let rk = r[k].conj();
            for s in 0..ns {
                dst[k * ns + s] = rk * g[s];
            }
        }
    }

    // A_rᴴA_r = conj(R_y) ∘ (Ḡᴴ W Ḡ) and A_rᴴa_r = diag(Ḡᴴ W (I − H̄_d) H̄ᴴ).
    let coupling = t.g_bar.adjoint() * w * &t.g_bar;
    let gram = CMat::from_fn(n, n, |i, j| t.r_y[(i, j)].conj() * coupling[(i, j)]);
    let gram = crate::linalg::hermitian_part(&gram);
    let left = t.g_bar.adjoint() * w; // N × N_s
    let eye = CMat::identity(ns, ns);
    let right = (&eye - &t.h_d_bar) * t.h_bar.adjoint(); // N_s × N
    let cross = CVec::from_iterator(
        n,
        (0..n).map(|i| (0..ns).map(|s| left[(i, s)] * right[(s, i)]).sum::<Complex64>()),
    );

    let resid = &eye - &t.h_d_bar;
    let c_const = trace_re(&(&resid * resid.adjoint() * w))
        + noise_power * trace_re(&(state.combiner.adjoint() * &state.combiner * w))
        - a_r.norm_squared();

    Ok(ReflectorQuadratic {
        a_r,
        a_mat,
        c_const,
        gram,
        cross,
    })
}

/// `‖a_r − A_r θ‖²`.
pub fn eval_reflector_objective(q: &ReflectorQuadratic, theta: &CVec) -> f64 {
    (&q.a_r - &q.a_mat * theta).norm_squared()
}

/// Same value through the Gram form `r + θᴴ(A_rᴴA_r)θ − 2 Re(θᴴ A_rᴴ a_r)`.
pub fn eval_reflector_objective_gram(q: &ReflectorQuadratic, theta: &CVec) -> f64 {
    let quad = theta.dotc(&(&q.gram * theta)).re;
    let lin = theta.dotc(&q.cross).re;
    (q.r_scalar() + quad - 2.0 * lin).max(0.0)
}

/// Real-valued lift: `xᵀ R x = ‖a_r − A_r θ‖²` for `x = [Re θ; Im θ; 1]`.
#[derive(Debug, Clone)]
pub struct RealLift {
    pub p_mat: RMat,
    pub t_vec: RVec,
    pub r_scal: f64,
    pub big_r: RMat,
    pub lambda_shift: f64,
}

impl RealLift {
    pub fn n_elements(&self) -> usize {
        self.t_vec.len() / 2
    }

    /// `2(R + λI)`.
    pub fn r_bar(&self) -> RMat {
        let dim = self.big_r.nrows();
        (&self.big_r + RMat::identity(dim, dim) * self.lambda_shift) * 2.0
    }
}

/// Stacks `[Re θ; Im θ; 1]`.
pub fn stack_real(theta: &CVec) -> RVec {
    let n = theta.len();
    let mut x = RVec::zeros(2 * n + 1);
    for (i, z) in theta.iter().enumerate() {
        x[i] = z.re;
        x[i + n] = z.im;
    }
    x[2 * n] = 1.0;
    x
}

pub fn lift_to_real(q: &ReflectorQuadratic, lambda_shift: f64) -> Result<RealLift> {
    if !(lambda_shift >= 0.0) {
        return Err(Error::Config("lambda shift must be non-negative".into()));
    }
    let n = q.n_elements();
    let g = &q.gram;
    let mut p_mat = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = g[(i, j)];
            p_mat[(i, j)] = z.re;
            p_mat[(i + n, j + n)] = z.re;
            p_mat[(i, j + n)] = -z.im;
            p_mat[(i + n, j)] = z.im;
        }
    }
    let p_mat = (&p_mat + p_mat.transpose()) * 0.5;
    let mut t_vec = RVec::zeros(2 * n);
    for (i, z) in q.cross.iter().enumerate() {
        t_vec[i] = z.re;
        t_vec[i + n] = z.im;
    }
    let r_scal = q.r_scalar();
    let mut big_r = RMat::zeros(2 * n + 1, 2 * n + 1);
    big_r.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&p_mat);
    for i in 0..2 * n {
        big_r[(i, 2 * n)] = -t_vec[i];
        big_r[(2 * n, i)] = -t_vec[i];
    }
    big_r[(2 * n, 2 * n)] = r_scal;
    Ok(RealLift {
        p_mat,
        t_vec,
        r_scal,
        big_r,
        lambda_shift,
    })
}

/// Indicator `E_n` (1-based) with `xᵀE_n x = x_n² + x_{n+N}²` for `n ≤ N` and
/// `x_{2N+1}²` for `n = N + 1`.
pub fn unit_constraint_indicator(n: usize, dim_n: usize) -> Result<RMat> {
    if n == 0 || n > dim_n + 1 {
        return Err(Error::IndexOutOfRange {
            index: n,
            max: dim_n + 1,
        });
    }
    let size = 2 * dim_n + 1;
    let mut e = RMat::zeros(size, size);
    if n <= dim_n {
        e[(n - 1, n - 1)] = 1.0;
        e[(n - 1 + dim_n, n - 1 + dim_n)] = 1.0;
    } else {
        e[(size - 1, size - 1)] = 1.0;
    }
    Ok(e)
}
