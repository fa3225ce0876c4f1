//! Transceiver updates for a fixed reflector: MMSE combiner, MSE weight and
//! the power-constrained precoder.
//!
//! For a fixed phase vector the weighted-MSE objective
//! `f = tr(W·E) − ln det W` is convex in each of the three blocks separately,
//! and each update below is the exact block minimizer. The natural logarithm
//! is what makes `W = E⁻¹` the minimizer; rates are still reported in bits.

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{hpd_solve, ln_det_hpd, trace_re, CMat, CVec, HermitianEigen};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub n_streams: usize,
    /// Transmit power budget `P` (linear).
    pub power_budget: f64,
    /// Noise power `σ²` (linear).
    pub noise_power: f64,
}

impl SystemConfig {
    /// `P = 1` and `σ² = 10^(−snr_db/10)`.
    pub fn from_snr_db(n_streams: usize, snr_db: f64) -> Self {
        Self {
            n_streams,
            power_budget: 1.0,
            noise_power: 10f64.powf(-snr_db / 10.0),
        }
    }

    pub fn validate(&self, n_tx: usize, n_rx: usize) -> Result<()> {
        if self.n_streams == 0 || self.n_streams > n_tx.min(n_rx) {
            return Err(Error::Config(format!(
                "n_streams = {} must lie in 1..={}",
                self.n_streams,
                n_tx.min(n_rx)
            )));
        }
        if !(self.power_budget > 0.0 && self.power_budget.is_finite()) {
            return Err(Error::Config("power budget must be positive".into()));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(Error::Config("noise power must be positive".into()));
        }
        Ok(())
    }
}

/// The four alternating variables.
#[derive(Debug, Clone, PartialEq)]
pub struct TransceiverState {
    /// `W_s`, `N_t × N_s`.
    pub precoder: CMat,
    /// `W_d`, `N_r × N_s`.
    pub combiner: CMat,
    /// `W`, `N_s × N_s` Hermitian PD.
    pub weight: CMat,
    /// Unit-modulus reflection coefficients, length `N`.
    pub theta: CVec,
}

/// `Gᴴ·diag(θ)·H + H_d`.
pub fn effective_channel(ch: &ChannelSet, theta: &CVec) -> Result<CMat> {
    ch.check()?;
    if theta.len() != ch.n_elements() {
        return Err(Error::Dimension(format!(
            "theta has length {}, RIS has {} elements",
            theta.len(),
            ch.n_elements()
        )));
    }
    let mut scaled = ch.h_bs_ris.clone();
    for (mut row, t) in scaled.row_iter_mut().zip(theta.iter()) {
        row *= *t;
    }
    Ok(ch.g_ue_ris.adjoint() * scaled + &ch.h_direct)
}

/// `E = (I − W_dᴴ H W_s)(I − W_dᴴ H W_s)ᴴ + σ² W_dᴴ W_d`.
pub fn mse_matrix(h_eq: &CMat, w_s: &CMat, w_d: &CMat, sigma2: f64) -> CMat {
    let ns = w_s.ncols();
    let residual = CMat::identity(ns, ns) - w_d.adjoint() * h_eq * w_s;
    let e = &residual * residual.adjoint() + (w_d.adjoint() * w_d).scale(sigma2);
    crate::linalg::hermitian_part(&e)
}

/// Achievable rate in bits/s/Hz for an arbitrary full-column-rank combiner:
/// `log₂ det(I + σ⁻² (W_dᴴW_d)⁻¹ W_dᴴ H W_s W_sᴴ Hᴴ W_d)`.
pub fn achievable_rate(h_eq: &CMat, w_s: &CMat, w_d: &CMat, sigma2: f64) -> Result<f64> {
    let gram = w_d.adjoint() * w_d;
    let chol = crate::linalg::hermitian_part(&gram)
        .cholesky()
        .ok_or(Error::SingularCombinerGram)?;
    let eig_min = HermitianEigen::new(&gram).min();
    if eig_min <= 1e-14 * gram.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::SingularCombinerGram);
    }
    // det(I + G⁻¹M) = det(I + L⁻¹ M L⁻ᴴ) with G = L Lᴴ.
    let signal = w_d.adjoint() * h_eq * w_s;
    let l = chol.l();
    let whitened = l
        .solve_lower_triangular(&signal)
        .ok_or(Error::SingularCombinerGram)?;
    let m = CMat::identity(w_d.ncols(), w_d.ncols())
        + (&whitened * whitened.adjoint()).scale(1.0 / sigma2);
    let ln_det = ln_det_hpd(&m).ok_or(Error::SingularCombinerGram)?;
    Ok((ln_det / std::f64::consts::LN_2).max(0.0))
}

/// `log₂ det(E⁻¹)`, the rate at an MMSE fixed point.
pub fn rate_from_mse(e: &CMat) -> Result<f64> {
    let ln_det = ln_det_hpd(e).ok_or(Error::SingularMse {
        min_eigenvalue: HermitianEigen::new(e).min(),
    })?;
    Ok(-ln_det / std::f64::consts::LN_2)
}

/// `W_d = (σ²I + H W_s W_sᴴ Hᴴ)⁻¹ H W_s`.
pub fn mmse_combiner(h_eq: &CMat, w_s: &CMat, sigma2: f64) -> CMat {
    let hw = h_eq * w_s;
    let nr = h_eq.nrows();
    let cov = CMat::identity(nr, nr).scale(sigma2) + &hw * hw.adjoint();
    hpd_solve(&cov, &hw).expect("σ²I + HWWᴴHᴴ is positive definite for σ² > 0")
}

/// `W = E⁻¹`. Fails when `E` is numerically singular.
pub fn weight_update(e: &CMat) -> Result<CMat> {
    let eig = HermitianEigen::new(e);
    let min = eig.min();
    if !(min > 1e-12) {
        return Err(Error::SingularMse {
            min_eigenvalue: min,
        });
    }
    Ok(eig.map(|v| 1.0 / v))
}

/// The weighted-MSE objective `tr(W·E) − ln det W`.
pub fn wmmse_objective(e: &CMat, w: &CMat) -> Result<f64> {
    let ln_det = ln_det_hpd(w).ok_or(Error::SingularMse {
        min_eigenvalue: HermitianEigen::new(w).min(),
    })?;
    Ok(trace_re(&(w * e)) - ln_det)
}

fn power_at(lam: &[f64], phi: &[f64], mu: f64) -> f64 {
    lam.iter()
        .zip(phi)
        .map(|(&l, &p)| if p == 0.0 { 0.0 } else { p / ((l + mu) * (l + mu)) })
        .sum()
}

/// Finds `μ ≥ 0` with `Σ φ_i / (λ_i + μ)² = P` by bisection on
/// `[0, sqrt(Σφ / P)]`. The returned `μ` is the upper end of the final
/// bracket, so the resulting power never exceeds `P`.
pub fn bisection_mu(lam_diag: &[f64], phi_diag: &[f64], power: f64) -> Result<f64> {
    if lam_diag.len() != phi_diag.len() {
        return Err(Error::Dimension("Λ and Φ lengths differ".into()));
    }
    if !(power > 0.0) {
        return Err(Error::Config("power must be positive".into()));
    }
    let total: f64 = phi_diag.iter().map(|p| p.max(0.0)).sum();
    if total <= 0.0 {
        return Err(Error::ZeroObjectiveCoupling);
    }
    let phi: Vec<f64> = phi_diag.iter().map(|p| p.max(0.0)).collect();
    let lam: Vec<f64> = lam_diag.iter().map(|l| l.max(0.0)).collect();

    let mut lo = 0.0_f64;
    let mut hi = (total / power).sqrt();
    if power_at(&lam, &phi, lo) <= power {
        return Ok(0.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if power_at(&lam, &phi, mid) > power {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Output of [`precoder_update`].
#[derive(Debug, Clone)]
pub struct PrecoderUpdate {
    pub precoder: CMat,
    /// Lagrange multiplier of the power constraint.
    pub mu: f64,
}

/// Minimizes `tr(W·E)` over `W_s` subject to `tr(W_s W_sᴴ) ≤ P`:
/// `W_s = (Hᴴ W_d W W_dᴴ H + μI)⁻¹ Hᴴ W_d W`.
///
/// With `Hᴴ W_d W W_dᴴ H = U Λ Uᴴ` and `Φ = Uᴴ Hᴴ W_d W² W_dᴴ H U`, the
/// transmit power is `Σ Φ_ii / (Λ_ii + μ)²`. `μ = 0` is kept when the Gram
/// matrix is invertible and the power fits; otherwise `μ` comes from
/// [`bisection_mu`]. When the Gram matrix is singular but the minimum-norm
/// stationary point already fits the budget, that point is returned with
/// `μ = 0` (the null-space directions carry no objective coupling).
pub fn precoder_update(h_eq: &CMat, w_d: &CMat, w: &CMat, power: f64) -> Result<PrecoderUpdate> {
    if w_d.nrows() != h_eq.nrows() || w.nrows() != w_d.ncols() || !w.is_square() {
        return Err(Error::Dimension("precoder update operand shapes".into()));
    }
    let b = h_eq.adjoint() * w_d; // N_t × N_s
    let rhs = &b * w; // Hᴴ W_d W
    let gram = &rhs * b.adjoint(); // Hᴴ W_d W W_dᴴ H
    let eig = HermitianEigen::new(&gram);
    let u_rhs = eig.vectors.adjoint() * &rhs; // Uᴴ Hᴴ W_d W
    let lam: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let phi: Vec<f64> = u_rhs
        .row_iter()
        .map(|r| r.iter().map(|z| z.norm_sqr()).sum())
        .collect();

    let lam_max = lam.iter().copied().fold(0.0, f64::max);
    let null_tol = 1e-12 * lam_max.max(f64::MIN_POSITIVE);
    let invertible = lam.iter().all(|&l| l > null_tol);

    let mu = if invertible && power_at(&lam, &phi, 0.0) <= power {
        0.0
    } else {
        // Directions with λ_i ≈ 0 only carry round-off coupling.
        let phi_clean: Vec<f64> = lam
            .iter()
            .zip(&phi)
            .map(|(&l, &p)| if l > null_tol { p } else { 0.0 })
            .collect();
        if !invertible && power_at(&lam, &phi_clean, 0.0) <= power {
            0.0
        } else {
            bisection_mu(&lam, &phi_clean, power)?
        }
    };

    let scale: Vec<f64> = lam
        .iter()
        .map(|&l| {
            let d = l + mu;
            if d > null_tol {
                1.0 / d
            } else {
                0.0
            }
        })
        .collect();
    let mut scaled = u_rhs;
    for (i, mut row) in scaled.row_iter_mut().enumerate() {
        row *= Complex64::new(scale[i], 0.0);
    }
    let precoder = &eig.vectors * scaled;
    Ok(PrecoderUpdate { precoder, mu })
}

/// Dominant `n_streams` right singular vectors of `h_eq`, scaled so the
/// precoder uses the full power budget.
pub fn svd_init_precoder(h_eq: &CMat, n_streams: usize, power: f64) -> CMat {
    let gram = h_eq.adjoint() * h_eq;
    let eig = HermitianEigen::new(&gram);
    let nt = h_eq.ncols();
    let mut w = CMat::zeros(nt, n_streams);
    for k in 0..n_streams {
        w.set_column(k, &eig.vectors.column(nt - 1 - k));
    }
    w.scale((power / n_streams as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{complex_normal, seeded_rng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_mat(r: usize, cols: usize, seed: u64) -> CMat {
        let mut rng = seeded_rng(seed, 9);
        CMat::from_fn(r, cols, |_, _| complex_normal(&mut rng))
    }

    fn scalar(z: Complex64) -> CMat {
        CMat::from_element(1, 1, z)
    }

    #[test]
    fn effective_channel_special_cases() {
        let h = random_mat(3, 2, 1);
        let hd = random_mat(2, 2, 2);
        let ch = ChannelSet::new(h.clone(), CMat::zeros(3, 2), hd.clone()).unwrap();
        let theta = CVec::from_element(3, c(0.0, 1.0));
        assert!((effective_channel(&ch, &theta).unwrap() - &hd).norm() < 1e-15);

        let g = random_mat(3, 2, 3);
        let ch = ChannelSet::new(h.clone(), g.clone(), hd.clone()).unwrap();
        let ones = CVec::from_element(3, c(1.0, 0.0));
        let expect = g.adjoint() * &h + &hd;
        assert!((effective_channel(&ch, &ones).unwrap() - expect).norm() < 1e-13);

        let ch1 = ChannelSet::new(scalar(c(0.3, 0.4)), scalar(c(-1.0, 2.0)), scalar(c(0.5, 0.0))).unwrap();
        let t = CVec::from_element(1, c(0.6, 0.8));
        let expect = c(-1.0, 2.0).conj() * c(0.6, 0.8) * c(0.3, 0.4) + c(0.5, 0.0);
        assert!((effective_channel(&ch1, &t).unwrap()[(0, 0)] - expect).norm() < 1e-15);

        assert!(matches!(
            effective_channel(&ch1, &CVec::zeros(2)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn mse_matrix_limits() {
        let h = random_mat(2, 3, 4);
        let e = mse_matrix(&h, &CMat::zeros(3, 2), &CMat::zeros(2, 2), 0.7);
        assert!((e - CMat::identity(2, 2)).norm() < 1e-15);

        // W_dᴴ H W_s = I with a vanishing noise term.
        let h = CMat::identity(2, 2);
        let e = mse_matrix(&h, &CMat::identity(2, 2), &CMat::identity(2, 2), 1e-14);
        assert!(e.norm() < 1e-13);
    }

    #[test]
    fn mse_with_mmse_combiner_matches_closed_form() {
        for seed in 0..20 {
            let h = random_mat(4, 3, seed);
            let ws = random_mat(3, 2, seed + 100);
            let s2 = 0.3;
            let wd = mmse_combiner(&h, &ws, s2);
            let e = mse_matrix(&h, &ws, &wd, s2);
            let hw = &h * &ws;
            let cov = CMat::identity(4, 4).scale(s2) + &hw * hw.adjoint();
            let closed = CMat::identity(2, 2)
                - hw.adjoint() * cov.try_inverse().unwrap() * &hw;
            assert!((e - closed).norm() < 1e-10);
        }
    }

    #[test]
    fn siso_rate_reduces_to_shannon() {
        let h = scalar(c(0.8, -0.6));
        let ws = scalar(c(0.0, 1.5));
        let s2 = 0.25;
        let expect = (1.0f64 + 2.25 * 1.0 / s2).log2();
        for wd in [c(1.0, 0.0), c(-0.2, 3.0)] {
            let r = achievable_rate(&h, &ws, &scalar(wd), s2).unwrap();
            assert!((r - expect).abs() < 1e-12);
        }
        let zero = achievable_rate(&h, &CMat::zeros(1, 1), &scalar(c(1.0, 0.0)), s2).unwrap();
        assert_eq!(zero, 0.0);
        assert!(matches!(
            achievable_rate(&h, &ws, &CMat::zeros(1, 1), s2),
            Err(Error::SingularCombinerGram)
        ));
    }

    #[test]
    fn rate_matches_log_det_inverse_mse() {
        for seed in 0..50 {
            let h = random_mat(3, 4, seed);
            let ws = random_mat(4, 2, seed + 7);
            let s2 = 0.5;
            let wd = mmse_combiner(&h, &ws, s2);
            let r = achievable_rate(&h, &ws, &wd, s2).unwrap();
            let e = mse_matrix(&h, &ws, &wd, s2);
            assert!((r - rate_from_mse(&e).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn scalar_mmse_combiner() {
        let h = c(0.5, 1.0);
        let ws = c(2.0, -1.0);
        let s2 = 0.4;
        let hw = h * ws;
        let expect = hw / (s2 + hw.norm_sqr());
        let wd = mmse_combiner(&scalar(h), &scalar(ws), s2);
        assert!((wd[(0, 0)] - expect).norm() < 1e-14);
    }

    #[test]
    fn mmse_combiner_norm_bound() {
        for seed in 0..20 {
            let h = random_mat(4, 4, seed);
            let ws = random_mat(4, 3, seed + 50);
            let s2 = 0.2;
            let wd = mmse_combiner(&h, &ws, s2);
            assert!(wd.norm() <= (&h * &ws).norm() / s2 + 1e-12);
        }
    }

    #[test]
    fn mmse_combiner_is_stationary_for_weighted_mse() {
        // Finite-difference gradient of tr(W·E) over real and imaginary parts of W_d.
        let h = random_mat(3, 3, 21);
        let ws = random_mat(3, 2, 22);
        let w = {
            let a = random_mat(2, 2, 23);
            &a * a.adjoint() + CMat::identity(2, 2)
        };
        let s2 = 0.3;
        let wd = mmse_combiner(&h, &ws, s2);
        let f = |d: &CMat| trace_re(&(&w * mse_matrix(&h, &ws, d, s2)));
        let step = 1e-6;
        let mut grad_sq = 0.0;
        for i in 0..wd.nrows() {
            for j in 0..wd.ncols() {
                for dir in [c(1.0, 0.0), c(0.0, 1.0)] {
                    let mut p = wd.clone();
                    let mut m = wd.clone();
                    p[(i, j)] += dir * step;
                    m[(i, j)] -= dir * step;
                    let g = (f(&p) - f(&m)) / (2.0 * step);
                    grad_sq += g * g;
                }
            }
        }
        assert!(grad_sq.sqrt() < 1e-5, "gradient norm {}", grad_sq.sqrt());
    }

    #[test]
    fn weight_update_inverts() {
        let w = weight_update(&CMat::identity(3, 3)).unwrap();
        assert!((w - CMat::identity(3, 3)).norm() < 1e-15);
        let e = CMat::from_diagonal(&CVec::from_vec(vec![c(0.5, 0.0), c(2.0, 0.0)]));
        let w = weight_update(&e).unwrap();
        assert!((w[(0, 0)].re - 2.0).abs() < 1e-14 && (w[(1, 1)].re - 0.5).abs() < 1e-14);
        for seed in 0..10 {
            let a = random_mat(4, 4, seed);
            let e = &a * a.adjoint() + CMat::identity(4, 4).scale(0.1);
            let w = weight_update(&e).unwrap();
            assert!((&w * &e - CMat::identity(4, 4)).norm() < 1e-10);
        }
        let singular = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        assert!(matches!(weight_update(&singular), Err(Error::SingularMse { .. })));
    }

    #[test]
    fn bisection_analytic_roots() {
        let mu = bisection_mu(&[1.0], &[4.0], 1.0).unwrap();
        assert!((mu - 1.0).abs() < 1e-12);
        let mu = bisection_mu(&[0.0], &[1.0], 4.0).unwrap();
        assert!((mu - 0.5).abs() < 1e-12);
        assert!(matches!(
            bisection_mu(&[1.0, 2.0], &[0.0, 0.0], 1.0),
            Err(Error::ZeroObjectiveCoupling)
        ));
    }

    #[test]
    fn bisection_residual_on_random_instance() {
        let lam = [0.3, 1.7, 0.02, 4.0];
        let phi = [2.0, 0.5, 3.1, 0.9];
        let p = 0.8;
        let mu = bisection_mu(&lam, &phi, p).unwrap();
        assert!(mu > 0.0 && mu <= (phi.iter().sum::<f64>() / p).sqrt());
        assert!(((power_at(&lam, &phi, mu) - p) / p).abs() < 1e-8);
    }

    #[test]
    fn precoder_branches() {
        // Loose budget: unconstrained solution, which solves Gram·W_s = rhs.
        let h = random_mat(3, 3, 31);
        let wd = random_mat(3, 3, 32);
        let w = CMat::identity(3, 3);
        let upd = precoder_update(&h, &wd, &w, 1e9).unwrap();
        assert_eq!(upd.mu, 0.0);
        let b = h.adjoint() * &wd;
        let gram = &b * &w * b.adjoint();
        assert!((&gram * &upd.precoder - &b * &w).norm() < 1e-8 * (&b * &w).norm());

        // Tight budget: active constraint.
        let upd = precoder_update(&h, &wd, &w, 1e-3).unwrap();
        assert!(upd.mu > 0.0);
        let p = trace_re(&(&upd.precoder * upd.precoder.adjoint()));
        assert!((p - 1e-3).abs() <= 1e-8 * 1e-3 + 1e-15);
    }

    #[test]
    fn scalar_precoder_matches_algebra() {
        let h = c(0.7, -0.2);
        let wd = c(0.3, 0.9);
        let w = 2.5;
        let power = 0.05;
        let upd = precoder_update(&scalar(h), &scalar(wd), &scalar(c(w, 0.0)), power).unwrap();
        // |w_s|² = |h* w_d w|² / (|h w_d|² w + μ)² = P.
        let num = (h.conj() * wd * w).norm();
        let mu = num / power.sqrt() - (h * wd).norm_sqr() * w;
        assert!(mu > 0.0);
        let expect = h.conj() * wd * w / ((h * wd).norm_sqr() * w + mu);
        assert!((upd.mu - mu).abs() < 1e-9 * mu);
        assert!((upd.precoder[(0, 0)] - expect).norm() < 1e-9);
    }

    #[test]
    fn svd_init_uses_full_power() {
        let h = random_mat(4, 4, 41);
        let ws = svd_init_precoder(&h, 2, 3.0);
        assert!((trace_re(&(&ws * ws.adjoint())) - 3.0).abs() < 1e-12);
    }
}
