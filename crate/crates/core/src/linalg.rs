//! Dense complex linear algebra helpers shared by every solver.
//!
//! Everything here works on Hermitian matrices. Inputs are symmetrized before
//! any eigendecomposition so round-off in the anti-Hermitian part never leaks
//! into the spectrum.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

/// Eigendecomposition of a Hermitian matrix, eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: RVec,
    pub vectors: CMat,
}

impl HermitianEigen {
    pub fn new(m: &CMat) -> Self {
        assert!(m.is_square(), "eigendecomposition of a non-square matrix");
        let sym = hermitian_part(m);
        let eig = SymmetricEigen::new(sym);
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = RVec::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut vectors = CMat::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Self { values, vectors }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `V f(Λ) Vᴴ` for a real spectral function `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            scaled.column_mut(j).scale_mut(s);
        }
        hermitian_part(&(scaled * self.vectors.adjoint()))
    }
}

/// `(M + Mᴴ)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Hermitian PSD square root, negative eigenvalues clamped to zero.
pub fn psd_sqrt(m: &CMat) -> CMat {
    HermitianEigen::new(m).map(|v| v.max(0.0).sqrt())
}

/// Moore-Penrose pseudo-inverse of a Hermitian PSD matrix. Eigenvalues below
/// `rel_tol * λ_max` are treated as zero.
pub fn psd_pinv(m: &CMat, rel_tol: f64) -> CMat {
    let eig = HermitianEigen::new(m);
    let cutoff = rel_tol * eig.max().max(0.0);
    eig.map(|v| if v > cutoff && v > 0.0 { 1.0 / v } else { 0.0 })
}

/// Solves `A X = B` for Hermitian positive definite `A`. Returns `None` when
/// the Cholesky factorization breaks down.
pub fn hpd_solve(a: &CMat, b: &CMat) -> Option<CMat> {
    let chol = hermitian_part(a).cholesky()?;
    Some(chol.solve(b))
}

/// `ln det A` for Hermitian positive definite `A`.
pub fn ln_det_hpd(a: &CMat) -> Option<f64> {
    let chol = hermitian_part(a).cholesky()?;
    let l = chol.l_dirty();
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        let d = l[(i, i)].re;
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        acc += d.ln();
    }
    Some(2.0 * acc)
}

/// Real part of the trace.
pub fn trace_re(m: &CMat) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

pub fn frobenius_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Largest eigenvalue of a real symmetric matrix.
pub fn sym_max_eigenvalue(m: &RMat) -> f64 {
    let sym = (m + m.transpose()).scale(0.5);
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Elementwise `exp(j·arg z)`; entries with zero modulus map to `fallback`.
pub fn project_unit_modulus(z: &CVec, fallback: &CVec) -> CVec {
    CVec::from_iterator(
        z.len(),
        z.iter().zip(fallback.iter()).map(|(v, f)| {
            let r = v.norm();
            if r > 0.0 && r.is_finite() {
                v / r
            } else {
                *f
            }
        }),
    )
}

pub fn max_modulus_error(theta: &CVec) -> f64 {
    theta
        .iter()
        .map(|z| (z.norm() - 1.0).abs())
        .fold(0.0, f64::max)
}
