//! Brute-force references: water-filling capacity of a fixed channel and an
//! exhaustive phase-grid search for tiny surfaces.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, HermitianEigen};
use crate::wmmse::SystemConfig;

/// Water-filling over the `n_streams` strongest eigenmodes of `H_eqᴴH_eq`,
/// in bits/s/Hz.
pub fn waterfilling_capacity(h_eq: &CMat, n_streams: usize, power: f64, noise_power: f64) -> f64 {
    let gram = h_eq.adjoint() * h_eq;
    let eig = HermitianEigen::new(&gram);
    let mut gains: Vec<f64> = eig.values.iter().rev().take(n_streams).map(|&g| g / noise_power).filter(|&g| g > 0.0).collect();
    gains.sort_by(|a, b| b.total_cmp(a));
    // Shrink the active set until the water level clears every active mode.
    let mut k = gains.len();
    while k > 0 {
        let inv_sum: f64 = gains[..k].iter().map(|g| 1.0 / g).sum();
        let level = (power + inv_sum) / k as f64;
        if level > 1.0 / gains[k - 1] {
            return gains[..k].iter().map(|g| (level * g).log2()).sum();
        }
        k -= 1;
    }
    0.0
}

#[derive(Debug, Clone)]
pub struct GridSearchResult {
    pub rate: f64,
    pub theta: CVec,
    pub evaluated: usize,
}

/// Exhaustively scans `points^N` phase vectors (`N ≤ 3`) and keeps the one
/// whose effective channel has the largest water-filling capacity.
pub fn phase_grid_search(ch: &ChannelSet, sys: &SystemConfig, points: usize) -> Result<GridSearchResult> {
    let n = ch.n_elements();
    if n == 0 || n > 3 {
        return Err(Error::Config(format!("grid search supports 1 to 3 elements, got {n}")));
    }
    if points < 2 {
        return Err(Error::Config("grid search needs at least 2 points per phase".into()));
    }
    // H_eq(θ) = H_d + Σ θ_n g_n^* h_nᵀ
    let terms: Vec<CMat> = (0..n)
        .map(|i| ch.g_ue_ris.row(i).adjoint() * ch.h_bs_ris.row(i))
        .collect();
    let phasors: Vec<Complex64> = (0..points)
        .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / points as f64))
        .collect();
    let mut idx = vec![0usize; n];
    let mut best = GridSearchResult { rate: f64::NEG_INFINITY, theta: CVec::zeros(n), evaluated: 0 };
    let mut h = ch.h_direct.clone();
    loop {
        h.copy_from(&ch.h_direct);
        for (t, &m) in terms.iter().zip(&idx) {
            h += t * phasors[m];
        }
        let rate = waterfilling_capacity(&h, sys.n_streams, sys.power_budget, sys.noise_power);
        best.evaluated += 1;
        if rate > best.rate {
            best.rate = rate;
            best.theta = CVec::from_iterator(n, idx.iter().map(|&m| phasors[m]));
        }
        let mut d = 0;
        loop {
            if d == n {
                return Ok(best);
            }
            idx[d] += 1;
            if idx[d] < points {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}
