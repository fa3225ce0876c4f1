#![allow(dead_code)]

use num_complex::Complex64;
use ris_core::channel::ChannelSet;
use ris_core::linalg::{CMat, CVec};
use ris_core::random::{complex_normal, seeded_rng, SimRng};
use ris_core::reflector::ReflectorQuadratic;
use ris_core::wmmse::TransceiverState;

pub fn rng(seed: u64) -> SimRng {
    seeded_rng(seed, 77)
}

pub fn cmat(rng: &mut SimRng, r: usize, c: usize) -> CMat {
    CMat::from_fn(r, c, |_, _| complex_normal(rng))
}

pub fn cvec(rng: &mut SimRng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| complex_normal(rng))
}

/// Random Hermitian positive definite matrix with eigenvalues at least `floor`.
pub fn hpd(rng: &mut SimRng, n: usize, floor: f64) -> CMat {
    let a = cmat(rng, n, n);
    &a * a.adjoint() + CMat::identity(n, n).scale(floor)
}

pub fn unit_phases(rng: &mut SimRng, n: usize) -> CVec {
    cvec(rng, n).map(|z| if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) })
}

pub fn channels(rng: &mut SimRng, n: usize, nt: usize, nr: usize) -> ChannelSet {
    ChannelSet::new(cmat(rng, n, nt), cmat(rng, n, nr), cmat(rng, nr, nt)).unwrap()
}

pub fn state(rng: &mut SimRng, n: usize, nt: usize, nr: usize, ns: usize) -> TransceiverState {
    TransceiverState {
        precoder: cmat(rng, nt, ns),
        combiner: cmat(rng, nr, ns),
        weight: hpd(rng, ns, 0.1),
        theta: unit_phases(rng, n),
    }
}

pub fn quadratic(rng: &mut SimRng, rows: usize, n: usize) -> ReflectorQuadratic {
    ReflectorQuadratic::new(cvec(rng, rows), cmat(rng, rows, n), 0.0).unwrap()
}

/// `Gᴴ diag(θ) H + H_d`, entry by entry.
pub fn effective_channel_loops(ch: &ChannelSet, theta: &CVec) -> CMat {
    let (nr, nt) = ch.h_direct.shape();
    CMat::from_fn(nr, nt, |r, t| {
        let mut acc = ch.h_direct[(r, t)];
        for n in 0..theta.len() {
            acc += ch.g_ue_ris[(n, r)].conj() * theta[n] * ch.h_bs_ris[(n, t)];
        }
        acc
    })
}

/// `tr(W·E)` with `E` expanded from its definition.
pub fn weighted_mse_direct(ch: &ChannelSet, s: &TransceiverState, theta: &CVec, sigma2: f64) -> f64 {
    let h = effective_channel_loops(ch, theta);
    let ns = s.precoder.ncols();
    let residual = CMat::identity(ns, ns) - s.combiner.adjoint() * &h * &s.precoder;
    let e = &residual * residual.adjoint() + (s.combiner.adjoint() * &s.combiner).scale(sigma2);
    (&s.weight * e).trace().re
}
