mod common;

use std::f64::consts::PI;

use common::*;
use num_complex::Complex64;
use ris_core::linalg::{CMat, CVec};
use ris_core::reflector::{eval_reflector_objective, ReflectorQuadratic};
use ris_core::scf::{scf_solve, ScfOptions};
use ris_core::sdr::{build_rr, gaussian_randomize, sdr_solve, solve_unit_diag_sdp, SdrOptions};

/// `h(θ)` from a Gram matrix and cross term formed here, not in the library.
struct Oracle {
    gram: CMat,
    cross: CVec,
    r: f64,
}

impl Oracle {
    fn new(q: &ReflectorQuadratic) -> Self {
        Self { gram: q.a_mat.adjoint() * &q.a_mat, cross: q.a_mat.adjoint() * &q.a_r, r: q.a_r.norm_squared() }
    }

    fn h(&self, t: &CVec) -> f64 {
        t.dotc(&(&self.gram * t)).re - 2.0 * t.dotc(&self.cross).re + self.r
    }

    /// Exact minimization over one phase with the others held.
    fn coordinate_descent(&self, t: &mut CVec, sweeps: usize) {
        for _ in 0..sweeps {
            for n in 0..t.len() {
                let mut v = -self.cross[n];
                for m in 0..t.len() {
                    if m != n {
                        v += self.gram[(n, m)] * t[m];
                    }
                }
                if v.norm() > 0.0 {
                    t[n] = -v / v.norm();
                }
            }
        }
    }

    fn grid_then_refine(&self, n: usize, points: usize) -> f64 {
        let phasors: Vec<Complex64> = (0..points).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / points as f64)).collect();
        let mut idx = vec![0usize; n];
        let mut best = (f64::INFINITY, CVec::zeros(n));
        let mut t = CVec::zeros(n);
        'outer: loop {
            for (d, &k) in idx.iter().enumerate() {
                t[d] = phasors[k];
            }
            let h = self.h(&t);
            if h < best.0 {
                best = (h, t.clone());
            }
            for d in 0..n {
                idx[d] += 1;
                if idx[d] < points {
                    continue 'outer;
                }
                idx[d] = 0;
            }
            break;
        }
        let mut t = best.1;
        self.coordinate_descent(&mut t, 200);
        self.h(&t).min(best.0)
    }
}

#[test]
fn scf_descends_on_random_instances() {
    let mut r = rng(11);
    for case in 0..100 {
        let n = 1 + case % 16;
        let q = quadratic(&mut r, 2 * n + 3, n);
        let init = unit_phases(&mut r, n);
        let (theta, st) = scf_solve(&q, &init, &ScfOptions::default()).unwrap();
        for w in st.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "case {case}: {} -> {}", w[0], w[1]);
        }
        assert!(theta.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        assert_eq!(st.x[2 * n], 1.0);
    }
}

#[test]
fn scf_reaches_grid_optimum_for_four_elements() {
    let mut r = rng(21);
    let q = quadratic(&mut r, 10, 4);
    let oracle = Oracle::new(&q);
    let best = oracle.grid_then_refine(4, 64);
    let init = CVec::from_element(4, Complex64::new(1.0, 0.0));
    let (theta, _) = scf_solve(&q, &init, &ScfOptions::default()).unwrap();
    let h = oracle.h(&theta);
    assert!(h <= best + 1e-3, "scf {h} vs grid {best}");
}

#[test]
fn sdp_value_is_below_every_grid_point() {
    let mut r = rng(31);
    let q = quadratic(&mut r, 9, 4);
    let oracle = Oracle::new(&q);
    let sol = solve_unit_diag_sdp(&build_rr(&q), 1e-7, 20000).unwrap();
    // 16⁴ grid, no refinement: every point is feasible, so each bounds the SDP from above.
    let mut grid_min = f64::INFINITY;
    for code in 0..16usize.pow(4) {
        let t = CVec::from_fn(4, |d, _| Complex64::from_polar(1.0, 2.0 * PI * ((code >> (4 * d)) & 15) as f64 / 16.0));
        grid_min = grid_min.min(oracle.h(&t));
    }
    assert!(sol.objective <= grid_min + 1e-6, "{} vs {grid_min}", sol.objective);
    let d = sol.big_theta.diagonal();
    assert!(d.iter().all(|z| (z.re - 1.0).abs() < 1e-6));
}

#[test]
fn more_randomization_trials_never_hurt() {
    let mut r = rng(41);
    for _ in 0..100 {
        let n = 3;
        let q = quadratic(&mut r, 7, n);
        let sol = solve_unit_diag_sdp(&build_rr(&q), 1e-6, 20000).unwrap();
        let few = eval_reflector_objective(&q, &gaussian_randomize(&sol, &q, 10, 9));
        let many = eval_reflector_objective(&q, &gaussian_randomize(&sol, &q, 500, 9));
        assert!(many <= few + 1e-12);
        assert!(many >= sol.objective - 1e-8);
    }
}

#[test]
fn sdr_matches_manual_pipeline_and_scf() {
    let mut r = rng(51);
    let q = quadratic(&mut r, 8, 3);
    let opts = SdrOptions { seed: 4, ..SdrOptions::default() };
    let (theta, out) = sdr_solve(&q, &opts).unwrap();
    let sol = solve_unit_diag_sdp(&build_rr(&q), opts.tol, opts.max_iter).unwrap();
    let manual = gaussian_randomize(&sol, &q, opts.trials, opts.seed);
    assert_eq!(theta, manual);
    assert!(out.objective >= out.solution.objective - 1e-8);

    let (t_scf, _) = scf_solve(&q, &CVec::from_element(3, Complex64::new(1.0, 0.0)), &ScfOptions::default()).unwrap();
    let h_scf = eval_reflector_objective(&q, &t_scf);
    assert!((out.objective - h_scf).abs() <= 0.05 * h_scf.abs().max(1e-12), "sdr {} scf {h_scf}", out.objective);
}
