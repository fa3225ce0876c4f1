mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use ris_core::linalg::{ln_det_hpd, trace_re, CMat};
use ris_core::random::complex_normal;
use ris_core::wmmse::{
    achievable_rate, effective_channel, mmse_combiner, mse_matrix, precoder_update, rate_from_mse, weight_update,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn effective_channel_matches_loops(seed in any::<u64>(), n in 1usize..9, nt in 1usize..5, nr in 1usize..5) {
        let mut r = rng(seed);
        let ch = channels(&mut r, n, nt, nr);
        let theta = unit_phases(&mut r, n);
        let h = effective_channel(&ch, &theta).unwrap();
        prop_assert!((h - effective_channel_loops(&ch, &theta)).norm() < 1e-12);
    }

    #[test]
    fn rate_equals_log_det_inverse_mse(seed in any::<u64>(), nt in 1usize..6, nr in 1usize..6, sigma2 in 0.01f64..10.0) {
        let mut r = rng(seed);
        let ns = nt.min(nr);
        let h = cmat(&mut r, nr, nt);
        let ws = cmat(&mut r, nt, ns);
        let wd = mmse_combiner(&h, &ws, sigma2);
        let e = mse_matrix(&h, &ws, &wd, sigma2);
        let rate = achievable_rate(&h, &ws, &wd, sigma2).unwrap();
        // log₂ det(I + σ⁻² W_sᴴHᴴHW_s), the mutual information of the precoded link.
        let hw = &h * &ws;
        let m = CMat::identity(ns, ns) + (hw.adjoint() * &hw).unscale(sigma2);
        let mi = ln_det_hpd(&m).unwrap() / std::f64::consts::LN_2;
        prop_assert!((rate - mi).abs() < 1e-9 * (1.0 + mi));
        prop_assert!((rate_from_mse(&e).unwrap() - rate).abs() < 1e-9 * (1.0 + rate));
    }

    #[test]
    fn precoder_respects_power_and_stationarity(seed in any::<u64>(), nt in 1usize..6, nr in 1usize..6, power in 0.1f64..10.0) {
        let mut r = rng(seed);
        let ns = nt.min(nr);
        let h = cmat(&mut r, nr, nt);
        let wd = cmat(&mut r, nr, ns);
        let w = hpd(&mut r, ns, 0.1);
        let upd = precoder_update(&h, &wd, &w, power).unwrap();
        let p = trace_re(&(&upd.precoder * upd.precoder.adjoint()));
        prop_assert!(p <= power * (1.0 + 1e-8) + 1e-12);
        if upd.mu > 0.0 {
            prop_assert!((p - power).abs() < 1e-8 * power);
        }
        let b = h.adjoint() * &wd;
        let g = (&b * &w * b.adjoint() * &upd.precoder) - &b * &w + upd.precoder.scale(upd.mu);
        prop_assert!(g.norm() < 1e-8 * (1.0 + (&b * &w).norm()));
    }

    #[test]
    fn weight_is_hermitian_inverse(seed in any::<u64>(), n in 1usize..7) {
        let mut r = rng(seed);
        let e = hpd(&mut r, n, 0.05);
        let w = weight_update(&e).unwrap();
        prop_assert!((&w - w.adjoint()).norm() < 1e-10 * w.norm());
        prop_assert!((&w * &e - CMat::identity(n, n)).norm() < 1e-10 * (1.0 + w.norm()));
    }
}

#[test]
fn nmse_agrees_with_symbol_simulation() {
    let mut r = rng(5);
    let (nt, nr, ns, sigma2) = (4, 3, 2, 0.4);
    let h = cmat(&mut r, nr, nt);
    let ws = cmat(&mut r, nt, ns).unscale(2.0);
    let wd = mmse_combiner(&h, &ws, sigma2);
    let nmse = trace_re(&mse_matrix(&h, &ws, &wd, sigma2)) / ns as f64;

    let draws = 100_000;
    let mut err = 0.0;
    let sd = sigma2.sqrt();
    for _ in 0..draws {
        let s = ris_core::linalg::CVec::from_fn(ns, |_, _| complex_normal(&mut r));
        let noise = ris_core::linalg::CVec::from_fn(nr, |_, _| complex_normal(&mut r) * Complex64::new(sd, 0.0));
        let y = wd.adjoint() * (&h * &ws * &s + noise);
        err += (s - y).norm_squared();
    }
    let empirical = err / (draws * ns) as f64;
    assert!((empirical / nmse - 1.0).abs() < 0.02, "{empirical} vs {nmse}");
}
