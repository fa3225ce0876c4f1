mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use ris_core::linalg::CVec;
use ris_core::reflector::{
    build_reflector_quadratic, eval_reflector_objective, lift_to_real, stack_real, unit_constraint_indicator,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quadratic_reproduces_weighted_mse(
        seed in any::<u64>(),
        n in 1usize..10,
        nt in 1usize..5,
        nr in 1usize..5,
        sigma2 in 0.01f64..5.0,
    ) {
        let mut r = rng(seed);
        let ns = nt.min(nr);
        let ch = channels(&mut r, n, nt, nr);
        let s = state(&mut r, n, nt, nr, ns);
        let q = build_reflector_quadratic(&ch, &s, sigma2).unwrap();
        prop_assert_eq!(q.a_mat.shape(), (ns * n, n));
        for _ in 0..20 {
            let theta = unit_phases(&mut r, n);
            let direct = weighted_mse_direct(&ch, &s, &theta, sigma2);
            let via_q = eval_reflector_objective(&q, &theta) + q.c_const;
            prop_assert!((direct - via_q).abs() <= 1e-8 * (1.0 + direct), "{} vs {}", direct, via_q);
        }
    }

    #[test]
    fn real_lift_matches_complex_objective(seed in any::<u64>(), n in 1usize..10, rows in 1usize..20, lambda in 0.0f64..3.0) {
        let mut r = rng(seed);
        let q = quadratic(&mut r, rows, n);
        let lift = lift_to_real(&q, lambda).unwrap();
        for _ in 0..20 {
            // Any θ, not only unit modulus.
            let theta = cvec(&mut r, n);
            let x = stack_real(&theta);
            let quad = x.dot(&(&lift.big_r * &x));
            let h = eval_reflector_objective(&q, &theta);
            prop_assert!((quad - h).abs() <= 1e-8 * (1.0 + h));
        }
        let shifted = lift.r_bar();
        let min_eig = nalgebra::SymmetricEigen::new(shifted).eigenvalues.min();
        if lambda > 0.0 {
            prop_assert!(min_eig > 0.0);
        }
    }

    #[test]
    fn indicators_partition_the_diagonal(seed in any::<u64>(), n in 1usize..8) {
        let mut r = rng(seed);
        let x = stack_real(&cvec(&mut r, n));
        let total: f64 = (1..=n + 1).map(|k| x.dot(&(unit_constraint_indicator(k, n).unwrap() * &x))).sum();
        prop_assert!((total - x.norm_squared()).abs() < 1e-12 * (1.0 + total));
    }
}

#[test]
fn single_element_column_is_kronecker_of_combined_channels() {
    let mut r = rng(3);
    let (nt, nr, ns) = (3, 2, 2);
    let ch = channels(&mut r, 1, nt, nr);
    let s = state(&mut r, 1, nt, nr, ns);
    let q = build_reflector_quadratic(&ch, &s, 0.5).unwrap();
    // The reflector term is W^{1/2} W_dᴴ g θ hᵀ W_s, vectorized column-wise.
    let w_half = ris_core::linalg::psd_sqrt(&s.weight);
    let g_vec = &w_half * s.combiner.adjoint() * ch.g_ue_ris.row(0).adjoint();
    let h_row = ch.h_bs_ris.row(0) * &s.precoder;
    let outer = &g_vec * h_row;
    let expected = CVec::from_iterator(ns * ns, outer.iter().copied());
    assert_eq!(q.a_mat.shape(), (ns, 1));
    let col = q.a_mat.column(0).into_owned();
    // A_r is only fixed up to the isometry carried by R_y^{1/2}; compare norms
    // and the objective it induces instead of raw entries.
    assert!((col.norm() - expected.norm()).abs() < 1e-10 * (1.0 + expected.norm()), "{} vs {}", col.norm(), expected.norm());
    let theta = CVec::from_element(1, Complex64::from_polar(1.0, 0.7));
    let direct = weighted_mse_direct(&ch, &s, &theta, 0.5);
    assert!((eval_reflector_objective(&q, &theta) + q.c_const - direct).abs() < 1e-9 * (1.0 + direct));
}
