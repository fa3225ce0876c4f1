use ris_core::channel::{draw_channels, ula_response, upa_response, ArrayGeometry, ChannelDrawConfig};
use ris_core::linalg::frobenius_sq;
use proptest::prelude::*;

proptest! {
    #[test]
    fn ula_is_unit_norm(phi in -10.0f64..10.0, m in 1usize..64, d in 0.05f64..2.0) {
        let a = ula_response(phi, m, d);
        prop_assert_eq!(a.len(), m);
        prop_assert!((a.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn upa_is_unit_norm_kronecker(az in -4.0f64..4.0, el in -2.0f64..2.0, nx in 1usize..9, ny in 1usize..9) {
        let a = upa_response(az, el, nx, ny, 0.5);
        prop_assert_eq!(a.len(), nx * ny);
        prop_assert!((a.norm() - 1.0).abs() < 1e-12);
        // Entry (i, j) of the Kronecker product, written out.
        let ax = ula_response(az, nx, 0.5);
        let ay = ula_response(el, ny, 0.5);
        for i in 0..nx {
            for j in 0..ny {
                prop_assert!((a[i * ny + j] - ax[i] * ay[j]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn draws_are_pure_functions_of_the_config(seed in any::<u64>(), nt in 1usize..5, nr in 1usize..5) {
        let cfg = ChannelDrawConfig::new(nt, nr, ArrayGeometry::upa(2, 3), seed);
        let a = draw_channels(&cfg).unwrap();
        let b = draw_channels(&cfg).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.h_bs_ris.shape(), (6, nt));
        prop_assert_eq!(a.g_ue_ris.shape(), (6, nr));
        prop_assert_eq!(a.h_direct.shape(), (nr, nt));
        prop_assert!(a.h_bs_ris.iter().chain(a.g_ue_ris.iter()).chain(a.h_direct.iter()).all(|z| z.is_finite()));
    }
}

#[test]
fn mean_channel_energy_matches_normalization() {
    let (nt, nr) = (3, 2);
    let geom = ArrayGeometry::upa(4, 2);
    let n = geom.len();
    let draws = 1000;
    let (mut h, mut g, mut d) = (0.0, 0.0, 0.0);
    for seed in 0..draws {
        let ch = draw_channels(&ChannelDrawConfig::new(nt, nr, geom, seed)).unwrap();
        h += frobenius_sq(&ch.h_bs_ris);
        g += frobenius_sq(&ch.g_ue_ris);
        d += frobenius_sq(&ch.h_direct);
    }
    let k = draws as f64;
    for (mean, expect) in [(h / k, (nt * n) as f64), (g / k, (nr * n) as f64), (d / k, (nt * nr) as f64)] {
        assert!((mean / expect - 1.0).abs() < 0.05, "mean {mean} vs {expect}");
    }
}

#[test]
fn different_seeds_give_different_channels() {
    let geom = ArrayGeometry::ula(4);
    let a = draw_channels(&ChannelDrawConfig::new(2, 2, geom, 1)).unwrap();
    let b = draw_channels(&ChannelDrawConfig::new(2, 2, geom, 2)).unwrap();
    assert_ne!(a.checksum(), b.checksum());
    assert_eq!(a.checksum(), draw_channels(&ChannelDrawConfig::new(2, 2, geom, 1)).unwrap().checksum());
}
