mod common;

use proptest::prelude::*;
use sparselb::caprac::{caprac_coupling, delta_levelset_conjugate, l0_conjugate};
use sparselb::extreal::{lower_add, upper_add};
use sparselb::gso::{convolution_norm, dual_sup_norm, norm_from_point_family};
use sparselb::sparse_norms::{gauge_norm, ksupport_norm, l0, lmo_ksupport_ball, top_k_indices};
use sparselb::{ExtReal, GroupStructure, PointFamily};

use common::{dot, levelset_sup_by_supports, norm2};

fn ext() -> impl Strategy<Value = ExtReal> {
    prop_oneof![
        1 => Just(ExtReal::NegInf),
        1 => Just(ExtReal::PosInf),
        8 => (-1e3f64..1e3).prop_map(ExtReal::new),
    ]
}

fn vec_and_k(max_d: usize) -> impl Strategy<Value = (Vec<f64>, usize)> {
    (1..=max_d).prop_flat_map(|d| (prop::collection::vec(-10.0f64..10.0, d), 1..=d))
}

fn pair_and_k(max_d: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, usize)> {
    (1..=max_d).prop_flat_map(|d| {
        (prop::collection::vec(-10.0f64..10.0, d), prop::collection::vec(-10.0f64..10.0, d), 1..=d)
    })
}

proptest! {
    #[test]
    fn extreal_additions_agree_off_the_conflict(u in ext(), v in ext()) {
        prop_assert!(lower_add(u, v) <= upper_add(u, v));
        prop_assert_eq!(lower_add(u, v), lower_add(v, u));
        prop_assert_eq!(upper_add(u, v), upper_add(v, u));
        let conflict = (u.is_pos_inf() && v.is_neg_inf()) || (u.is_neg_inf() && v.is_pos_inf());
        prop_assert_eq!(lower_add(u, v) == upper_add(u, v), !conflict);
        prop_assert_eq!(-lower_add(u, v), upper_add(-u, -v));
    }

    #[test]
    fn extreal_round_trips_through_f64(x in prop::num::f64::ANY.prop_filter("not nan", |x| !x.is_nan())) {
        prop_assert_eq!(ExtReal::new(x).to_f64(), x);
    }

    #[test]
    fn ksupport_norm_is_a_norm((x, y, k) in pair_and_k(8), a in -5.0f64..5.0) {
        let nx = ksupport_norm(&x, k).unwrap();
        let ny = ksupport_norm(&y, k).unwrap();
        let sum: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p + q).collect();
        let scaled: Vec<f64> = x.iter().map(|p| a * p).collect();
        prop_assert!(ksupport_norm(&sum, k).unwrap() <= nx + ny + 1e-9 * (1.0 + nx + ny));
        prop_assert!((ksupport_norm(&scaled, k).unwrap() - a.abs() * nx).abs() <= 1e-9 * (1.0 + nx));
        prop_assert!(nx >= norm2(&x) - 1e-12 * (1.0 + nx));
    }

    #[test]
    fn gauge_and_ksupport_are_dual((x, y, k) in pair_and_k(8)) {
        let g = gauge_norm(&y, k).unwrap();
        let ks = ksupport_norm(&x, k).unwrap();
        prop_assert!(dot(&x, &y) <= ks * g + 1e-9 * (1.0 + ks * g));
        prop_assert!((g - levelset_sup_by_supports(&y, k)).abs() <= 1e-12 * (1.0 + g));
    }

    #[test]
    fn norms_are_monotone_in_k((x, k) in vec_and_k(8)) {
        if k < x.len() {
            prop_assert!(gauge_norm(&x, k).unwrap() <= gauge_norm(&x, k + 1).unwrap());
            prop_assert!(ksupport_norm(&x, k + 1).unwrap() <= ksupport_norm(&x, k).unwrap() + 1e-12);
        }
    }

    #[test]
    fn oracle_point_lies_on_the_ball((y, k) in vec_and_k(8)) {
        prop_assume!(y.iter().any(|v| *v != 0.0));
        let s = lmo_ksupport_ball(&y, k).unwrap();
        prop_assert!(l0(&s) <= k);
        prop_assert!((norm2(&s) - 1.0).abs() <= 1e-12);
        prop_assert!((dot(&s, &y) - gauge_norm(&y, k).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn top_k_selects_largest_magnitudes((x, k) in vec_and_k(8)) {
        let top = top_k_indices(&x, k);
        prop_assert_eq!(top.len(), k);
        let cutoff = top.iter().map(|&i| x[i].abs()).fold(f64::INFINITY, f64::min);
        for i in (0..x.len()).filter(|i| !top.contains(i)) {
            prop_assert!(x[i].abs() <= cutoff);
        }
    }

    #[test]
    fn caprac_coupling_ignores_scale((x, y, _k) in pair_and_k(6), a in 1e-3f64..1e3) {
        let scaled: Vec<f64> = x.iter().map(|p| a * p).collect();
        let c = caprac_coupling(&x, &y);
        prop_assert!((caprac_coupling(&scaled, &y) - c).abs() <= 1e-12 * (1.0 + c.abs()));
    }

    #[test]
    fn l0_conjugate_is_the_best_level((y, _k) in vec_and_k(7)) {
        let want = (0..=y.len())
            .map(|j| levelset_sup_by_supports(&y, j) - j as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        let got = l0_conjugate(&y);
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()));
        for j in 0..=y.len() {
            prop_assert!(got >= delta_levelset_conjugate(&y, j).unwrap() - j as f64 - 1e-12 * (1.0 + got.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn convolution_norm_reduces_to_l1_and_l2(v in prop::collection::vec(-5.0f64..5.0, 1..=5)) {
        let d = v.len();
        let l1: f64 = v.iter().map(|x| x.abs()).sum();
        let singles = convolution_norm(&GroupStructure::singletons(d).unwrap(), &v, 1e-9).unwrap();
        let full = convolution_norm(&GroupStructure::full(d).unwrap(), &v, 1e-9).unwrap();
        prop_assert!((singles - l1).abs() <= 1e-6);
        prop_assert!((full - norm2(&v)).abs() <= 1e-6);
    }

    #[test]
    fn convolution_norm_dominates_duality(v in prop::collection::vec(-5.0f64..5.0, 4), y in prop::collection::vec(-5.0f64..5.0, 4)) {
        let gs = GroupStructure::up_to(4, 2).unwrap();
        let n = convolution_norm(&gs, &v, 1e-9).unwrap();
        let s = dual_sup_norm(&gs, &y).unwrap();
        prop_assert!(dot(&v, &y) <= n * s + 1e-6 * (1.0 + n * s));
    }

    #[test]
    fn point_family_gauge_is_homogeneous(v in prop::collection::vec(-5.0f64..5.0, 2), a in -4.0f64..4.0) {
        let h = 0.75f64.sqrt();
        let hexagon = PointFamily::new(2, vec![vec![
            vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.5, h], vec![-0.5, -h], vec![-0.5, h], vec![0.5, -h],
        ]])
        .unwrap();
        let n = norm_from_point_family(&hexagon, &v).unwrap();
        let scaled: Vec<f64> = v.iter().map(|x| a * x).collect();
        prop_assert!((norm_from_point_family(&hexagon, &scaled).unwrap() - a.abs() * n).abs() <= 1e-8 * (1.0 + n));
        prop_assert!(n >= norm2(&v) - 1e-9);
    }
}
