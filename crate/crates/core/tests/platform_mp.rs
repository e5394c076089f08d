mod common;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use repeater_core::chain::{ip_preset, mp_preset};
use repeater_core::platform_mp::*;
use repeater_core::qstate::fidelity;

#[test]
fn pdc_examples() {
    let a = pdc_probs(1.0);
    assert_abs_diff_eq!(a.p0, 0.25, epsilon = 1e-15);
    assert_abs_diff_eq!(a.p1, 0.25, epsilon = 1e-15);
    assert_abs_diff_eq!(a.p2, 0.5, epsilon = 1e-15);
    let v = pdc_probs(1e-9);
    assert_abs_diff_eq!(v.p0, 1.0, epsilon = 1e-8);
}

#[test]
fn kraus_limits() {
    let k = lossy_kraus(0.0);
    assert_eq!(k[0], nalgebra::Matrix3::identity());
    assert_eq!(k[1], nalgebra::Matrix3::zeros());
    let k = lossy_kraus(1.0);
    for n in 0..3 {
        // every Fock state ends in vacuum
        let out: f64 = k.iter().map(|a| a[(0, n)] * a[(0, n)]).sum();
        assert_abs_diff_eq!(out, 1.0, epsilon = 1e-15);
    }
}

#[test]
fn herald_probability_three_ways() {
    for ns in [0.002, 0.01, 0.03, 0.06, 0.1] {
        for eta in [0.05, 0.2, 0.5, 0.8, 1.0] {
            for p_app in [1.0, 0.9] {
                let lib = mp_epg_with(ns, eta * p_app, p_app, 0.0).unwrap();
                let closed = p_succ_closed(ns, eta * p_app, p_app);
                let (oracle, f_oracle) = common::mp_fock_oracle(ns, eta * p_app, p_app);
                assert!((lib.p_el - closed).abs() < 1e-10, "ns={ns} eta={eta}: {} vs {closed}", lib.p_el);
                assert!((lib.p_el - oracle).abs() < 1e-10);
                assert!((lib.fidelity - f_oracle).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn fidelity_matches_closed_form_without_local_loss() {
    for ns in [0.001, 0.02, 0.1] {
        for eta in [0.01, 0.3, 1.0] {
            let e = mp_epg_with(ns, eta, 1.0, 0.0).unwrap();
            assert_abs_diff_eq!(e.fidelity, fidelity_closed(ns, eta), epsilon = 1e-10);
            assert_abs_diff_eq!(fidelity(&e.state), e.fidelity, epsilon = 1e-12);
        }
    }
    assert_abs_diff_eq!(mp_epg_with(1e-7, 1.0, 1.0, 0.0).unwrap().fidelity, 1.0, epsilon = 1e-5);
}

#[test]
fn ns_for_fidelity_examples() {
    assert_abs_diff_eq!(ns_upper_bound(0.5), 0.104, epsilon = 1e-3);
    assert_abs_diff_eq!(ns_for_fidelity(0.5 + 1e-12, 0.0).unwrap(), ns_upper_bound(0.5), epsilon = 1e-6);
    assert!(ns_for_fidelity(1.0 - 1e-9, 0.3).unwrap() < 1e-4);
    for f in [0.6, 0.8, 0.95, 0.99] {
        for eta in [0.0, 0.1, 0.6] {
            let ns = ns_for_fidelity(f, eta).unwrap();
            assert_abs_diff_eq!(fidelity_closed(ns, eta), f, epsilon = 1e-10);
        }
    }
    assert!(ns_for_fidelity(0.4, 0.1).is_err());
    assert!(ns_for_fidelity(1.0, 0.1).is_err());
}

#[test]
fn required_modes_examples() {
    let f = 0.999;
    assert_abs_diff_eq!(required_modes(f, 1.0).unwrap() * (1.0 - f) * (1.0 - f), 32.0, epsilon = 32.0 * 0.05);
    let a = required_modes(0.9, 0.2).unwrap();
    let b = required_modes(0.9, 0.1).unwrap();
    assert_abs_diff_eq!(b / a, 4.0, epsilon = 1e-12);
    // Direct evaluation of F(S−1)⁶/(32η²(S−3)²) at F = 0.9, η = 0.1.
    let s = ((5.0 * 0.9 + 2.0 * (0.9f64 * 3.9).sqrt()) / 0.9).sqrt();
    assert_abs_diff_eq!(required_modes(0.9, 0.1).unwrap(), 0.9 * (s - 1.0).powi(6) / (32.0 * 0.01 * (s - 3.0).powi(2)), epsilon = 1e-9);
}

#[test]
fn multiplexing_and_boosting() {
    assert_abs_diff_eq!(multiplexed_success(0.3, 1), 0.3, epsilon = 1e-15);
    assert_abs_diff_eq!(multiplexed_success(0.001, 10_000), 1.0 - 0.999f64.powi(10_000), epsilon = 1e-12);
    assert_abs_diff_eq!(multiplexed_success(2.0 / 1e7, 10_000_000), 1.0 - (-2.0f64).exp(), epsilon = 1e-6);
    assert_eq!(boosted_bsm_prob(0), 0.5);
    assert_eq!(boosted_bsm_prob(1), 0.75);
    assert_eq!(boosted_bsm_prob(3), 15.0 / 16.0);
}

#[test]
fn combined_source_equals_mp_source() {
    let mp = mp_preset("mp-set-2").unwrap();
    let ip = ip_preset("ip-set-3").unwrap();
    let a = combined_epg(0.01, 40.0, &mp, &ip).unwrap();
    let b = mp_epg(0.01, 40.0, &mp).unwrap();
    assert_eq!(a.state, b.state);
    assert_eq!(a.p_el, b.p_el);
}

#[test]
fn ns_grid_covers_range() {
    let g = ns_grid(0.5, 1e-4);
    assert_abs_diff_eq!(g[0], 2e-4, epsilon = 1e-15);
    assert!(*g.last().unwrap() <= ns_upper_bound(0.5));
    assert!(ns_upper_bound(0.5) - g.last().unwrap() < 1e-4);
}

#[test]
fn fidelity_falls_and_probability_rises_with_ns() {
    let mp = mp_preset("mp-set-1").unwrap();
    let g = ns_grid(0.5, 1e-3);
    let outs: Vec<_> = g.iter().map(|&ns| mp_epg(ns, 30.0, &mp).unwrap()).collect();
    for w in outs.windows(2) {
        assert!(w[1].fidelity < w[0].fidelity);
        assert!(w[1].p_el > w[0].p_el);
    }
}

proptest! {
    #[test]
    fn kraus_completeness(g in 0.0f64..=1.0) {
        let k = lossy_kraus(g);
        let s = k.iter().fold(nalgebra::Matrix3::<f64>::zeros(), |acc, a| acc + a.transpose() * a);
        prop_assert!((s - nalgebra::Matrix3::identity()).abs().max() < 1e-14);
    }

    #[test]
    fn pdc_sums_to_one(ns in 1e-6f64..10.0) {
        let a = pdc_probs(ns);
        prop_assert!((a.p0 + a.p1 + a.p2 - 1.0).abs() < 1e-12);
    }
}
