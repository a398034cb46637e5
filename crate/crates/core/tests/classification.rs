mod common;

use common::{ground_state, system};
use qnls_core::evolution::{evolve, EvolveConfig};
use qnls_core::virial::*;
use qnls_core::{Complex64, Error, RadialField};

#[test]
fn ground_state_itself_is_on_the_boundary() {
    let (nl, params) = system("kappa", 0.5, 5);
    let gs = ground_state(&nl, &params, 4096, 30.0);
    let th = Thresholds::from_ground_state(&gs.profile, &params, &nl).unwrap();
    assert!(th.q_star > 0.0 && th.k_star > 0.0 && th.e_star > 0.0);
    // K(ψ) = 5𝓔(ψ) at n = 5.
    assert!((th.k_star / (5.0 * th.e_star) - 1.0).abs() < 1e-3);
    let c = classify(&gs.profile, &params, &nl, &th).unwrap();
    assert_eq!(c.verdict, Verdict::Indeterminate);
    assert_eq!(c.witnesses.len(), 3);
    assert!(c.witnesses.iter().all(|w| w.name.contains("Q(u0)")));
    let half = classify(&gs.profile.scaled(0.5), &params, &nl, &th).unwrap();
    assert_eq!(half.verdict, Verdict::GlobalCriteria);
}

#[test]
fn dimension_four_uses_the_charge() {
    let (nl, params) = system("shg3", 0.0, 4);
    let gs = ground_state(&nl, &params, 4096, 40.0);
    let th = Thresholds::from_ground_state(&gs.profile, &params, &nl).unwrap();
    assert_eq!(classify(&gs.profile.scaled(0.9), &params, &nl, &th).unwrap().verdict, Verdict::GlobalCriteria);
    assert_eq!(classify(&gs.profile.scaled(1.1), &params, &nl, &th).unwrap().verdict, Verdict::Indeterminate);
}

#[test]
fn unsupported_dimensions_are_rejected() {
    let (nl, params) = system("kappa", 0.5, 3);
    let gs = ground_state(&nl, &params, 1024, 30.0);
    // 𝓔(ψ) < 0 below dimension four, so the thresholds are rejected too.
    assert!(Thresholds::from_ground_state(&gs.profile, &params, &nl).is_err());
    let th = Thresholds { n: 3, q_star: 1.0, k_star: 1.0, e_star: 1.0, qe_star: 1.0, qk_star: 1.0 };
    assert!(matches!(classify(&gs.profile, &params, &nl, &th), Err(Error::DimensionOutOfRange(3))));
}

#[test]
fn six_dimensional_scaling_arithmetic() {
    let (nl, params) = system("kappa", 0.5, 6);
    let gs = ground_state(&nl, &params, 2048, 30.0);
    let th = Thresholds::from_ground_state(&gs.profile, &params, &nl).unwrap();
    for (lambda, expected) in [(1.1, Verdict::BlowupCriteria), (0.9, Verdict::Indeterminate), (2.0, Verdict::BlowupCriteria)] {
        let c = classify(&gs.profile.scaled(lambda), &params, &nl, &th).unwrap();
        assert_eq!(c.verdict, expected, "{lambda}");
        // E(λψ) = λ²K − 2λ³P with K = 3P at the ground state.
        let e_pred = lambda * lambda * th.k_star * (1.0 - 2.0 * lambda / 3.0);
        assert!((c.witnesses[0].lhs - e_pred).abs() < 1e-4 * th.k_star);
    }
}

#[test]
fn pohozaev_monitor_on_standing_wave_and_small_data() {
    let (nl, params) = system("kappa", 0.5, 3);
    let gs = ground_state(&nl, &params, 4096, 40.0);
    let cfg = EvolveConfig { dt: 1e-3, t_final: 0.5, record_every: 50, ..Default::default() };
    let ts = evolve(&gs.profile, &params, &nl, &cfg).unwrap();
    let m = monitor_t(&ts.records);
    let k = ts.records[0].k;
    assert!(m.min.abs() <= 1e-4 * k && m.max.abs() <= 1e-4 * k, "{m:?}");

    let small = RadialField::from_fn(gs.profile.grid(), 2, |_, r| Complex64::new(0.05 * (-r * r).exp(), 0.0));
    let ts = evolve(&small, &params, &nl, &cfg).unwrap();
    let m = monitor_t(&ts.records);
    assert!(!m.negative && m.delta0 == 0.0);
}
