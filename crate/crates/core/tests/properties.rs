mod common;

use std::sync::OnceLock;

use common::system;
use proptest::prelude::*;
use qnls_core::concentration::{concentration_q, median_radius};
use qnls_core::functionals::{kinetic, potential, Parts};
use qnls_core::ground_state::GroundStateResult;
use qnls_core::nonlinearity::*;
use qnls_core::virial::*;
use qnls_core::{Complex64, RadialField, RadialGrid};

fn field_from(grid: &RadialGrid, l: usize, coeffs: &[(f64, f64, f64, f64)]) -> RadialField {
    RadialField::from_fn(grid, l, |k, r| {
        let (a, b, w, p) = coeffs[k % coeffs.len()];
        Complex64::new(a, b) * (-r * r / w).exp() * Complex64::from_polar(1.0, p * r * r)
    })
}

fn coeffs(l: usize) -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64, 0.2..4.0f64, -1.0..1.0f64), l)
}

fn kappa6() -> &'static (AnyNonlinearity, SystemParams, GroundStateResult) {
    static GS: OnceLock<(AnyNonlinearity, SystemParams, GroundStateResult)> = OnceLock::new();
    GS.get_or_init(|| {
        let (nl, params) = system("kappa", 0.5, 6);
        let gs = common::ground_state(&nl, &params, 2048, 30.0);
        (nl, params, gs)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_energy_is_minus_laplacian_pairing(n in 1usize..=6, c in coeffs(1)) {
        let grid = RadialGrid::new(n, 256, 12.0).unwrap();
        let u = field_from(&grid, 1, &c);
        let lap = grid.laplacian(u.component(0));
        let pairing = -grid.inner(&lap, u.component(0)).re;
        let g = grid.grad_sq(u.component(0));
        prop_assert!((pairing - g).abs() <= 1e-10 * g.max(1e-300));
    }

    #[test]
    fn functionals_scale_homogeneously(lambda in 0.1..5.0f64, c in coeffs(3)) {
        let (nl, params) = system("thg", 0.0, 3);
        let grid = RadialGrid::new(3, 256, 12.0).unwrap();
        let u = field_from(&grid, 3, &c);
        let v = u.scaled(lambda);
        let k = kinetic(&u, &params);
        let p = potential(&u, &nl);
        prop_assert!((kinetic(&v, &params) - lambda * lambda * k).abs() <= 1e-12 * lambda * lambda * k);
        prop_assert!((potential(&v, &nl) - lambda.powi(3) * p).abs() <= 1e-12 * lambda.powi(3) * k.max(p.abs()));
    }

    #[test]
    fn gauge_rotation_preserves_functionals(theta in 0.0..std::f64::consts::TAU, c in coeffs(3)) {
        let (nl, params) = system("shg3", 0.0, 3);
        let sigma = nl.sigma().unwrap().to_vec();
        let grid = RadialGrid::new(3, 256, 12.0).unwrap();
        let u = field_from(&grid, 3, &c);
        let phase: Vec<Complex64> = sigma.iter().map(|s| Complex64::from_polar(1.0, s * theta / 2.0)).collect();
        let a = Parts::of(&u, &params, &nl);
        let b = Parts::of(&u.rotated(&phase), &params, &nl);
        let scale = a.kinetic.max(a.potential.abs()).max(1e-300);
        prop_assert!((a.potential - b.potential).abs() <= 1e-12 * scale);
        prop_assert!((a.kinetic - b.kinetic).abs() <= 1e-12 * scale);
    }

    #[test]
    fn cutoff_admissible_for_any_radius(radius in 0.01..100.0f64, s in 0.0..5.0f64, n in 1usize..=6) {
        let chi = CutoffChi::new(radius, n).unwrap();
        let r = s * radius;
        prop_assert!(chi.d2(r) <= 2.0 + 1e-10);
        prop_assert!(chi.d1(r) >= -1e-10 * radius && chi.d1(r) <= 2.0 * r + 1e-10 * radius);
        prop_assert!((chi.bilaplacian(r)).abs() * radius * radius <= 1e3);
    }

    #[test]
    fn bootstrap_barrier_is_negative(b in 0.01..10.0f64, q in 1.01..4.0f64) {
        let boot = Bootstrap::new(0.0, b, q).unwrap();
        prop_assert!(boot.f(boot.gamma) < 0.0);
        prop_assert!(boot.admissible);
        prop_assert_eq!(boot.branch(boot.gamma * 0.5).unwrap(), Branch::Below);
        prop_assert_eq!(boot.branch(boot.gamma * 2.0).unwrap(), Branch::Above);
    }

    #[test]
    fn median_radius_halves_concentration(c in coeffs(1)) {
        let grid = RadialGrid::new(6, 512, 12.0).unwrap();
        let u = field_from(&grid, 1, &c);
        prop_assume!(u.max_abs() > 1e-6);
        let rho = median_radius(&u, &ScalarCubic).unwrap();
        let total = concentration_q(&u, &ScalarCubic, grid.r_max());
        prop_assert!((concentration_q(&u, &ScalarCubic, rho) / total - 0.5).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn classify_is_gauge_invariant(lambda in 0.3..1.6f64) {
        let (nl, params, gs) = kappa6();
        let th = Thresholds::from_ground_state(&gs.profile, params, nl).unwrap();
        let sigma = nl.sigma().unwrap().to_vec();
        let u0 = gs.profile.scaled(lambda);
        let base = classify(&u0, params, nl, &th).unwrap().verdict;
        for theta in [0.0, 1.0, std::f64::consts::PI] {
            let phase: Vec<Complex64> = sigma.iter().map(|s| Complex64::from_polar(1.0, s * theta / 2.0)).collect();
            prop_assert_eq!(classify(&u0.rotated(&phase), params, nl, &th).unwrap().verdict, base);
        }
    }
}
