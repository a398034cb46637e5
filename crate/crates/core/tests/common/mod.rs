#![allow(dead_code)]

use std::io::Write;

use qnls_core::ground_state::{gaussian_seed, petviashvili, GroundStateResult};
use qnls_core::nonlinearity::{AnyNonlinearity, SystemParams};
use qnls_core::{Complex64, RadialField, RadialGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Writes straight to the process stdout so the line survives test capture.
pub fn report(criterion: u32, passed: bool, detail: &str) {
    let verdict = if passed { "PASS" } else { "FAIL" };
    let line = format!("criterion {criterion:>2}: {verdict}  {detail}\n");
    let out = std::io::stdout();
    let mut lock = out.lock();
    let _ = lock.write_all(line.as_bytes());
    let _ = lock.flush();
}

/// Built-in system moved to dimension `n`; `n = 6` drops the frequency.
pub fn system(name: &str, kappa: f64, n: usize) -> (AnyNonlinearity, SystemParams) {
    let (nl, params) = AnyNonlinearity::builtin(name, kappa).unwrap();
    let params = params.with_dimension(n).unwrap();
    let params = if n == 6 { params.with_omega(0.0) } else { params };
    (nl, params)
}

pub fn ground_state(nl: &AnyNonlinearity, params: &SystemParams, m: usize, r_max: f64) -> GroundStateResult {
    let grid = RadialGrid::new(params.n, m, r_max).unwrap();
    petviashvili(params, nl, &gaussian_seed(&grid, params.l), &Default::default()).unwrap()
}

/// Sum of a few complex Gaussians in `r²` per component (smooth through the origin).
pub fn random_smooth_field(grid: &RadialGrid, l: usize, rng: &mut ChaCha8Rng) -> RadialField {
    let shells: Vec<Vec<(Complex64, f64, f64, f64)>> = (0..l)
        .map(|_| {
            (0..3)
                .map(|_| {
                    let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    (amp, rng.gen_range(0.3..3.0), rng.gen_range(0.0..3.0), rng.gen_range(-1.0..1.0))
                })
                .collect()
        })
        .collect();
    RadialField::from_fn(grid, l, |k, r| {
        shells[k]
            .iter()
            .map(|&(a, w, c, p)| a * (1.0 + c * r * r) * (-r * r / w).exp() * Complex64::from_polar(1.0, p * r * r))
            .sum()
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
