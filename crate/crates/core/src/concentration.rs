//! Concentration-compactness diagnostics for radial fields: the
//! concentration function `Q(R) = ∫_{B(0,R)} F(⌊u⌋)`, half-concentration
//! rescaling, logarithmic cutoffs and the localized critical Sobolev
//! inequalities in dimension six.
//!
//! Every ball is centred at the origin.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::functionals::{kinetic, Parts};
use crate::grid::{sphere_area, RadialField, RadialGrid};
use crate::ground_state::scaling_transform;
use crate::nonlinearity::{Nonlinearity, SystemParams};

/// Samples of `F(⌊u⌋)` (real part) at the nodes.
pub fn modulus_density<N: Nonlinearity + ?Sized>(field: &RadialField, nl: &N) -> Vec<f64> {
    let l = field.components();
    let mut z = vec![Complex64::new(0.0, 0.0); l];
    (0..field.grid().len())
        .map(|i| {
            field.point(i, &mut z);
            for v in z.iter_mut() {
                *v = Complex64::new(v.norm(), 0.0);
            }
            nl.potential(&z).re
        })
        .collect()
}

/// Cumulative integral of piecewise-constant radial data, each node's
/// quadrature weight spread over its cell `[ih, (i+1)h]` in proportion to
/// volume.
#[derive(Clone, Debug)]
pub struct CumulativeProfile {
    grid: RadialGrid,
    /// `cell[i] = w_i g_i`
    cell: Vec<f64>,
    /// `before[i] = Σ_{j<i} cell[j]`; one extra entry holds the total.
    before: Vec<f64>,
}

impl CumulativeProfile {
    pub fn new(grid: &RadialGrid, g: &[f64]) -> Self {
        let cell: Vec<f64> = grid.weights().iter().zip(g).map(|(w, v)| w * v).collect();
        let mut before = Vec::with_capacity(cell.len() + 1);
        let mut acc = 0.0;
        before.push(0.0);
        for c in &cell {
            acc += c;
            before.push(acc);
        }
        // Keep the terminal value identical to the grid quadrature.
        *before.last_mut().expect("non-empty") = grid.integrate(g);
        CumulativeProfile { grid: grid.clone(), cell, before }
    }

    pub fn total(&self) -> f64 {
        self.before[self.cell.len()]
    }

    /// `∫_{B(0,R)}`; constant beyond `r_max`.
    pub fn at(&self, radius: f64) -> f64 {
        let h = self.grid.h();
        let m = self.cell.len();
        if !(radius > 0.0) {
            return 0.0;
        }
        if radius >= self.grid.r_max() {
            return self.total();
        }
        let i = ((radius / h).floor() as usize).min(m - 1);
        let n = self.grid.dim() as i32;
        let a = (i as f64 * h).powi(n);
        let b = ((i + 1) as f64 * h).powi(n);
        let frac = ((radius.powi(n) - a) / (b - a)).clamp(0.0, 1.0);
        self.before[i] + frac * self.cell[i]
    }

    /// Smallest `R` with value `target`, inverting the piecewise profile
    /// exactly. `None` when the target is never reached.
    pub fn inverse(&self, target: f64) -> Option<f64> {
        if target <= 0.0 {
            return Some(0.0);
        }
        let h = self.grid.h();
        let n = self.grid.dim() as i32;
        for i in 0..self.cell.len() {
            let lo = self.before[i];
            let hi = lo + self.cell[i];
            if self.cell[i] > 0.0 && hi >= target {
                let t = ((target - lo) / self.cell[i]).clamp(0.0, 1.0);
                let a = (i as f64 * h).powi(n);
                let b = ((i + 1) as f64 * h).powi(n);
                return Some((a + t * (b - a)).powf(1.0 / n as f64));
            }
        }
        None
    }
}

/// `Q(R) = ∫_{B(0,R)} F(⌊u⌋) dx`.
pub fn concentration_q<N: Nonlinearity + ?Sized>(field: &RadialField, nl: &N, radius: f64) -> f64 {
    CumulativeProfile::new(field.grid(), &modulus_density(field, nl)).at(radius)
}

/// `Q(R)` at each requested radius.
pub fn concentration_profile<N: Nonlinearity + ?Sized>(
    field: &RadialField,
    nl: &N,
    radii: &[f64],
) -> Vec<(f64, f64)> {
    let prof = CumulativeProfile::new(field.grid(), &modulus_density(field, nl));
    radii.iter().map(|&r| (r, prof.at(r))).collect()
}

/// True when `F(⌊u⌋)` is non-increasing in `r`, so that the origin
/// realizes the supremum of `Q` over centres.
pub fn density_nonincreasing<N: Nonlinearity + ?Sized>(field: &RadialField, nl: &N) -> bool {
    let d = modulus_density(field, nl);
    let scale = d.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    d.windows(2).all(|w| w[1] <= w[0] + 1e-12 * scale)
}

/// Radius enclosing half of `∫F(⌊u⌋)`.
pub fn median_radius<N: Nonlinearity + ?Sized>(field: &RadialField, nl: &N) -> Result<f64> {
    let prof = CumulativeProfile::new(field.grid(), &modulus_density(field, nl));
    let total = prof.total();
    if !(total > 0.0) {
        return Err(Error::NonPositive { quantity: "concentration total", value: total });
    }
    prof.inverse(0.5 * total)
        .ok_or(Error::NonPositive { quantity: "concentration total", value: total })
}

#[derive(Clone, Debug)]
pub struct HalfConcentration {
    /// Amplitude `λ = P^{−1/3}` applied before dilation.
    pub amplitude: f64,
    /// `R_m` with `v(x) = R_m^{−2} (λu)(x/R_m)`.
    pub radius: f64,
    pub rescaled: RadialField,
}

/// Normalizes `∫F(⌊u⌋) = 1` by amplitude, then dilates so that
/// `∫_{B(0,1)} F(⌊v⌋) = 1/2`. Only meaningful in dimension six, where the
/// dilation preserves `K` and `P`.
pub fn half_concentration_rescale<N: Nonlinearity + ?Sized>(
    field: &RadialField,
    nl: &N,
) -> Result<HalfConcentration> {
    if field.grid().dim() != 6 {
        return Err(Error::Precondition("half-concentration rescaling needs n = 6".into()));
    }
    let total = CumulativeProfile::new(field.grid(), &modulus_density(field, nl)).total();
    if !(total > 0.0) {
        return Err(Error::NonPositive { quantity: "concentration total", value: total });
    }
    let amplitude = total.powf(-1.0 / 3.0);
    let normalized = field.scaled(amplitude);
    // ∫_{B(0,1)} F(v) = ∫_{B(0,1/R)} F(u), so R is the reciprocal median.
    let rho = median_radius(&normalized, nl)?;
    let radius = 1.0 / rho;
    let rescaled = scaling_transform(&normalized, radius)?;
    Ok(HalfConcentration { amplitude, radius, rescaled })
}

/// `χ = 1` on `|y| ≤ r`, `log(|y|/R)/log(r/R)` on the annulus, `0` beyond.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogCutoff {
    pub inner: f64,
    pub outer: f64,
}

impl LogCutoff {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner && outer.is_finite()) {
            return Err(Error::InvalidParameter("log cutoff needs 0 < r < R".into()));
        }
        Ok(LogCutoff { inner, outer })
    }

    pub fn value(&self, y: f64) -> f64 {
        let y = y.abs();
        if y <= self.inner {
            1.0
        } else if y >= self.outer {
            0.0
        } else {
            (y / self.outer).ln() / (self.inner / self.outer).ln()
        }
    }

    /// `|∇χ|`.
    pub fn gradient(&self, y: f64) -> f64 {
        let y = y.abs();
        if y <= self.inner || y >= self.outer {
            0.0
        } else {
            1.0 / (y * (self.outer / self.inner).ln())
        }
    }

    /// `ω₆ / log(R/r)⁵`.
    pub fn grad6_exact(&self) -> f64 {
        sphere_area(6) / (self.outer / self.inner).ln().powi(5)
    }

    /// `∫|∇χ|⁶ dx` in six dimensions by the midpoint rule on `[r, R]`.
    pub fn grad6_quadrature(&self, points: usize) -> f64 {
        let h = (self.outer - self.inner) / points as f64;
        let s: f64 = (0..points)
            .map(|j| {
                let y = self.inner + (j as f64 + 0.5) * h;
                self.gradient(y).powi(6) * y.powi(5)
            })
            .sum();
        sphere_area(6) * s * h
    }

    /// `χ·u` sampled on the field's grid.
    pub fn apply(&self, field: &RadialField) -> RadialField {
        let nodes = field.grid().nodes();
        let data = field
            .data()
            .iter()
            .map(|c| c.iter().zip(nodes).map(|(v, &r)| v * self.value(r)).collect())
            .collect();
        RadialField::from_components(field.grid(), data).expect("same shape")
    }
}

/// `C(δ) = exp[−(ζ / (√(δ+1) − 1))^{6/5}]`.
pub fn cutoff_c_delta(delta: f64, zeta: f64) -> f64 {
    let eps = (delta + 1.0).sqrt() - 1.0;
    (-(zeta / eps).powf(1.2)).exp()
}

/// Closed-form best constant in `‖f‖_{L³}² ≤ C ‖∇f‖²` on `ℝ⁶`:
/// `C = 60^{1/3} / (24π)`.
pub fn sobolev_constant_exact() -> f64 {
    60f64.powf(1.0 / 3.0) / (24.0 * core::f64::consts::PI)
}

/// `‖φ‖_{L³}² / ‖∇φ‖²` for the bubble `φ = 24/(1+r²)²` on a six-dimensional
/// grid.
pub fn sobolev_constant_estimate(grid: &RadialGrid) -> Result<f64> {
    if grid.dim() != 6 {
        return Err(Error::Precondition("Sobolev bubble lives in n = 6".into()));
    }
    let phi: Vec<Complex64> = grid
        .nodes()
        .iter()
        .map(|r| Complex64::new(24.0 / (1.0 + r * r).powi(2), 0.0))
        .collect();
    let l3 = grid.integrate_fn(|i| phi[i].re.powi(3)).powf(2.0 / 3.0);
    Ok(l3 / grid.grad_sq(&phi))
}

/// `ζ = √C · ω₆^{1/6}`.
pub fn zeta(sobolev: f64) -> f64 {
    sobolev.sqrt() * sphere_area(6).powf(1.0 / 6.0)
}

/// One side of the localized inequality: `lhs ≤ rhs`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InequalitySide {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

impl InequalitySide {
    fn new(lhs: f64, rhs: f64) -> Self {
        InequalitySide { lhs, rhs, margin: rhs - lhs }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalizedSobolevReport {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub delta: f64,
    pub s_estimate: f64,
    pub zeta: f64,
    pub c_delta: f64,
    /// `∫_{B(r)} F ≤ S^{−3/2}[∫_{B(R)} Σγ|∇u|² + δK]^{3/2}`
    pub inner: InequalitySide,
    /// `∫_{B(R)ᶜ} F ≤ S^{−3/2}[∫_{B(r)ᶜ} Σγ|∇u|² + (2δ+δ²)K]^{3/2}`
    pub outer: InequalitySide,
    /// Whether `F(⌊u⌋)` decreases outward; the origin is then the
    /// optimal centre.
    pub centred_optimally: bool,
    pub passed: bool,
}

/// `Σ γ_k ∫_{B(0,R)} |∇u_k|²`, splitting the boundary shell by volume.
pub fn kinetic_in_ball(field: &RadialField, params: &SystemParams, radius: f64) -> f64 {
    let grid = field.grid();
    let nodes = grid.nodes();
    let m = grid.len();
    let n = grid.dim() as i32;
    let mut total = 0.0;
    for (k, c) in field.data().iter().enumerate() {
        let faces = grid.grad_sq_faces(c);
        let mut acc = 0.0;
        for (i, e) in faces.iter().enumerate() {
            let a = nodes[i];
            let b = if i + 1 < m { nodes[i + 1] } else { grid.r_max() };
            let frac = if radius >= b {
                1.0
            } else if radius <= a {
                0.0
            } else {
                (radius.powi(n) - a.powi(n)) / (b.powi(n) - a.powi(n))
            };
            acc += frac * e;
        }
        total += params.gamma[k] * acc;
    }
    total
}

/// Evaluates both localized critical Sobolev inequalities about the origin.
///
/// `sobolev` is the scalar constant `C` entering `ζ`; `s_estimate` is the
/// vector constant `S` of the system.
pub fn localized_sobolev_check<N: Nonlinearity + ?Sized>(
    field: &RadialField,
    params: &SystemParams,
    nl: &N,
    inner_radius: f64,
    outer_radius: f64,
    delta: f64,
    s_estimate: f64,
    sobolev: f64,
) -> Result<LocalizedSobolevReport> {
    if field.grid().dim() != 6 {
        return Err(Error::Precondition("localized Sobolev check needs n = 6".into()));
    }
    if !(delta > 0.0) || !(s_estimate > 0.0) || !(sobolev > 0.0) {
        return Err(Error::InvalidParameter("delta, S and C must be positive".into()));
    }
    let cut = LogCutoff::new(inner_radius, outer_radius)?;
    let z = zeta(sobolev);
    let c_delta = cutoff_c_delta(delta, z);
    if cut.inner / cut.outer > c_delta {
        return Err(Error::Precondition("r/R exceeds C(delta)".into()));
    }
    let prof = CumulativeProfile::new(field.grid(), &modulus_density(field, nl));
    let k_total = kinetic(field, params);
    let k_inside_big = kinetic_in_ball(field, params, cut.outer);
    let k_outside_small = k_total - kinetic_in_ball(field, params, cut.inner);
    let factor = s_estimate.powf(-1.5);
    let inner = InequalitySide::new(
        prof.at(cut.inner),
        factor * (k_inside_big + delta * k_total).max(0.0).powf(1.5),
    );
    let outer = InequalitySide::new(
        prof.total() - prof.at(cut.outer),
        factor * (k_outside_small + (2.0 * delta + delta * delta) * k_total).max(0.0).powf(1.5),
    );
    Ok(LocalizedSobolevReport {
        inner_radius,
        outer_radius,
        delta,
        s_estimate,
        zeta: z,
        c_delta,
        inner,
        outer,
        centred_optimally: density_nonincreasing(field, nl),
        passed: inner.margin >= 0.0 && outer.margin >= 0.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SEstimate {
    pub value: f64,
    /// Set when the value is an infimum over trial fields (an upper bound).
    pub trial_based: bool,
    pub samples: usize,
}

/// `K(λu)` with `λ = P(u)^{−1/3}`, i.e. `K/P^{2/3}`; `None` when `P ≤ 0`.
pub fn normalized_kinetic<N: Nonlinearity + ?Sized>(
    field: &RadialField,
    params: &SystemParams,
    nl: &N,
) -> Option<f64> {
    let parts = Parts::of(field, params, nl);
    (parts.potential > 0.0).then(|| parts.kinetic / parts.potential.powf(2.0 / 3.0))
}

/// `S` from a six-dimensional ground state.
pub fn estimate_s_ground_state<N: Nonlinearity + ?Sized>(
    profile: &RadialField,
    params: &SystemParams,
    nl: &N,
) -> Result<SEstimate> {
    if profile.grid().dim() != 6 {
        return Err(Error::Precondition("S is defined for n = 6".into()));
    }
    let parts = Parts::of(profile, params, nl);
    let value = normalized_kinetic(profile, params, nl)
        .ok_or(Error::OutsideDomain { potential: parts.potential })?;
    Ok(SEstimate { value, trial_based: false, samples: 1 })
}

/// Infimum of `K` over `P`-normalized trial fields.
pub fn estimate_s_trials<N: Nonlinearity + ?Sized>(
    trials: &[RadialField],
    params: &SystemParams,
    nl: &N,
) -> Result<SEstimate> {
    let mut best: Option<f64> = None;
    let mut samples = 0;
    for t in trials {
        if t.grid().dim() != 6 {
            return Err(Error::Precondition("S is defined for n = 6".into()));
        }
        if let Some(v) = normalized_kinetic(t, params, nl) {
            samples += 1;
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    }
    let value = best.ok_or(Error::Precondition("no trial field with P > 0".into()))?;
    Ok(SEstimate { value, trial_based: true, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::ScalarCubic;

    #[test]
    fn cutoff_constant_examples() {
        assert!((cutoff_c_delta(3.0, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((cutoff_c_delta(8.0, 1.0) - 0.647_09).abs() < 1e-5);
        let mut prev = 1.0;
        for j in 1..40 {
            let v = cutoff_c_delta(8.0 / (j as f64 * 1.5), 1.0);
            assert!(v < prev && v > 0.0);
            prev = v;
        }
    }

    #[test]
    fn log_cutoff_shape() {
        let c = LogCutoff::new(1.0, 10.0).unwrap();
        assert_eq!(c.value(0.5), 1.0);
        assert_eq!(c.value(11.0), 0.0);
        assert!((c.value(10f64.sqrt()) - 0.5).abs() < 1e-14);
        for (r, big) in [(1.0, 10.0), (0.5, 20.0), (2.0, 8.0)] {
            let c = LogCutoff::new(r, big).unwrap();
            let q = c.grad6_quadrature(20_000);
            assert!((q / c.grad6_exact() - 1.0).abs() < 1e-3, "{q}");
        }
    }

    #[test]
    fn sobolev_bubble_matches_closed_form() {
        // The bubble decays like r^{-4}; the wall must sit far out.
        let grid = RadialGrid::new(6, 16384, 160.0).unwrap();
        let est = sobolev_constant_estimate(&grid).unwrap();
        assert!((est / sobolev_constant_exact() - 1.0).abs() < 1e-4, "{est}");
    }

    #[test]
    fn profile_inverse_round_trips() {
        let grid = RadialGrid::new(6, 512, 10.0).unwrap();
        let u = RadialField::from_real_fn(&grid, 1, |_, r| (-r * r).exp());
        let rho = median_radius(&u, &ScalarCubic).unwrap();
        let q = concentration_q(&u, &ScalarCubic, rho);
        let total = concentration_q(&u, &ScalarCubic, grid.r_max());
        assert!((q / total - 0.5).abs() < 1e-12);
    }
}
