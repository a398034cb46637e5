//! Time integration of `iα_k ∂_t u_k + γ_k Δu_k − β_k u_k + f_k(u) = 0` for
//! radial data.
//!
//! One step is Strang splitting: a Crank–Nicolson half step of the linear
//! flow, a full nonlinear step `iα_k u_k' = −f_k(u)` integrated node by node
//! with RK4, and a second linear half step.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::functionals::{record_from_parts, DiagnosticsRecord, Parts};
use crate::grid::RadialField;
use crate::linalg::TridiagonalLu;
use crate::nonlinearity::{Nonlinearity, SystemParams};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Diagnostics are stored every this many steps (and at the end).
    pub record_every: usize,
    /// Blow-up is declared once `K(u(t)) > blowup_k_factor · K(u0)`.
    pub blowup_k_factor: f64,
    /// Largest admissible `max|u|` over the outer 5% of the grid, relative
    /// to `max|u|`.
    pub tail_tol: f64,
    /// Largest admissible relative energy change over one step.
    pub drift_tol: f64,
    /// How many times a rejected step may be split in half.
    pub max_halvings: u32,
    pub rk_substeps: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            dt: 1e-3,
            t_final: 1.0,
            record_every: 10,
            blowup_k_factor: 1e6,
            tail_tol: 1e-4,
            drift_tol: 1e-8,
            max_halvings: 5,
            rk_substeps: 4,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter("dt must be positive".into()));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParameter("t_final must be positive".into()));
        }
        if self.record_every == 0 || self.rk_substeps == 0 {
            return Err(Error::InvalidParameter("record_every and rk_substeps must be positive".into()));
        }
        if !(self.blowup_k_factor > 1.0) || !(self.tail_tol > 0.0) || !(self.drift_tol > 0.0) {
            return Err(Error::InvalidParameter("thresholds must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum Verdict {
    Completed,
    BlowupDetected { t: f64 },
    ResolutionLost { t: f64 },
}

#[derive(Clone, Debug)]
pub struct TimeSeries {
    pub records: Vec<DiagnosticsRecord>,
    pub verdict: Verdict,
    /// Largest relative change of `Σ σ_k α_k |u_k|²` at any node across
    /// any nonlinear substep.
    pub max_invariant_defect: f64,
    pub steps: usize,
    /// Number of rejected (and split) steps, at any depth.
    pub halvings: usize,
    pub min_dt: f64,
}

/// Precomputed Crank–Nicolson factors and nonlinear integrator for a fixed
/// `dt`.
#[derive(Debug)]
pub struct Stepper {
    dt: f64,
    substeps: usize,
    /// `(1 + iτH_k/(2α_k))` factored, with `τ = dt/2`.
    implicit: Vec<TridiagonalLu<Complex64>>,
    /// Bands of `H_k = −γ_kΔ + β_k`.
    h_bands: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>,
    /// `τ/(2α_k)`
    coef: Vec<f64>,
    inv_alpha: Vec<f64>,
    weights: Vec<f64>,
}

impl Stepper {
    pub fn new(field: &RadialField, params: &SystemParams, sigma: &[f64], dt: f64, substeps: usize) -> Result<Self> {
        let grid = field.grid();
        let l = field.components();
        if params.l != l || sigma.len() != l {
            return Err(Error::InvalidParameter("component count mismatch".into()));
        }
        let (lo, di, up) = grid.laplacian_bands();
        let tau = 0.5 * dt;
        let mut implicit = Vec::with_capacity(l);
        let mut h_bands = Vec::with_capacity(l);
        let mut coef = Vec::with_capacity(l);
        for k in 0..l {
            let g = params.gamma[k];
            let hl: Vec<f64> = lo.iter().map(|x| -g * x).collect();
            let hd: Vec<f64> = di.iter().map(|x| -g * x + params.beta[k]).collect();
            let hu: Vec<f64> = up.iter().map(|x| -g * x).collect();
            let a = tau / (2.0 * params.alpha[k]);
            let i_a = Complex64::new(0.0, a);
            let al: Vec<Complex64> = hl.iter().map(|&x| i_a * x).collect();
            let ad: Vec<Complex64> = hd.iter().map(|&x| Complex64::new(1.0, 0.0) + i_a * x).collect();
            let au: Vec<Complex64> = hu.iter().map(|&x| i_a * x).collect();
            implicit.push(TridiagonalLu::new(&al, &ad, &au)?);
            h_bands.push((hl, hd, hu));
            coef.push(a);
        }
        let weights = sigma.iter().zip(&params.alpha).map(|(s, a)| s * a).collect();
        Ok(Stepper {
            dt,
            substeps,
            implicit,
            h_bands,
            coef,
            inv_alpha: params.alpha.iter().map(|a| 1.0 / a).collect(),
            weights,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Half step of the linear flow on every component.
    pub fn linear_half(&self, field: &mut RadialField) {
        for k in 0..field.components() {
            let (hl, hd, hu) = &self.h_bands[k];
            let i_a = Complex64::new(0.0, self.coef[k]);
            let u = field.component_mut(k);
            let m = u.len();
            let mut rhs: Vec<Complex64> = (0..m)
                .map(|i| {
                    let mut hu_i = u[i] * hd[i];
                    if i > 0 {
                        hu_i += u[i - 1] * hl[i];
                    }
                    if i + 1 < m {
                        hu_i += u[i + 1] * hu[i];
                    }
                    u[i] - i_a * hu_i
                })
                .collect();
            self.implicit[k].solve(&mut rhs);
            u.copy_from_slice(&rhs);
        }
    }

    /// Full nonlinear step `u_k' = (i/α_k) f_k(u)` at every node. Returns the
    /// largest relative change of `Σ σ_k α_k |u_k|²`.
    pub fn nonlinear<N: Nonlinearity + ?Sized>(&self, field: &mut RadialField, nl: &N) -> f64 {
        let l = field.components();
        let m = field.grid().len();
        let h = self.dt / self.substeps as f64;
        let mut z = vec![Complex64::new(0.0, 0.0); l];
        let mut scratch = Rk4Scratch::new(l);
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..m {
            field.point(i, &mut z);
            let before = self.invariant(&z);
            for _ in 0..self.substeps {
                rk4(&mut z, h, &self.inv_alpha, nl, &mut scratch);
            }
            let after = self.invariant(&z);
            worst = worst.max((after - before).abs());
            scale = scale.max(before);
            for k in 0..l {
                field.component_mut(k)[i] = z[k];
            }
        }
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }

    fn invariant(&self, z: &[Complex64]) -> f64 {
        z.iter().zip(&self.weights).map(|(v, w)| w * v.norm_sqr()).sum()
    }

    /// One Strang step; returns the nonlinear invariant defect.
    pub fn step<N: Nonlinearity + ?Sized>(&self, field: &mut RadialField, nl: &N) -> f64 {
        self.linear_half(field);
        let defect = self.nonlinear(field, nl);
        self.linear_half(field);
        defect
    }
}

struct Rk4Scratch {
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
    f: Vec<Complex64>,
}

impl Rk4Scratch {
    fn new(l: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); l];
        Rk4Scratch { k: [z.clone(), z.clone(), z.clone(), z.clone()], tmp: z.clone(), f: z }
    }
}

fn rk4<N: Nonlinearity + ?Sized>(z: &mut [Complex64], h: f64, inv_alpha: &[f64], nl: &N, s: &mut Rk4Scratch) {
    let l = z.len();
    let rhs = |x: &[Complex64], out: &mut [Complex64], f: &mut [Complex64]| {
        nl.forcing(x, f);
        for k in 0..l {
            out[k] = Complex64::new(-f[k].im, f[k].re) * inv_alpha[k];
        }
    };
    rhs(z, &mut s.k[0], &mut s.f);
    for (stage, c) in [(1, 0.5), (2, 0.5), (3, 1.0)] {
        for k in 0..l {
            s.tmp[k] = z[k] + s.k[stage - 1][k] * (c * h);
        }
        let rest = &mut s.k[stage..];
        rhs(&s.tmp, &mut rest[0], &mut s.f);
    }
    for k in 0..l {
        z[k] += (s.k[0][k] + s.k[1][k] * 2.0 + s.k[2][k] * 2.0 + s.k[3][k]) * (h / 6.0);
    }
}

/// One Strang step of size `dt`.
pub fn step<N: Nonlinearity + ?Sized>(
    field: &RadialField,
    params: &SystemParams,
    nl: &N,
    dt: f64,
) -> Result<RadialField> {
    let sigma = nl.sigma().ok_or(Error::MissingSigma)?;
    let stepper = Stepper::new(field, params, sigma, dt, EvolveConfig::default().rk_substeps)?;
    let mut out = field.clone();
    stepper.step(&mut out, nl);
    if !out.is_finite() {
        return Err(Error::InvalidParameter("non-finite value after step".into()));
    }
    Ok(out)
}

enum Advance {
    Ok,
    Uncontrolled,
    NonFinite,
}

struct Driver<'a, N: ?Sized> {
    params: &'a SystemParams,
    sigma: &'a [f64],
    nl: &'a N,
    config: &'a EvolveConfig,
    /// `steppers[j]` has step `dt / 2^j`.
    steppers: Vec<Stepper>,
    max_defect: f64,
    min_dt: f64,
    splits: usize,
}

impl<N: Nonlinearity + ?Sized> Driver<'_, N> {
    fn ensure_stepper(&mut self, field: &RadialField, depth: usize) -> Result<()> {
        while self.steppers.len() <= depth {
            let dt = self.config.dt / (1u64 << self.steppers.len()) as f64;
            let s = Stepper::new(field, self.params, self.sigma, dt, self.config.rk_substeps)?;
            self.steppers.push(s);
        }
        Ok(())
    }

    /// Advances by `dt / 2^depth`, splitting when the energy jumps.
    fn advance(&mut self, field: &mut RadialField, parts: &mut Parts, depth: usize) -> Result<Advance> {
        self.ensure_stepper(field, depth)?;
        let stepper = &self.steppers[depth];
        let mut trial = field.clone();
        let defect = stepper.step(&mut trial, self.nl);
        let dt = stepper.dt();
        if !trial.is_finite() {
            return Ok(Advance::NonFinite);
        }
        let next = Parts::of(&trial, self.params, self.nl);
        let e0 = parts.energy(self.params);
        let e1 = next.energy(self.params);
        let scale = e0.abs().max(parts.kinetic).max(f64::MIN_POSITIVE);
        if (e1 - e0).abs() / scale <= self.config.drift_tol {
            self.max_defect = self.max_defect.max(defect);
            self.min_dt = self.min_dt.min(dt);
            *field = trial;
            *parts = next;
            return Ok(Advance::Ok);
        }
        if depth as u32 >= self.config.max_halvings {
            return Ok(Advance::Uncontrolled);
        }
        self.splits += 1;
        for _ in 0..2 {
            match self.advance(field, parts, depth + 1)? {
                Advance::Ok => {}
                other => return Ok(other),
            }
        }
        Ok(Advance::Ok)
    }
}

/// Integrates to `t_final` or until a verdict triggers.
pub fn evolve<N: Nonlinearity + ?Sized>(
    u0: &RadialField,
    params: &SystemParams,
    nl: &N,
    config: &EvolveConfig,
) -> Result<TimeSeries> {
    evolve_observed(u0, params, nl, config, |_, _| {})
}

/// As [`evolve`], calling `observer` at every recorded instant.
pub fn evolve_observed<N, O>(
    u0: &RadialField,
    params: &SystemParams,
    nl: &N,
    config: &EvolveConfig,
    mut observer: O,
) -> Result<TimeSeries>
where
    N: Nonlinearity + ?Sized,
    O: FnMut(&DiagnosticsRecord, &RadialField),
{
    config.validate()?;
    let sigma = nl.sigma().ok_or(Error::MissingSigma)?;
    if u0.components() != nl.components() || params.l != u0.components() {
        return Err(Error::InvalidParameter("component count mismatch".into()));
    }
    if params.n != u0.grid().dim() {
        return Err(Error::InvalidParameter("grid dimension differs from params.n".into()));
    }
    let n = u0.grid().dim();
    let mut driver = Driver {
        params,
        sigma,
        nl,
        config,
        steppers: Vec::new(),
        max_defect: 0.0,
        min_dt: config.dt,
        splits: 0,
    };
    let mut field = u0.clone();
    let mut parts = Parts::of(&field, params, nl);
    let k0 = parts.kinetic;
    let first = record_from_parts(0.0, &parts, params, sigma, n);
    observer(&first, &field);
    let mut records = vec![first];
    let total = (config.t_final / config.dt).round().max(1.0) as usize;
    let mut verdict = Verdict::Completed;
    let mut steps = 0;
    for s in 1..=total {
        let t = s as f64 * config.dt;
        let outcome = driver.advance(&mut field, &mut parts, 0)?;
        steps = s;
        match outcome {
            Advance::Ok => {}
            Advance::Uncontrolled => {
                verdict = Verdict::BlowupDetected { t };
                break;
            }
            Advance::NonFinite => {
                verdict = Verdict::ResolutionLost { t };
                break;
            }
        }
        if k0 > 0.0 && parts.kinetic > config.blowup_k_factor * k0 {
            verdict = Verdict::BlowupDetected { t };
        } else if field.tail_ratio() > config.tail_tol {
            verdict = Verdict::ResolutionLost { t };
        }
        if s % config.record_every == 0 || s == total || verdict != Verdict::Completed {
            let rec = record_from_parts(t, &parts, params, sigma, n);
            observer(&rec, &field);
            records.push(rec);
        }
        if verdict != Verdict::Completed {
            break;
        }
    }
    Ok(TimeSeries {
        records,
        verdict,
        max_invariant_defect: driver.max_defect,
        steps,
        halvings: driver.splits,
        min_dt: driver.min_dt,
    })
}

/// Largest relative deviation of a diagnostic from its initial value,
/// normalized by `max(|x(0)|, scale)`.
pub fn max_drift(records: &[DiagnosticsRecord], get: impl Fn(&DiagnosticsRecord) -> f64, scale: f64) -> f64 {
    let Some(first) = records.first() else {
        return 0.0;
    };
    let x0 = get(first);
    let norm = x0.abs().max(scale);
    records.iter().map(|r| (get(r) - x0).abs() / norm).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::nonlinearity::{AnyNonlinearity, ZeroNonlinearity};

    fn gaussian(grid: &RadialGrid, l: usize, amp: f64) -> RadialField {
        RadialField::from_fn(grid, l, |k, r| {
            Complex64::new(amp * (-r * r / 2.0).exp(), 0.1 * k as f64 * amp * (-r * r).exp())
        })
    }

    #[test]
    fn linear_flow_is_unitary() {
        let grid = RadialGrid::new(3, 512, 20.0).unwrap();
        let params = SystemParams::new(3, vec![1.0], vec![1.0], vec![0.0], 1.0).unwrap();
        let nl = ZeroNonlinearity::new(1);
        let mut u = gaussian(&grid, 1, 1.0);
        let n0 = u.l2_norm();
        let s = Stepper::new(&u, &params, &[1.0], 1e-2, 4).unwrap();
        for _ in 0..100 {
            let before = u.l2_norm();
            s.step(&mut u, &nl);
            assert!((u.l2_norm() / before - 1.0).abs() < 1e-12);
        }
        assert!((u.l2_norm() / n0 - 1.0).abs() < 1e-11);
    }

    #[test]
    fn reverse_step_returns() {
        let (nl, params) = AnyNonlinearity::builtin("kappa", 0.5).unwrap();
        let params = params.with_dimension(3).unwrap();
        let grid = RadialGrid::new(3, 512, 20.0).unwrap();
        let u = gaussian(&grid, 2, 0.5);
        for dt in [1e-2, 5e-3] {
            let back = step(&step(&u, &params, &nl, dt).unwrap(), &params, &nl, -dt).unwrap();
            let err = back.l2_distance(&u).unwrap() / u.l2_norm();
            // CN is exactly reversible; only the RK4 substeps leave a residue.
            assert!(err < dt * dt * dt, "{dt}: {err}");
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let (nl, params) = AnyNonlinearity::builtin("shg3", 0.0).unwrap();
        let grid = RadialGrid::new(3, 256, 20.0).unwrap();
        let u = RadialField::zeros(&grid, 3);
        let cfg = EvolveConfig { t_final: 0.1, ..Default::default() };
        let ts = evolve(&u, &params, &nl, &cfg).unwrap();
        assert_eq!(ts.verdict, Verdict::Completed);
        assert!(ts.records.iter().all(|r| r.k == 0.0 && r.q == 0.0));
    }
}
