//! Virial and Morawetz quantities, the truncated weight `χ_R`, the
//! bootstrap barrier and the a priori blow-up/global classification.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};


use crate::error::{Error, Result};
use crate::functionals::{DiagnosticsRecord, Parts};
use crate::grid::RadialField;
use crate::nonlinearity::{Nonlinearity, Rational, SystemParams};

/// `V = Σ_k (α_k²/γ_k) ∫ |x|² |u_k|² dx`.
pub fn virial_v(field: &RadialField, params: &SystemParams) -> f64 {
    let g = field.grid();
    let nodes = g.nodes();
    field
        .data()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let w = params.alpha[k] * params.alpha[k] / params.gamma[k];
            w * g.integrate_fn(|i| nodes[i] * nodes[i] * c[i].norm_sqr())
        })
        .sum()
}

/// `∂_r u` at the nodes by fourth-order differences: central in the bulk,
/// one-sided over `r > 0` in the first two cells (so phases like `e^{ir}`,
/// which are not smooth through the origin, keep full order), and zero
/// beyond `r_max`.
pub fn radial_derivative(field: &RadialField, k: usize) -> Vec<Complex64> {
    let u = field.component(k);
    let m = u.len();
    let h = field.grid().h();
    let get = |j: usize| -> Complex64 { if j < m { u[j] } else { Complex64::zero() } };
    (0..m)
        .map(|i| {
            let d = match i {
                0 => get(0) * -25.0 + get(1) * 48.0 - get(2) * 36.0 + get(3) * 16.0 - get(4) * 3.0,
                1 => get(0) * -3.0 - get(1) * 10.0 + get(2) * 18.0 - get(3) * 6.0 + get(4),
                _ => get(i - 2) - get(i - 1) * 8.0 + get(i + 1) * 8.0 - get(i + 2),
            };
            d / (12.0 * h)
        })
        .collect()
}

/// Radial weight `φ` in the Morawetz functional.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weight {
    /// `φ = |x|²`
    Square,
    Cutoff(CutoffChi),
}

impl Weight {
    /// `φ'(r)`
    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            Weight::Square => 2.0 * r,
            Weight::Cutoff(c) => c.d1(r),
        }
    }
}

/// `ℛ = 2 Σ_k α_k Im ∫ φ'(r) ∂_r u_k ū_k dx`.
pub fn morawetz_r(field: &RadialField, params: &SystemParams, weight: &Weight) -> f64 {
    let g = field.grid();
    let nodes = g.nodes();
    let mut total = 0.0;
    for k in 0..field.components() {
        let du = radial_derivative(field, k);
        let u = field.component(k);
        let s = g.integrate_fn(|i| weight.derivative(nodes[i]) * (du[i] * u[i].conj()).im);
        total += 2.0 * params.alpha[k] * s;
    }
    total
}

/// Constant `C` with `|ℛ| ≤ C·R·Q^{1/2}K^{1/2}` for the weight `χ_R`.
pub fn morawetz_bound_constant(params: &SystemParams, sigma: &[f64]) -> f64 {
    let worst = (0..params.l)
        .map(|k| (2.0 * params.alpha[k] / (sigma[k] * params.gamma[k])).sqrt())
        .fold(0.0, f64::max);
    2.0 * CutoffChi::MAX_SLOPE * worst
}

/// `χ_R(r) = R² χ(r/R)` with `χ = r²` on `[0,1]`, `χ = c` on `[3,∞)` and
/// the Hermite join on `[1,3]` matching value, slope and curvature at both
/// ends.
///
/// The plateau `c = 11/3` is the unique value for which the join has
/// degree four instead of five; then `χ' = (s−3)²(s+1/2)` and
/// `χ'' = 2 − 7(s−1) + 3(s−1)²` on the join, which satisfy `χ'' ≤ 2` and
/// `0 ≤ χ' ≤ 2s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffChi {
    pub radius: f64,
    n: usize,
}

impl CutoffChi {
    pub const PLATEAU: f64 = 11.0 / 3.0;
    /// `max_s χ'(s)`, attained at `s = 4/3`.
    pub const MAX_SLOPE: f64 = 125.0 / 54.0;

    pub fn new(radius: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter("cutoff radius must be positive".into()));
        }
        if !(1..=6).contains(&n) {
            return Err(Error::DimensionOutOfRange(n));
        }
        Ok(CutoffChi { radius, n })
    }

    /// Unscaled profile and its first four derivatives at `s`.
    fn profile(s: f64) -> [f64; 5] {
        if s <= 1.0 {
            [s * s, 2.0 * s, 2.0, 0.0, 0.0]
        } else if s >= 3.0 {
            [Self::PLATEAU, 0.0, 0.0, 0.0, 0.0]
        } else {
            let t = s - 1.0;
            [
                1.0 + 2.0 * t + t * t - 7.0 / 6.0 * t.powi(3) + 0.25 * t.powi(4),
                2.0 + 2.0 * t - 3.5 * t * t + t.powi(3),
                2.0 - 7.0 * t + 3.0 * t * t,
                -7.0 + 6.0 * t,
                6.0,
            ]
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.radius * self.radius * Self::profile(r / self.radius)[0]
    }

    /// `χ_R'(r)`
    pub fn d1(&self, r: f64) -> f64 {
        self.radius * Self::profile(r / self.radius)[1]
    }

    /// `χ_R''(r)`
    pub fn d2(&self, r: f64) -> f64 {
        Self::profile(r / self.radius)[2]
    }

    /// `Δχ_R = χ_R'' + (n−1)χ_R'/r`.
    pub fn laplacian(&self, r: f64) -> f64 {
        let s = r / self.radius;
        let p = Self::profile(s);
        if s <= 1.0 {
            return 2.0 * self.n as f64;
        }
        p[2] + (self.n as f64 - 1.0) * p[1] / s
    }

    /// `d/dr Δχ_R`.
    pub fn laplacian_d1(&self, r: f64) -> f64 {
        let s = r / self.radius;
        if s <= 1.0 || s >= 3.0 {
            return 0.0;
        }
        let p = Self::profile(s);
        let nm1 = self.n as f64 - 1.0;
        (p[3] + nm1 * (p[2] / s - p[1] / (s * s))) / self.radius
    }

    /// `Δ²χ_R` away from the join points `r = R, 3R`, where `χ'''` jumps.
    pub fn bilaplacian(&self, r: f64) -> f64 {
        let s = r / self.radius;
        if s <= 1.0 || s >= 3.0 {
            return 0.0;
        }
        let p = Self::profile(s);
        let nm1 = self.n as f64 - 1.0;
        let d1 = p[3] + nm1 * (p[2] / s - p[1] / (s * s));
        let d2 = p[4] + nm1 * (p[3] / s - 2.0 * p[2] / (s * s) + 2.0 * p[1] / s.powi(3));
        (d2 + nm1 * d1 / s) / (self.radius * self.radius)
    }
}

/// `ℛ'` for the weight `χ_R`:
/// `4∫χ_R'' Σγ_k|∇u_k|² − ∫Δ²χ_R Σγ_k|u_k|² − 2Re∫Δχ_R F(u)`.
///
/// The middle term is evaluated as `∫ (Δχ_R)' ∂_r(Σγ_k|u_k|²)`, which also
/// accounts for the jumps of `χ'''` at the join points.
pub fn rprime_radial<N: Nonlinearity + ?Sized>(
    field: &RadialField,
    params: &SystemParams,
    nl: &N,
    chi: &CutoffChi,
) -> f64 {
    let g = field.grid();
    let m = g.len();
    let nodes = g.nodes();
    let h = g.h();
    let first: f64 = field
        .data()
        .iter()
        .enumerate()
        .map(|(k, c)| params.gamma[k] * g.weighted_grad_sq(c, |rf| chi.d2(rf)))
        .sum::<f64>()
        * 4.0;
    let rho: Vec<f64> = (0..m)
        .map(|i| field.data().iter().enumerate().map(|(k, c)| params.gamma[k] * c[i].norm_sqr()).sum())
        .collect();
    // Same face measure as RadialGrid::grad_sq, with ρ_M = 0 past the wall.
    let mut second = 0.0;
    let faces = g.faces();
    let area = g.sphere_area();
    for i in 0..m {
        let next = if i + 1 < m { rho[i + 1] } else { 0.0 };
        let rf = (i as f64 + 1.0) * h;
        second += area * faces[i] * chi.laplacian_d1(rf) * (next - rho[i]);
    }
    let mut z = vec![Complex64::zero(); field.components()];
    let density: Vec<f64> = (0..m)
        .map(|i| {
            field.point(i, &mut z);
            chi.laplacian(nodes[i]) * nl.potential(&z).re
        })
        .collect();
    let third = -2.0 * g.integrate(&density);
    first + second + third
}

/// `W = ∫ |x|² Im Σ_k m_k f_k(u) ū_k dx`, the quantity whose derivative
/// breaks the virial identity without mass resonance.
pub fn resonance_moment<N: Nonlinearity + ?Sized>(field: &RadialField, params: &SystemParams, nl: &N) -> f64 {
    let g = field.grid();
    let nodes = g.nodes();
    let masses = params.masses();
    let l = field.components();
    let mut z = vec![Complex64::zero(); l];
    let mut f = vec![Complex64::zero(); l];
    let density: Vec<f64> = (0..g.len())
        .map(|i| {
            field.point(i, &mut z);
            nl.forcing(&z, &mut f);
            let s: f64 = (0..l).map(|k| masses[k] * (f[k] * z[k].conj()).im).sum();
            nodes[i] * nodes[i] * s
        })
        .collect();
    g.integrate(&density)
}

/// One recorded instant for the virial identity.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VirialSample {
    pub t: f64,
    pub v: f64,
    pub w: f64,
    pub k: f64,
    pub l: f64,
}

pub fn virial_sample<N: Nonlinearity + ?Sized>(
    t: f64,
    field: &RadialField,
    params: &SystemParams,
    nl: &N,
) -> VirialSample {
    let parts = Parts::of(field, params, nl);
    VirialSample {
        t,
        v: virial_v(field, params),
        w: resonance_moment(field, params, nl),
        k: parts.kinetic,
        l: parts.mass_term(params),
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VirialReport {
    pub n: usize,
    pub e0: f64,
    /// `max |V'' − (2nE₀ − 2nL + 2(4−n)K)| / scale`
    pub uncorrected_mismatch: f64,
    /// Same with `−4W'` added to the prediction.
    pub corrected_mismatch: f64,
    /// `max |4W'| / scale`: the size of the non-resonant term.
    pub correction_size: f64,
    /// `max |prediction|` over interior samples.
    pub scale: f64,
    pub samples: usize,
}

/// Compares centred second differences of `V` against the virial identity.
pub fn virial_identity_check(samples: &[VirialSample], e0: f64, n: usize) -> Result<VirialReport> {
    if samples.len() < 3 {
        return Err(Error::InvalidParameter("virial check needs at least three samples".into()));
    }
    let dt = samples[1].t - samples[0].t;
    if !(dt > 0.0) || samples.windows(2).any(|w| ((w[1].t - w[0].t) / dt - 1.0).abs() > 1e-9) {
        return Err(Error::NonUniformSampling);
    }
    let nf = n as f64;
    let mut rows = Vec::with_capacity(samples.len() - 2);
    for i in 1..samples.len() - 1 {
        let (a, b, c) = (&samples[i - 1], &samples[i], &samples[i + 1]);
        let v2 = (c.v - 2.0 * b.v + a.v) / (dt * dt);
        let w1 = (c.w - a.w) / (2.0 * dt);
        let base = 2.0 * nf * e0 - 2.0 * nf * b.l + 2.0 * (4.0 - nf) * b.k;
        rows.push((v2, base, -4.0 * w1));
    }
    let scale = rows.iter().map(|r| (r.1 + r.2).abs().max(r.1.abs())).fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let max = |f: &dyn Fn(&(f64, f64, f64)) -> f64| rows.iter().map(f).fold(0.0, f64::max) / scale;
    Ok(VirialReport {
        n,
        e0,
        uncorrected_mismatch: max(&|r| (r.0 - r.1).abs()),
        corrected_mismatch: max(&|r| (r.0 - r.1 - r.2).abs()),
        correction_size: max(&|r| r.2.abs()),
        scale,
        samples: samples.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Branch {
    Below,
    Above,
}

/// Barrier `γ = (bq)^{−1/(q−1)}` for `f(r) = a − r + b r^q`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bootstrap {
    pub a: f64,
    pub b: f64,
    pub q: f64,
    pub gamma: f64,
    /// `(1 − 1/q) γ`
    pub a_bound: f64,
    pub admissible: bool,
}

impl Bootstrap {
    pub fn new(a: f64, b: f64, q: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::InvalidParameter("bootstrap needs b > 0".into()));
        }
        if !(q > 1.0) {
            return Err(Error::InvalidParameter("bootstrap needs q > 1".into()));
        }
        let gamma = (b * q).powf(-1.0 / (q - 1.0));
        let a_bound = (1.0 - 1.0 / q) * gamma;
        Ok(Bootstrap { a, b, q, gamma, a_bound, admissible: a < a_bound })
    }

    /// `f(r) = a − r + b r^q`
    pub fn f(&self, r: f64) -> f64 {
        self.a - r + self.b * r.powf(self.q)
    }

    pub fn branch(&self, g0: f64) -> Result<Branch> {
        if g0 < self.gamma {
            Ok(Branch::Below)
        } else if g0 > self.gamma {
            Ok(Branch::Above)
        } else {
            Err(Error::BoundaryUndecided)
        }
    }

    /// Checks a sampled trajectory `G(t_i) ≥ 0`: whether `f∘G ≥ 0` holds at
    /// every sample (within `tol`) and whether every sample stays on the
    /// side of `γ` where it started.
    pub fn check_trajectory(&self, g: &[f64], tol: f64) -> Result<TrajectoryCheck> {
        let first = *g.first().ok_or(Error::InvalidParameter("empty trajectory".into()))?;
        let branch = self.branch(first)?;
        let hypothesis_holds = g.iter().all(|&x| x >= 0.0 && self.f(x) >= -tol);
        let stayed = g.iter().all(|&x| match branch {
            Branch::Below => x < self.gamma,
            Branch::Above => x > self.gamma,
        });
        Ok(TrajectoryCheck { branch, hypothesis_holds, stayed })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrajectoryCheck {
    pub branch: Branch,
    pub hypothesis_holds: bool,
    pub stayed: bool,
}

/// `γ = (bq)^{−N}` exactly when `1/(q−1) = N` is a positive integer.
pub fn bootstrap_gamma_exact(b: Rational, q: Rational) -> Option<Rational> {
    if !b.is_positive() || q <= Rational::one() {
        return None;
    }
    let inv = (q - Rational::one()).recip();
    if !inv.is_integer() {
        return None;
    }
    let e = inv.to_integer().to_i32()?;
    let base = (b * q).recip();
    let mut acc = Rational::one();
    for _ in 0..e {
        acc = checked_mul(acc, base)?;
    }
    Some(acc)
}

fn checked_mul(a: Rational, b: Rational) -> Option<Rational> {
    let num = a.numer().checked_mul(*b.numer())?;
    let den = a.denom().checked_mul(*b.denom())?;
    Some(Rational::new(num, den))
}

/// Ground-state reference values.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Thresholds {
    pub n: usize,
    /// `Q(ψ)`
    pub q_star: f64,
    /// `K(ψ)`
    pub k_star: f64,
    /// `𝓔(ψ) = K(ψ) − 2P(ψ)`
    pub e_star: f64,
    pub qe_star: f64,
    pub qk_star: f64,
}

impl Thresholds {
    pub fn from_ground_state<N: Nonlinearity + ?Sized>(
        profile: &RadialField,
        params: &SystemParams,
        nl: &N,
    ) -> Result<Self> {
        let sigma = nl.sigma().ok_or(Error::MissingSigma)?;
        let parts = Parts::of(profile, params, nl);
        let q = parts.charge(params, sigma);
        let k = parts.kinetic;
        let e = parts.ecrit();
        let t = Thresholds { n: profile.grid().dim(), q_star: q, k_star: k, e_star: e, qe_star: q * e, qk_star: q * k };
        if !(q > 0.0 && k > 0.0 && e > 0.0) {
            return Err(Error::NonPositive { quantity: "ground-state threshold", value: q.min(k).min(e) });
        }
        Ok(t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Verdict {
    BlowupCriteria,
    GlobalCriteria,
    Indeterminate,
}

/// One inequality `lhs (relation) rhs` with its truth value.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Witness {
    pub name: String,
    pub lhs: f64,
    pub relation: String,
    pub rhs: f64,
    pub holds: bool,
}

impl Witness {
    fn less(name: &str, lhs: f64, rhs: f64) -> Self {
        Witness { name: name.into(), lhs, relation: "<".into(), rhs, holds: lhs < rhs }
    }

    fn greater(name: &str, lhs: f64, rhs: f64) -> Self {
        Witness { name: name.into(), lhs, relation: ">".into(), rhs, holds: lhs > rhs }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Classification {
    pub n: usize,
    pub verdict: Verdict,
    pub thresholds: Thresholds,
    pub witnesses: Vec<Witness>,
}

/// A priori verdict for initial data `u0` against ground-state thresholds.
pub fn classify<N: Nonlinearity + ?Sized>(
    u0: &RadialField,
    params: &SystemParams,
    nl: &N,
    thresholds: &Thresholds,
) -> Result<Classification> {
    let n = u0.grid().dim();
    if !(4..=6).contains(&n) {
        return Err(Error::DimensionOutOfRange(n));
    }
    if thresholds.n != n {
        return Err(Error::InvalidParameter(format!(
            "thresholds computed for n = {}, data lives in n = {n}",
            thresholds.n
        )));
    }
    let sigma = nl.sigma().ok_or(Error::MissingSigma)?;
    let parts = Parts::of(u0, params, nl);
    let q = parts.charge(params, sigma);
    let e = parts.energy(params);
    let k = parts.kinetic;
    let th = thresholds;
    let (verdict, witnesses) = match n {
        4 => {
            let w = Witness::less("Q(u0) < Q(psi)", q, th.q_star);
            (if w.holds { Verdict::GlobalCriteria } else { Verdict::Indeterminate }, vec![w])
        }
        5 => {
            let qe = Witness::less("Q(u0)E(u0) < Q(psi)Ecrit(psi)", q * e, th.qe_star);
            let qk_up = Witness::greater("Q(u0)K(u0) > Q(psi)K(psi)", q * k, th.qk_star);
            let qk_down = Witness::less("Q(u0)K(u0) < Q(psi)K(psi)", q * k, th.qk_star);
            let v = if qe.holds && qk_up.holds {
                Verdict::BlowupCriteria
            } else if qe.holds && qk_down.holds {
                Verdict::GlobalCriteria
            } else {
                Verdict::Indeterminate
            };
            (v, vec![qe, qk_up, qk_down])
        }
        _ => {
            let ew = Witness::less("E(u0) < Ecrit(psi)", e, th.e_star);
            let kw = Witness::greater("K(u0) > K(psi)", k, th.k_star);
            let v = if ew.holds && kw.holds { Verdict::BlowupCriteria } else { Verdict::Indeterminate };
            (v, vec![ew, kw])
        }
    };
    Ok(Classification { n, verdict, thresholds: *th, witnesses })
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PohozaevMonitor {
    pub min: f64,
    pub max: f64,
    /// Every recorded `𝒯_n` was strictly negative.
    pub negative: bool,
    /// `|max 𝒯_n|` when `negative`, zero otherwise.
    pub delta0: f64,
}

/// Sign of `𝒯_n(u(t))` along a run.
pub fn monitor_t(records: &[DiagnosticsRecord]) -> PohozaevMonitor {
    let min = records.iter().map(|r| r.pohozaev).fold(f64::INFINITY, f64::min);
    let max = records.iter().map(|r| r.pohozaev).fold(f64::NEG_INFINITY, f64::max);
    let negative = !records.is_empty() && max < 0.0;
    PohozaevMonitor { min, max, negative, delta0: if negative { -max } else { 0.0 } }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::nonlinearity::poly::rat;

    #[test]
    fn chi_is_admissible() {
        let chi = CutoffChi::new(1.0, 6).unwrap();
        for j in 0..=100_000 {
            let r = 4.0 * j as f64 / 100_000.0;
            assert!(chi.d2(r) <= 2.0 + 1e-10, "{r}");
            assert!(chi.d1(r) >= -1e-10 && chi.d1(r) <= 2.0 * r + 1e-10, "{r}");
            assert!(chi.d1(r) <= CutoffChi::MAX_SLOPE + 1e-10);
        }
        assert!((chi.value(3.0) - 11.0 / 3.0).abs() < 1e-14);
        // C² join: derivatives match across both join points.
        for s in [1.0, 3.0] {
            for d in [CutoffChi::d1, CutoffChi::d2] {
                let e = 1e-9;
                assert!((d(&chi, s - e) - d(&chi, s + e)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn chi_laplacians() {
        for n in 1..=6 {
            let chi = CutoffChi::new(2.0, n).unwrap();
            assert_eq!(chi.laplacian(1.5), 2.0 * n as f64);
            assert_eq!(chi.bilaplacian(1.5), 0.0);
            // Finite-difference check of the analytic derivatives on the join.
            for r in [2.5, 3.7, 5.1] {
                let e = 1e-5;
                let fd = (chi.laplacian(r + e) - chi.laplacian(r - e)) / (2.0 * e);
                assert!((fd - chi.laplacian_d1(r)).abs() < 1e-6, "{n} {r}");
                let lap = |x: f64| {
                    chi.laplacian_d1(x) * x.powi(n as i32 - 1)
                };
                let fd2 = (lap(r + e) - lap(r - e)) / (2.0 * e) / r.powi(n as i32 - 1);
                assert!((fd2 - chi.bilaplacian(r)).abs() < 1e-5, "{n} {r}");
            }
        }
    }

    #[test]
    fn bilaplacian_scales_like_inverse_square() {
        let sup = |chi: &CutoffChi| {
            (0..10_000)
                .map(|j| chi.bilaplacian(chi.radius * (1.0 + 2.0 * (j as f64 + 0.5) / 10_000.0)).abs())
                .fold(0.0, f64::max)
        };
        let a = sup(&CutoffChi::new(1.0, 5).unwrap());
        let b = sup(&CutoffChi::new(10.0, 5).unwrap());
        assert!((a / b / 100.0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_moment() {
        let grid = RadialGrid::new(3, 4096, 12.0).unwrap();
        let params = SystemParams::new(3, vec![1.0], vec![1.0], vec![0.0], 1.0).unwrap();
        let u = RadialField::from_real_fn(&grid, 1, |_, r| (-r * r).exp());
        let exact = 0.375 * core::f64::consts::PI.powf(1.5) / 2f64.sqrt();
        assert!((virial_v(&u, &params) / exact - 1.0).abs() < 1e-6);
        assert!(virial_v(&RadialField::zeros(&grid, 1), &params) == 0.0);
    }

    #[test]
    fn bootstrap_examples() {
        let b = Bootstrap::new(0.0, 2.0, 1.25).unwrap();
        assert!((b.gamma - 0.0256).abs() < 1e-15);
        assert!((b.a_bound - 0.00512).abs() < 1e-15);
        assert!(b.f(b.gamma) < 0.0);
        assert_eq!(bootstrap_gamma_exact(rat(2, 1), rat(5, 4)), Some(rat(16, 625)));
        assert_eq!(bootstrap_gamma_exact(rat(2, 1), rat(3, 2)), Some(rat(1, 9)));
        assert_eq!(bootstrap_gamma_exact(rat(2, 1), rat(5, 3)), None);
        assert!(matches!(b.branch(b.gamma), Err(Error::BoundaryUndecided)));
    }

    fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n).map(|j| f(a + j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 }).sum();
        (f(a) + f(b) + inner) * h / 3.0
    }

    fn scalar(n: usize) -> SystemParams {
        SystemParams::new(n, vec![1.0], vec![1.0], vec![0.0], 1.0).unwrap()
    }

    #[test]
    fn morawetz_against_dense_quadrature() {
        // The integrand 2r e^{−2r²} is odd at the origin, so the cell-centred
        // quadrature is only second order here; hence the fine grid.
        let grid = RadialGrid::new(1, 65536, 8.0).unwrap();
        let u = RadialField::from_fn(&grid, 1, |_, r| Complex64::from_polar((-r * r).exp(), r));
        let got = morawetz_r(&u, &scalar(1), &Weight::Square);
        // Im(∂_r u ū) = |u|², and s_1 = 2.
        let oracle = 2.0 * 2.0 * simpson(0.0, 8.0, 200_000, |r| 2.0 * r * (-2.0 * r * r).exp());
        assert!((got - oracle).abs() < 1e-8 * oracle, "{got} {oracle}");
        let real = RadialField::from_real_fn(&grid, 1, |_, r| (-r * r).exp());
        assert_eq!(morawetz_r(&real, &scalar(1), &Weight::Square), 0.0);
    }

    fn bump(r: f64, support: f64) -> f64 {
        let s = r / support;
        if s < 1.0 {
            (1.0 - s * s).powi(4)
        } else {
            0.0
        }
    }

    #[test]
    fn rprime_interior_is_pohozaev() {
        let (nl, params) = crate::nonlinearity::AnyNonlinearity::builtin("kappa", 0.5).unwrap();
        for n in [4, 5, 6] {
            let params = params.clone().with_dimension(n).unwrap();
            let grid = RadialGrid::new(n, 2048, 8.0).unwrap();
            let u = RadialField::from_fn(&grid, 2, |k, r| {
                Complex64::from_polar(bump(r, 2.0) * (1.0 + k as f64), 0.3 * r * (k as f64 + 1.0))
            });
            let t = crate::functionals::pohozaev_t(&u, &params, &nl);
            let chi = CutoffChi::new(2.5, n).unwrap();
            let rp = rprime_radial(&u, &params, &nl, &chi);
            assert!((rp - 8.0 * t).abs() <= 1e-10 * (8.0 * t).abs(), "{n} {rp} {t}");
            assert_eq!(rprime_radial(&RadialField::zeros(&grid, 2), &params, &nl, &chi), 0.0);
        }
    }

    #[test]
    fn rprime_large_radius_limit() {
        let (nl, params) = crate::nonlinearity::AnyNonlinearity::builtin("kappa", 1.0).unwrap();
        let params = params.with_dimension(5).unwrap();
        let grid = RadialGrid::new(5, 2048, 12.0).unwrap();
        let u = RadialField::from_fn(&grid, 2, |k, r| Complex64::from_polar(bump(r, 1.5), 0.5 * k as f64 * r));
        let t = crate::functionals::pohozaev_t(&u, &params, &nl);
        for radius in [1.0, 0.7] {
            let near = rprime_radial(&u, &params, &nl, &CutoffChi::new(radius, 5).unwrap());
            assert!((near - 8.0 * t).abs() > 1e-3 * t.abs());
        }
        let far = rprime_radial(&u, &params, &nl, &CutoffChi::new(6.0, 5).unwrap());
        assert!((far - 8.0 * t).abs() <= 1e-6 * (8.0 * t).abs());
    }

    #[test]
    fn morawetz_bound_on_random_fields() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let (nl, params) = crate::nonlinearity::AnyNonlinearity::builtin("thg", 0.0).unwrap();
        let sigma = nl.sigma().unwrap().to_vec();
        let params = params.with_dimension(6).unwrap();
        let grid = RadialGrid::new(6, 1024, 20.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = morawetz_bound_constant(&params, &sigma);
        for _ in 0..50 {
            let coeffs: Vec<(f64, f64, f64, f64)> =
                (0..3).map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(0.2..3.0), rng.gen_range(-4.0..4.0), rng.gen_range(0.0..6.0))).collect();
            let u = RadialField::from_fn(&grid, 3, |k, r| {
                let (a, w, p, c0) = coeffs[k];
                Complex64::from_polar(a * (-(r - c0).powi(2) / w).exp(), p * r)
            });
            let parts = Parts::of(&u, &params, &nl);
            let q = parts.charge(&params, &sigma);
            for radius in [0.5, 2.0, 5.0] {
                let chi = CutoffChi::new(radius, 6).unwrap();
                let rr = morawetz_r(&u, &params, &Weight::Cutoff(chi));
                assert!(rr.abs() <= c * radius * (q * parts.kinetic).sqrt());
            }
        }
    }

    #[test]
    fn linear_flow_virial() {
        use crate::evolution::{evolve_observed, EvolveConfig};
        use crate::nonlinearity::ZeroNonlinearity;
        let nl = ZeroNonlinearity::new(1);
        for n in [2, 5] {
            let params = scalar(n);
            let grid = RadialGrid::new(n, 2048, 30.0).unwrap();
            let u0 = RadialField::from_fn(&grid, 1, |_, r| Complex64::from_polar((-r * r / 2.0).exp(), 0.2 * r * r));
            let k0 = crate::functionals::kinetic(&u0, &params);
            let cfg = EvolveConfig { dt: 1e-3, t_final: 0.3, record_every: 20, ..Default::default() };
            let mut samples = Vec::new();
            evolve_observed(&u0, &params, &nl, &cfg, |rec, f| samples.push(virial_sample(rec.t, f, &params, &nl))).unwrap();
            let rep = virial_identity_check(&samples, k0, n).unwrap();
            assert!((rep.scale / (8.0 * k0) - 1.0).abs() < 1e-6);
            assert!(rep.uncorrected_mismatch < 1e-3, "{rep:?}");
        }
    }

    #[test]
    fn non_uniform_sampling_rejected() {
        let s = |t| VirialSample { t, v: 0.0, w: 0.0, k: 0.0, l: 0.0 };
        assert!(matches!(virial_identity_check(&[s(0.0), s(0.1), s(0.3)], 1.0, 4), Err(Error::NonUniformSampling)));
    }
}
