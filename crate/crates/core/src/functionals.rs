//! Conserved quantities and variational functionals on radial fields.
//!
//! With `K = Σ γ_k ‖∇u_k‖²`, `P = Re ∫ F(u)`, `L = Σ β_k ‖u_k‖²`:
//!
//! ```text
//! Q  = Σ α_k σ_k / 2 ‖u_k‖²          E = K + L − 2P
//! 𝒬  = Σ (σ_k α_k ω / 2 + β_k) ‖u_k‖²    I = ½(K + 𝒬) − P
//! 𝒯_n = K − (n/2) P                 J = K^{3/2} / P        𝓔 = K − 2P
//! ```

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::RadialField;
use crate::nonlinearity::{Nonlinearity, SystemParams};
use num_complex::Complex64;

/// Values of every functional at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub q: f64,
    pub e: f64,
    pub k: f64,
    pub p: f64,
    pub l: f64,
    pub qfunc: f64,
    pub i: f64,
    pub pohozaev: f64,
    /// Present only when `P > 0`.
    pub j: Option<f64>,
    pub ecrit: f64,
}

impl DiagnosticsRecord {
    pub const CSV_HEADER: &'static str = "t,Q,E,K,P,L,Qfunc,I,T,J,Ecrit";
}

/// `‖u_k‖²` for every component.
pub fn component_norms(field: &RadialField) -> Vec<f64> {
    let g = field.grid();
    field.data().iter().map(|c| g.norm_sq(c)).collect()
}

/// `K = Σ γ_k ‖∇u_k‖²`.
pub fn kinetic(field: &RadialField, params: &SystemParams) -> f64 {
    let g = field.grid();
    field.data().iter().zip(&params.gamma).map(|(c, gk)| gk * g.grad_sq(c)).sum()
}

/// `P = Re ∫ F(u) dx`.
pub fn potential<N: Nonlinearity + ?Sized>(field: &RadialField, nl: &N) -> f64 {
    let l = field.components();
    let mut z = vec![Complex64::new(0.0, 0.0); l];
    let g = field.grid();
    let values: Vec<f64> = (0..g.len())
        .map(|i| {
            field.point(i, &mut z);
            nl.potential(&z).re
        })
        .collect();
    g.integrate(&values)
}

/// `L = Σ β_k ‖u_k‖²`.
pub fn mass_term(field: &RadialField, params: &SystemParams) -> f64 {
    component_norms(field).iter().zip(&params.beta).map(|(n, b)| b * n).sum()
}

fn require_sigma<N: Nonlinearity + ?Sized>(nl: &N) -> Result<&[f64]> {
    nl.sigma().ok_or(Error::MissingSigma)
}

/// `Q = Σ α_k σ_k / 2 ‖u_k‖²`.
pub fn charge(field: &RadialField, params: &SystemParams, sigma: &[f64]) -> f64 {
    component_norms(field)
        .iter()
        .enumerate()
        .map(|(k, n)| params.alpha[k] * sigma[k] / 2.0 * n)
        .sum()
}

/// `E = K + L − 2P`.
pub fn energy<N: Nonlinearity + ?Sized>(field: &RadialField, params: &SystemParams, nl: &N) -> f64 {
    kinetic(field, params) + mass_term(field, params) - 2.0 * potential(field, nl)
}

/// `𝒬 = Σ (σ_k α_k ω / 2 + β_k) ‖u_k‖²`.
pub fn q_functional(field: &RadialField, params: &SystemParams, sigma: &[f64]) -> f64 {
    let c = params.shifts(sigma);
    component_norms(field).iter().zip(&c).map(|(n, c)| c * n).sum()
}

/// Raw ingredients shared by every functional.
#[derive(Clone, Debug, PartialEq)]
pub struct Parts {
    pub norms: Vec<f64>,
    pub kinetic: f64,
    pub potential: f64,
}

impl Parts {
    pub fn of<N: Nonlinearity + ?Sized>(field: &RadialField, params: &SystemParams, nl: &N) -> Self {
        Parts {
            norms: component_norms(field),
            kinetic: kinetic(field, params),
            potential: potential(field, nl),
        }
    }

    pub fn mass_term(&self, params: &SystemParams) -> f64 {
        self.norms.iter().zip(&params.beta).map(|(n, b)| b * n).sum()
    }

    pub fn charge(&self, params: &SystemParams, sigma: &[f64]) -> f64 {
        (0..self.norms.len()).map(|k| params.alpha[k] * sigma[k] / 2.0 * self.norms[k]).sum()
    }

    pub fn q_functional(&self, params: &SystemParams, sigma: &[f64]) -> f64 {
        let c = params.shifts(sigma);
        self.norms.iter().zip(&c).map(|(n, c)| c * n).sum()
    }

    pub fn energy(&self, params: &SystemParams) -> f64 {
        self.kinetic + self.mass_term(params) - 2.0 * self.potential
    }

    pub fn action(&self, params: &SystemParams, sigma: &[f64]) -> f64 {
        0.5 * (self.kinetic + self.q_functional(params, sigma)) - self.potential
    }

    pub fn pohozaev(&self, n: usize) -> f64 {
        self.kinetic - n as f64 / 2.0 * self.potential
    }

    pub fn ecrit(&self) -> f64 {
        self.kinetic - 2.0 * self.potential
    }

    pub fn weinstein(&self) -> Result<f64> {
        if self.potential > 0.0 {
            Ok(self.kinetic.powf(1.5) / self.potential)
        } else {
            Err(Error::OutsideDomain { potential: self.potential })
        }
    }

    /// `P / (𝒬^{(6−n)/4} K^{n/4})`.
    pub fn gn_quotient(&self, params: &SystemParams, sigma: &[f64], n: usize) -> Result<f64> {
        if self.potential <= 0.0 {
            return Err(Error::OutsideDomain { potential: self.potential });
        }
        let q = self.q_functional(params, sigma);
        let nf = n as f64;
        let qpow = if n == 6 { 1.0 } else { q.powf((6.0 - nf) / 4.0) };
        Ok(self.potential / (qpow * self.kinetic.powf(nf / 4.0)))
    }
}

/// `I = ½(K + 𝒬) − P`.
pub fn action<N: Nonlinearity + ?Sized>(field: &RadialField, params: &SystemParams, nl: &N) -> Result<f64> {
    let sigma = require_sigma(nl)?;
    Ok(Parts::of(field, params, nl).action(params, sigma))
}

/// `𝒯_n = K − (n/2) P` with `n` the grid dimension.
pub fn pohozaev_t<N: Nonlinearity + ?Sized>(field: &RadialField, params: &SystemParams, nl: &N) -> f64 {
    Parts::of(field, params, nl).pohozaev(field.grid().dim())
}

/// `J = K^{3/2} / P`; requires `P > 0`.
pub fn weinstein_j<N: Nonlinearity + ?Sized>(field: &RadialField, params: &SystemParams, nl: &N) -> Result<f64> {
    Parts::of(field, params, nl).weinstein()
}

/// `P / (𝒬^{(6−n)/4} K^{n/4})`; requires `P > 0`.
pub fn gn_quotient<N: Nonlinearity + ?Sized>(field: &RadialField, params: &SystemParams, nl: &N) -> Result<f64> {
    let sigma = require_sigma(nl)?;
    Parts::of(field, params, nl).gn_quotient(params, sigma, field.grid().dim())
}

/// Sharp Gagliardo–Nirenberg constant from ground-state values:
/// `C_n = 2 (6−n)^{(n−4)/4} n^{−n/4} 𝒬^{−1/2}` for `n ≤ 5` and
/// `C_6 = 3^{−3/2} 𝓔^{−1/2}`; `value` is `𝒬(ψ)` or `𝓔(ψ)` accordingly.
pub fn sharp_constant(n: usize, value: f64) -> Result<f64> {
    if !(1..=6).contains(&n) {
        return Err(Error::DimensionOutOfRange(n));
    }
    if !(value > 0.0) {
        let quantity = if n == 6 { "critical energy" } else { "Q functional" };
        return Err(Error::NonPositive { quantity, value });
    }
    let nf = n as f64;
    Ok(if n == 6 {
        3f64.powf(-1.5) / value.sqrt()
    } else {
        2.0 * (6.0 - nf).powf((nf - 4.0) / 4.0) * nf.powf(-nf / 4.0) / value.sqrt()
    })
}

/// Every functional at time `t`.
pub fn diagnostics<N: Nonlinearity + ?Sized>(
    t: f64,
    field: &RadialField,
    params: &SystemParams,
    nl: &N,
) -> Result<DiagnosticsRecord> {
    let sigma = require_sigma(nl)?;
    Ok(record_from_parts(t, &Parts::of(field, params, nl), params, sigma, field.grid().dim()))
}

pub fn record_from_parts(
    t: f64,
    parts: &Parts,
    params: &SystemParams,
    sigma: &[f64],
    n: usize,
) -> DiagnosticsRecord {
    let qfunc = parts.q_functional(params, sigma);
    DiagnosticsRecord {
        t,
        q: parts.charge(params, sigma),
        e: parts.energy(params),
        k: parts.kinetic,
        p: parts.potential,
        l: parts.mass_term(params),
        qfunc,
        i: 0.5 * (parts.kinetic + qfunc) - parts.potential,
        pohozaev: parts.pohozaev(n),
        j: parts.weinstein().ok(),
        ecrit: parts.ecrit(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::nonlinearity::{scalar_cubic_params, ScalarCubic};

    fn sech2_half(r: f64) -> f64 {
        let c = (r / 2.0).cosh();
        0.5 / (c * c)
    }

    fn oracle_field() -> (RadialField, SystemParams) {
        let g = RadialGrid::new(1, 8192, 60.0).unwrap();
        (RadialField::from_real_fn(&g, 1, |_, r| sech2_half(r)), scalar_cubic_params(1).unwrap())
    }

    #[test]
    fn sech_integrals() {
        let (u, p) = oracle_field();
        let parts = Parts::of(&u, &p, &ScalarCubic);
        assert!((parts.norms[0] - 2.0 / 3.0).abs() < 1e-6);
        assert!((parts.kinetic - 2.0 / 15.0).abs() < 1e-6);
        assert!((parts.potential - 4.0 / 15.0).abs() < 1e-6);
        let rec = diagnostics(0.0, &u, &p, &ScalarCubic).unwrap();
        assert!((rec.q - 1.0 / 3.0).abs() < 1e-6);
        assert!((rec.e + 0.4).abs() < 1e-6);
        assert!((rec.i - 2.0 / 15.0).abs() < 1e-6);
        assert!((rec.qfunc - 5.0 * rec.i).abs() < 1e-5);
    }

    #[test]
    fn n1_constant_matches_quotient() {
        let (u, p) = oracle_field();
        let c1 = sharp_constant(1, 2.0 / 3.0).unwrap();
        let exact = 2.0 * 5f64.powf(-0.75) / (2.0f64 / 3.0).sqrt();
        assert!((c1 - exact).abs() < 1e-15);
        let qq = gn_quotient(&u, &p, &ScalarCubic).unwrap();
        assert!((qq / c1 - 1.0).abs() < 1e-5, "{qq} {c1}");
    }

    #[test]
    fn homogeneity() {
        let (u, p) = oracle_field();
        let a = Parts::of(&u, &p, &ScalarCubic);
        let b = Parts::of(&u.scaled(1.7), &p, &ScalarCubic);
        assert!((b.kinetic / a.kinetic - 1.7f64.powi(2)).abs() < 1e-12);
        assert!((b.potential / a.potential - 1.7f64.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn zero_field_and_domain() {
        let (u, p) = oracle_field();
        let z = u.scaled(0.0);
        let rec = diagnostics(0.0, &z, &p, &ScalarCubic).unwrap();
        assert_eq!((rec.q, rec.e, rec.i, rec.pohozaev), (0.0, 0.0, 0.0, 0.0));
        assert!(rec.j.is_none());
        assert!(matches!(weinstein_j(&z, &p, &ScalarCubic), Err(Error::OutsideDomain { .. })));
        assert!(sharp_constant(6, -1.0).is_err());
    }
}
