//! Charge weights σ and the mass-resonance condition, both decided by exact
//! monomial cancellation in `Im Σ w_k f_k(z) z̄_k`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use super::derived::DerivedNonlinearity;
use super::params::SystemParams;
use super::poly::{rational_from_f64, Coeff, InteractionPoly, Rational};
use crate::linalg::{nullity, positive_kernel_vector};

/// Outcome of the σ search.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaSolution {
    /// Positive solution normalized to `min σ_k = 1`.
    pub sigma: Option<Vec<Rational>>,
    /// Dimension of the full (sign-unconstrained) solution space.
    pub kernel_dim: usize,
    /// False when some coefficient had no exact rational form.
    pub exact: bool,
}

/// `Im Σ_k w_k f_k(z) z̄_k` as a polynomial.
pub fn im_weighted_sum(fk: &DerivedNonlinearity, weights: &[Coeff]) -> InteractionPoly {
    let l = fk.polys().len();
    let mut acc = InteractionPoly::zero(l);
    for (k, (p, w)) in fk.polys().iter().zip(weights).enumerate() {
        acc = acc.add(&p.times_conj_var(k).scale(w));
    }
    acc.imag_part()
}

/// Exact weights where representable, approximate otherwise.
pub fn weights_from_f64(w: &[f64]) -> Vec<Coeff> {
    w.iter().map(|&x| Coeff::from_f64(x)).collect()
}

/// Finds positive σ with `Im Σ σ_k f_k z̄_k ≡ 0`.
///
/// Each monomial of `Im(f_k z̄_k)` contributes two real linear constraints
/// (real and imaginary part of its coefficient). The solution space
/// dimension is reported alongside one positive representative.
pub fn solve_sigma(fk: &DerivedNonlinearity) -> SigmaSolution {
    let l = fk.polys().len();
    let mut exact = true;
    // Monomial exponents -> (Re, Im) of its coefficient in each Im(f_k z̄_k).
    type Rows = BTreeMap<(Vec<u32>, Vec<u32>), Vec<(Rational, Rational)>>;
    let mut rows: Rows = BTreeMap::new();
    for (k, p) in fk.polys().iter().enumerate() {
        let g = p.times_conj_var(k).imag_part();
        for m in g.monomials() {
            let parts = m.coeff.exact_parts().or_else(|| {
                let z = m.coeff.to_complex();
                exact = false;
                rational_from_f64(z.re).zip(rational_from_f64(z.im))
            });
            let Some(parts) = parts else {
                return SigmaSolution { sigma: None, kernel_dim: 0, exact: false };
            };
            let entry = rows
                .entry((m.holo.clone(), m.anti.clone()))
                .or_insert_with(|| vec![(Rational::zero(), Rational::zero()); l]);
            entry[k] = parts;
        }
    }
    let mut a: Vec<Vec<Rational>> = Vec::with_capacity(2 * rows.len());
    for r in rows.values() {
        a.push(r.iter().map(|c| c.0).collect());
        a.push(r.iter().map(|c| c.1).collect());
    }
    let kernel_dim = nullity(&a, l);
    let sigma = if kernel_dim == 0 {
        None
    } else {
        positive_kernel_vector(&a, l).map(|x| {
            let min = x.iter().copied().fold(x[0], |a, b| if b < a { b } else { a });
            x.into_iter().map(|v| v / min).collect()
        })
    };
    SigmaSolution { sigma, kernel_dim, exact }
}

/// Mass-resonance report: `Im Σ m_k f_k z̄_k` with `m_k = α_k/(2γ_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MassResonance {
    pub holds: bool,
    pub residual: InteractionPoly,
}

pub fn check_mass_resonance(fk: &DerivedNonlinearity, params: &SystemParams) -> MassResonance {
    let masses: Vec<Coeff> = params
        .alpha
        .iter()
        .zip(&params.gamma)
        .map(|(&a, &g)| match (rational_from_f64(a), rational_from_f64(g)) {
            (Some(a), Some(g)) if !g.is_zero() => {
                Coeff::real(a / (g * Rational::from_integer(2)))
            }
            _ => Coeff::from_f64(a / (2.0 * g)),
        })
        .collect();
    let residual = im_weighted_sum(fk, &masses);
    let scale = fk.source().max_coeff_norm()
        * params.masses().iter().fold(0.0, |a: f64, &b| a.max(b));
    MassResonance { holds: residual.vanishes(scale, 1e-12), residual }
}
