use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::derived::{DerivedNonlinearity, Nonlinearity, ScalarCubic};
use super::params::SystemParams;
use super::parse::parse_interaction;
use super::poly::InteractionPoly;
use crate::error::{Error, Result};

/// Interactions shipped with the crate.
pub const BUILTIN_NAMES: [&str; 4] = ["shg3", "thg", "kappa", "scalar-cubic"];

/// Polynomial built-in systems in dimension 3 with `ω = 1`, `β = 0`.
///
/// - `shg3`: `F = ½ z̄₁(z₂² + z₃²)`, `α = (2, 1, 1)`, `γ = (1, 1, 1)`
/// - `thg`: `F = ½ z₁² z̄₂ + z₁ z₂ z̄₃`, `α = (1, 2, 3)`, `γ = (1, 1, 1)`
/// - `kappa`: `F = z̄₁² z₂`, `α = (1, 1)`, `γ = (1, κ)`
pub fn builtin(name: &str, kappa: f64) -> Result<(InteractionPoly, SystemParams)> {
    let (text, l, alpha, gamma): (&str, usize, Vec<f64>, Vec<f64>) = match name {
        "shg3" => ("(1/2)*conj(z1)*(z2^2 + z3^2)", 3, vec![2.0, 1.0, 1.0], vec![1.0; 3]),
        "thg" => ("(1/2)*z1^2*conj(z2) + z1*z2*conj(z3)", 3, vec![1.0, 2.0, 3.0], vec![1.0; 3]),
        "kappa" => {
            if !(kappa > 0.0 && kappa.is_finite()) {
                return Err(Error::InvalidParameter("kappa must be positive".into()));
            }
            ("conj(z1)^2*z2", 2, vec![1.0, 1.0], vec![1.0, kappa])
        }
        other => return Err(Error::UnknownBuiltin(other.to_string())),
    };
    let f = parse_interaction(text, l)?;
    let params = SystemParams::new(3, alpha, gamma, vec![0.0; l], 1.0)?;
    Ok((f, params))
}

/// Parameters for the scalar oracle `F = |z|³`: `α = γ = 1`, `β = 0`, `ω = 2`,
/// so that the stationary equation reads `−ψ'' + ψ = 3ψ²` for `n = 1`.
pub fn scalar_cubic_params(n: usize) -> Result<SystemParams> {
    SystemParams::new(n, vec![1.0], vec![1.0], vec![0.0], 2.0)
}

/// Either a polynomial interaction or the hard-coded scalar cubic.
#[derive(Clone, Debug)]
pub enum AnyNonlinearity {
    Polynomial(DerivedNonlinearity),
    ScalarCubic(ScalarCubic),
}

impl AnyNonlinearity {
    /// Loads a built-in system by name, with σ attached.
    pub fn builtin(name: &str, kappa: f64) -> Result<(Self, SystemParams)> {
        if name == "scalar-cubic" {
            return Ok((AnyNonlinearity::ScalarCubic(ScalarCubic), scalar_cubic_params(1)?));
        }
        let (f, params) = builtin(name, kappa)?;
        let (fk, _) = DerivedNonlinearity::from_interaction(&f);
        Ok((AnyNonlinearity::Polynomial(fk), params))
    }

    pub fn as_polynomial(&self) -> Option<&DerivedNonlinearity> {
        match self {
            AnyNonlinearity::Polynomial(p) => Some(p),
            AnyNonlinearity::ScalarCubic(_) => None,
        }
    }
}

impl Nonlinearity for AnyNonlinearity {
    fn components(&self) -> usize {
        match self {
            AnyNonlinearity::Polynomial(p) => p.components(),
            AnyNonlinearity::ScalarCubic(s) => s.components(),
        }
    }

    fn potential(&self, z: &[Complex64]) -> Complex64 {
        match self {
            AnyNonlinearity::Polynomial(p) => p.potential(z),
            AnyNonlinearity::ScalarCubic(s) => s.potential(z),
        }
    }

    fn forcing(&self, z: &[Complex64], out: &mut [Complex64]) {
        match self {
            AnyNonlinearity::Polynomial(p) => p.forcing(z, out),
            AnyNonlinearity::ScalarCubic(s) => s.forcing(z, out),
        }
    }

    fn sigma(&self) -> Option<&[f64]> {
        match self {
            AnyNonlinearity::Polynomial(p) => p.sigma(),
            AnyNonlinearity::ScalarCubic(s) => s.sigma(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::sigma::check_mass_resonance;

    #[test]
    fn kappa_resonance_only_at_one_half() {
        for (kappa, expect) in [(0.25, false), (0.5, true), (1.0, false), (2.0, false)] {
            let (f, p) = builtin("kappa", kappa).unwrap();
            let (fk, _) = DerivedNonlinearity::from_interaction(&f);
            assert_eq!(check_mass_resonance(&fk, &p).holds, expect, "kappa = {kappa}");
        }
    }

    #[test]
    fn kappa_one_residual() {
        // (1 − 1/(2κ)) Im(z̄₁² z₂) at κ = 1.
        let (f, p) = builtin("kappa", 1.0).unwrap();
        let (fk, _) = DerivedNonlinearity::from_interaction(&f);
        let r = check_mass_resonance(&fk, &p).residual;
        let expect = f.imag_part().scale(&crate::nonlinearity::poly::Coeff::real(
            crate::nonlinearity::poly::rat(1, 2),
        ));
        assert_eq!(r, expect);
    }

    #[test]
    fn shg_and_thg_resonant() {
        for name in ["shg3", "thg"] {
            let (f, p) = builtin(name, 0.0).unwrap();
            let (fk, _) = DerivedNonlinearity::from_interaction(&f);
            assert!(check_mass_resonance(&fk, &p).holds, "{name}");
        }
    }

    #[test]
    fn unknown_and_bad_kappa() {
        assert!(matches!(builtin("nope", 1.0), Err(Error::UnknownBuiltin(_))));
        assert!(builtin("kappa", 0.0).is_err());
        assert!(builtin("kappa", -1.0).is_err());
    }
}
