use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::poly::{ratio_to_f64, CompiledPoly, InteractionPoly, Rational, Wirtinger};
use super::sigma::{im_weighted_sum, solve_sigma, weights_from_f64, SigmaSolution};
use crate::error::{Error, Result};

/// Pointwise nonlinearity of an `l`-component system.
///
/// `potential` is the interaction `F(z)` and `forcing` writes `f_k(z)` for
/// every component.
pub trait Nonlinearity: Send + Sync {
    fn components(&self) -> usize;

    fn potential(&self, z: &[Complex64]) -> Complex64;

    fn forcing(&self, z: &[Complex64], out: &mut [Complex64]);

    /// Charge weights `σ_k`, when known.
    fn sigma(&self) -> Option<&[f64]>;
}

/// `f_k = ∂F/∂z̄_k + conj(∂F/∂z_k)` for every component, with optional σ.
#[derive(Clone, Debug)]
pub struct DerivedNonlinearity {
    source: InteractionPoly,
    components: Vec<InteractionPoly>,
    sigma: Option<Vec<f64>>,
    sigma_exact: Option<Vec<Rational>>,
    f_eval: CompiledPoly,
    fk_eval: Vec<CompiledPoly>,
}

/// Builds the derived nonlinearities without σ.
pub fn build_fk(f: &InteractionPoly) -> DerivedNonlinearity {
    let l = f.components();
    let components: Vec<InteractionPoly> = (0..l)
        .map(|k| {
            let anti = f.wirtinger(k, Wirtinger::Antiholomorphic).expect("k < l");
            let holo = f.wirtinger(k, Wirtinger::Holomorphic).expect("k < l");
            anti.add(&holo.conj())
        })
        .collect();
    let fk_eval = components.iter().map(InteractionPoly::compile).collect();
    DerivedNonlinearity {
        source: f.clone(),
        f_eval: f.compile(),
        components,
        sigma: None,
        sigma_exact: None,
        fk_eval,
    }
}

impl DerivedNonlinearity {
    /// Derives `f_k` and solves for σ; the result carries σ when one exists.
    pub fn from_interaction(f: &InteractionPoly) -> (Self, SigmaSolution) {
        let fk = build_fk(f);
        let sol = solve_sigma(&fk);
        let fk = match &sol.sigma {
            Some(s) => fk.with_exact_sigma(s.clone()).expect("solver output cancels"),
            None => fk,
        };
        (fk, sol)
    }

    pub fn source(&self) -> &InteractionPoly {
        &self.source
    }

    pub fn polys(&self) -> &[InteractionPoly] {
        &self.components
    }

    pub fn sigma_exact(&self) -> Option<&[Rational]> {
        self.sigma_exact.as_deref()
    }

    /// Attaches an exact σ after re-verifying `Im Σ σ_k f_k z̄_k ≡ 0`.
    pub fn with_exact_sigma(mut self, sigma: Vec<Rational>) -> Result<Self> {
        self.check_sigma_len(sigma.len())?;
        if sigma.iter().any(|s| *s <= Rational::from_integer(0)) {
            return Err(Error::InvalidParameter("sigma must be positive".into()));
        }
        let residual = im_weighted_sum(&self, &weights_exact(&sigma));
        if !residual.is_zero() {
            return Err(Error::InvalidParameter(
                "sigma does not cancel Im sum sigma_k f_k conj(z_k)".into(),
            ));
        }
        self.sigma = Some(sigma.iter().map(ratio_to_f64).collect());
        self.sigma_exact = Some(sigma);
        Ok(self)
    }

    /// Attaches a user-declared σ. Exactly representable values are checked
    /// by exact cancellation, others to `1e-12` relative.
    pub fn with_declared_sigma(mut self, sigma: &[f64]) -> Result<Self> {
        self.check_sigma_len(sigma.len())?;
        if sigma.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidParameter("sigma must be positive".into()));
        }
        let w = weights_from_f64(sigma);
        let residual = im_weighted_sum(&self, &w);
        let scale = self.source.max_coeff_norm() * sigma.iter().fold(0.0_f64, |a, &b| a.max(b));
        if !residual.vanishes(scale, 1e-12) {
            return Err(Error::InvalidParameter(
                "declared sigma does not cancel Im sum sigma_k f_k conj(z_k)".into(),
            ));
        }
        self.sigma_exact = w.iter().map(|c| c.exact_parts().map(|(re, _)| re)).collect();
        self.sigma = Some(sigma.to_vec());
        Ok(self)
    }

    fn check_sigma_len(&self, len: usize) -> Result<()> {
        if len != self.components.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "sigma has {len} entries, expected {}",
                self.components.len()
            )));
        }
        Ok(())
    }

    pub fn eval_fk(&self, z: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.components.len()];
        self.forcing(z, &mut out);
        out
    }

    pub fn eval_f(&self, z: &[Complex64]) -> Complex64 {
        self.f_eval.eval(z)
    }
}

fn weights_exact(sigma: &[Rational]) -> Vec<super::poly::Coeff> {
    sigma.iter().map(|s| super::poly::Coeff::real(*s)).collect()
}

impl Nonlinearity for DerivedNonlinearity {
    fn components(&self) -> usize {
        self.components.len()
    }

    fn potential(&self, z: &[Complex64]) -> Complex64 {
        self.f_eval.eval(z)
    }

    fn forcing(&self, z: &[Complex64], out: &mut [Complex64]) {
        for (o, p) in out.iter_mut().zip(&self.fk_eval) {
            *o = p.eval(z);
        }
    }

    fn sigma(&self) -> Option<&[f64]> {
        self.sigma.as_deref()
    }
}

/// Scalar interaction `F(z) = |z|³` with `f(z) = 3|z|z`; not polynomial,
/// so it bypasses the parser.
#[derive(Clone, Copy, Debug, Default)]
pub struct ScalarCubic;

impl ScalarCubic {
    const SIGMA: [f64; 1] = [1.0];
}

impl Nonlinearity for ScalarCubic {
    fn components(&self) -> usize {
        1
    }

    fn potential(&self, z: &[Complex64]) -> Complex64 {
        let a = z[0].norm_sqr().sqrt();
        Complex64::new(a * a * a, 0.0)
    }

    fn forcing(&self, z: &[Complex64], out: &mut [Complex64]) {
        out[0] = z[0] * (3.0 * z[0].norm_sqr().sqrt());
    }

    fn sigma(&self) -> Option<&[f64]> {
        Some(&Self::SIGMA)
    }
}

/// Zero interaction with `l` components (linear flow).
#[derive(Clone, Debug)]
pub struct ZeroNonlinearity {
    sigma: Vec<f64>,
}

impl ZeroNonlinearity {
    pub fn new(l: usize) -> Self {
        ZeroNonlinearity { sigma: vec![1.0; l] }
    }
}

impl Nonlinearity for ZeroNonlinearity {
    fn components(&self) -> usize {
        self.sigma.len()
    }

    fn potential(&self, _z: &[Complex64]) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    fn forcing(&self, _z: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
    }

    fn sigma(&self) -> Option<&[f64]> {
        Some(&self.sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::parse_interaction;

    #[test]
    fn kappa_forcings() {
        let f = parse_interaction("conj(z1)^2*z2", 2).unwrap();
        let fk = build_fk(&f);
        assert_eq!(fk.polys()[0], parse_interaction("2*conj(z1)*z2", 2).unwrap());
        assert_eq!(fk.polys()[1], parse_interaction("z1^2", 2).unwrap());
    }

    #[test]
    fn shg_forcings() {
        let f = parse_interaction("(1/2)*conj(z1)*(z2^2 + z3^2)", 3).unwrap();
        let fk = build_fk(&f);
        assert_eq!(fk.polys()[0], parse_interaction("(1/2)*(z2^2 + z3^2)", 3).unwrap());
        assert_eq!(fk.polys()[1], parse_interaction("z1*conj(z2)", 3).unwrap());
        assert_eq!(fk.polys()[2], parse_interaction("z1*conj(z3)", 3).unwrap());
    }

    #[test]
    fn zero_interaction() {
        let fk = build_fk(&InteractionPoly::zero(2));
        assert!(fk.polys().iter().all(InteractionPoly::is_zero));
    }

    #[test]
    fn scalar_cubic_matches_real_derivative() {
        let z = [Complex64::new(0.7, 0.0)];
        let mut out = [Complex64::new(0.0, 0.0)];
        ScalarCubic.forcing(&z, &mut out);
        assert!((out[0].re - 3.0 * 0.49).abs() < 1e-15);
    }

    #[test]
    fn declared_sigma_rejected_when_wrong() {
        let f = parse_interaction("conj(z1)^2*z2", 2).unwrap();
        assert!(build_fk(&f).with_declared_sigma(&[1.0, 1.0]).is_err());
        let fk = build_fk(&f).with_declared_sigma(&[0.5, 1.0]).unwrap();
        assert_eq!(fk.sigma(), Some(&[0.5, 1.0][..]));
    }
}
