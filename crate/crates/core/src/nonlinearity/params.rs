use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Coefficients of `i α_k ∂_t u_k + γ_k Δu_k − β_k u_k + f_k(u) = 0` in `ℝ^n`
/// together with the standing-wave frequency `ω`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SystemParams {
    pub n: usize,
    pub l: usize,
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub omega: f64,
}

impl SystemParams {
    pub fn new(n: usize, alpha: Vec<f64>, gamma: Vec<f64>, beta: Vec<f64>, omega: f64) -> Result<Self> {
        let p = SystemParams { n, l: alpha.len(), alpha, gamma, beta, omega };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=6).contains(&self.n) {
            return Err(Error::DimensionOutOfRange(self.n));
        }
        if self.l == 0 {
            return Err(Error::InvalidParameter("at least one component is required".into()));
        }
        for (name, v) in [("alpha", &self.alpha), ("gamma", &self.gamma), ("beta", &self.beta)] {
            if v.len() != self.l {
                return Err(Error::InvalidParameter(format!(
                    "{name} has {} entries, expected {}",
                    v.len(),
                    self.l
                )));
            }
        }
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !self.alpha.iter().copied().all(positive) {
            return Err(Error::InvalidParameter("alpha_k must be positive".into()));
        }
        if !self.gamma.iter().copied().all(positive) {
            return Err(Error::InvalidParameter("gamma_k must be positive".into()));
        }
        if !self.beta.iter().all(|&b| b >= 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter("beta_k must be non-negative".into()));
        }
        if !self.omega.is_finite() {
            return Err(Error::InvalidParameter("omega must be finite".into()));
        }
        Ok(())
    }

    pub fn with_dimension(mut self, n: usize) -> Result<Self> {
        self.n = n;
        self.validate()?;
        Ok(self)
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    /// `m_k = α_k / (2γ_k)`.
    pub fn masses(&self) -> Vec<f64> {
        self.alpha.iter().zip(&self.gamma).map(|(a, g)| a / (2.0 * g)).collect()
    }

    /// Helmholtz shifts `c_k = σ_k α_k ω / 2 + β_k` of the stationary system.
    pub fn shifts(&self, sigma: &[f64]) -> Vec<f64> {
        (0..self.l)
            .map(|k| sigma[k] * self.alpha[k] * self.omega / 2.0 + self.beta[k])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn validation() {
        assert!(SystemParams::new(3, vec![1.0], vec![1.0], vec![0.0], 1.0).is_ok());
        assert!(matches!(
            SystemParams::new(7, vec![1.0], vec![1.0], vec![0.0], 1.0),
            Err(Error::DimensionOutOfRange(7))
        ));
        assert!(SystemParams::new(3, vec![-1.0], vec![1.0], vec![0.0], 1.0).is_err());
        assert!(SystemParams::new(3, vec![1.0], vec![1.0, 2.0], vec![0.0], 1.0).is_err());
        assert!(SystemParams::new(3, vec![1.0], vec![1.0], vec![-0.1], 1.0).is_err());
    }

    #[test]
    fn masses_and_shifts() {
        let p = SystemParams::new(3, vec![1.0, 1.0], vec![1.0, 0.5], vec![0.0, 0.25], 2.0).unwrap();
        assert_eq!(p.masses(), vec![0.5, 1.0]);
        assert_eq!(p.shifts(&[1.0, 2.0]), vec![1.0, 2.25]);
    }
}
