//! Turning a system description into a nonlinearity plus coefficients.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use qnls_core::nonlinearity::{
    builtin, parse_interaction, scalar_cubic_params, AnyNonlinearity, DerivedNonlinearity, InteractionPoly,
    SystemParams,
};
use serde::{Deserialize, Serialize};

/// Contents of a nonlinearity spec file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySpec {
    pub l: usize,
    #[serde(rename = "F")]
    pub f: String,
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub beta: Option<Vec<f64>>,
    #[serde(default)]
    pub omega: Option<f64>,
    /// Declared charge weights; checked against the interaction.
    #[serde(default)]
    pub sigma: Option<Vec<f64>>,
}

/// Exactly one of `builtin`, `file`, `inline`; `beta` and `omega` override
/// the defaults of the chosen source.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub builtin: Option<String>,
    pub kappa: Option<f64>,
    pub file: Option<PathBuf>,
    pub inline: Option<NonlinearitySpec>,
    pub beta: Option<Vec<f64>>,
    pub omega: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct LoadedSystem {
    pub label: String,
    pub nl: AnyNonlinearity,
    /// `None` for the hard-coded scalar cubic.
    pub poly: Option<InteractionPoly>,
    pub params: SystemParams,
}

/// Renders a parse failure with a caret under the offending position.
pub fn caret_message(text: &str, err: &qnls_core::Error) -> String {
    match err {
        qnls_core::Error::Parse { pos, .. } => {
            let col = text.char_indices().take_while(|(i, _)| i < pos).count();
            format!("{err}\n  {text}\n  {}^", " ".repeat(col))
        }
        other => other.to_string(),
    }
}

fn parse(text: &str, l: usize) -> Result<InteractionPoly> {
    parse_interaction(text, l).map_err(|e| {
        let msg = caret_message(text, &e);
        anyhow::Error::from(e).context(msg)
    })
}

impl SystemSpec {
    pub fn builtin(name: &str, kappa: Option<f64>) -> Self {
        SystemSpec { builtin: Some(name.into()), kappa, ..Default::default() }
    }

    pub fn validate_paths(&self) -> Result<()> {
        if let Some(p) = &self.file {
            if !p.is_file() {
                bail!("system file {} does not exist", p.display());
            }
        }
        Ok(())
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        if let Some(p) = &self.file {
            if p.is_relative() {
                self.file = Some(base.join(p));
            }
        }
    }

    /// Loads the system in dimension `n`. Without an explicit `omega`,
    /// dimension six uses `ω = 0` (the critical problem has no mass term).
    pub fn load(&self, n: usize) -> Result<LoadedSystem> {
        let sources = [self.builtin.is_some(), self.file.is_some(), self.inline.is_some()];
        match sources.iter().filter(|&&s| s).count() {
            0 => bail!("no system given (use --builtin, --spec or a system block)"),
            1 => {}
            _ => bail!("system block must name exactly one of builtin, file, inline"),
        }
        let (label, nl, poly, params, default_omega) = if let Some(name) = &self.builtin {
            if name == "scalar-cubic" {
                let params = scalar_cubic_params(1)?;
                let (nl, _) = AnyNonlinearity::builtin(name, 0.0)?;
                (name.clone(), nl, None, params, 2.0)
            } else {
                let kappa = self.kappa.unwrap_or(0.5);
                let (f, params) = builtin(name, kappa)?;
                let (fk, _) = DerivedNonlinearity::from_interaction(&f);
                let label = if name == "kappa" { format!("kappa({kappa})") } else { name.clone() };
                (label, AnyNonlinearity::Polynomial(fk), Some(f), params, 1.0)
            }
        } else {
            let spec = match (&self.file, &self.inline) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(path)
                        .with_context(|| format!("reading system file {}", path.display()))?;
                    serde_json::from_str::<NonlinearitySpec>(&text)
                        .with_context(|| format!("parsing system file {}", path.display()))?
                }
                (None, Some(spec)) => spec.clone(),
                (None, None) => unreachable!(),
            };
            let f = parse(&spec.f, spec.l)?;
            let (mut fk, _) = DerivedNonlinearity::from_interaction(&f);
            if let Some(sigma) = &spec.sigma {
                fk = fk.with_declared_sigma(sigma)?;
            }
            let beta = spec.beta.clone().unwrap_or_else(|| vec![0.0; spec.l]);
            let params = SystemParams::new(3, spec.alpha.clone(), spec.gamma.clone(), beta, 1.0)?;
            if params.l != spec.l {
                bail!("alpha has {} entries, l = {}", params.l, spec.l);
            }
            (spec.f.clone(), AnyNonlinearity::Polynomial(fk), Some(f), params, spec.omega.unwrap_or(1.0))
        };
        let mut params = params.with_dimension(n)?;
        params.omega = self.omega.unwrap_or(if n == 6 { 0.0 } else { default_omega });
        if let Some(beta) = &self.beta {
            params.beta = beta.clone();
        }
        params.validate()?;
        Ok(LoadedSystem { label, nl, poly, params })
    }
}

impl LoadedSystem {
    pub fn sigma(&self) -> Result<Vec<f64>> {
        use qnls_core::Nonlinearity;
        self.nl.sigma().map(|s| s.to_vec()).ok_or_else(|| anyhow!(qnls_core::Error::MissingSigma))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_six_drops_frequency() {
        let s = SystemSpec::builtin("kappa", Some(0.5)).load(6).unwrap();
        assert_eq!(s.params.omega, 0.0);
        let s = SystemSpec::builtin("kappa", Some(0.5)).load(3).unwrap();
        assert_eq!(s.params.omega, 1.0);
        let s = SystemSpec::builtin("scalar-cubic", None).load(1).unwrap();
        assert_eq!(s.params.omega, 2.0);
        assert!(s.poly.is_none());
    }

    #[test]
    fn inline_spec_with_declared_sigma() {
        let spec = NonlinearitySpec {
            l: 2,
            f: "conj(z1)^2*z2".into(),
            alpha: vec![1.0, 1.0],
            gamma: vec![1.0, 0.5],
            beta: None,
            omega: None,
            sigma: Some(vec![1.0, 2.0]),
        };
        let s = SystemSpec { inline: Some(spec.clone()), ..Default::default() }.load(4).unwrap();
        assert_eq!(s.sigma().unwrap(), vec![1.0, 2.0]);
        let wrong = NonlinearitySpec { sigma: Some(vec![1.0, 1.0]), ..spec };
        assert!(SystemSpec { inline: Some(wrong), ..Default::default() }.load(4).is_err());
    }

    #[test]
    fn parse_error_carries_caret() {
        let spec = NonlinearitySpec {
            l: 2,
            f: "conj(z1)^2 * z2 +".into(),
            alpha: vec![1.0, 1.0],
            gamma: vec![1.0, 1.0],
            beta: None,
            omega: None,
            sigma: None,
        };
        let err = SystemSpec { inline: Some(spec), ..Default::default() }.load(3).unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains('^'), "{msg}");
        assert!(err.downcast_ref::<qnls_core::Error>().is_some());
    }
}
