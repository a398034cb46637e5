//! JSON run configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qnls_core::evolution::EvolveConfig;
use qnls_core::ground_state::PetviashviliOptions;
use serde::{Deserialize, Serialize};

use crate::system::SystemSpec;

pub const DEFAULT_M: usize = 4096;
pub const DEFAULT_R_MAX: f64 = 40.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
}

fn default_m() -> usize {
    DEFAULT_M
}

fn default_r_max() -> f64 {
    DEFAULT_R_MAX
}

/// Where the initial field of an evolution comes from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// `λψ` for the ground state `ψ` computed on the run grid.
    GroundState { scale: f64 },
    /// `A e^{−r²/w²} e^{i c r²}` on every component.
    Gaussian {
        amplitude: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        chirp: f64,
    },
    /// Snapshot file (`.csv` or binary).
    File { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveBlock {
    pub config: EvolveConfig,
    pub initial: Option<InitialData>,
    /// Write a binary snapshot at every record.
    pub snapshots: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyBlock {
    /// Classify `λψ`.
    pub lambda: f64,
    /// Classify a snapshot instead.
    pub file: Option<PathBuf>,
    /// Run the evolution and compare verdicts.
    pub confirm: bool,
}

impl Default for ClassifyBlock {
    fn default() -> Self {
        ClassifyBlock { lambda: 1.0, file: None, confirm: false }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcentrateBlock {
    pub lambda: f64,
    pub file: Option<PathBuf>,
    /// Number of radii in the `Q(R)` profile.
    pub points: usize,
    pub deltas: Vec<f64>,
    pub inner_radii: Vec<f64>,
}

impl Default for ConcentrateBlock {
    fn default() -> Self {
        ConcentrateBlock { lambda: 1.0, file: None, points: 400, deltas: vec![0.5, 3.0], inner_radii: vec![0.25, 0.5, 1.0] }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: Option<SystemSpec>,
    pub grid: Option<GridSpec>,
    pub groundstate: Option<PetviashviliOptions>,
    pub evolve: Option<EvolveBlock>,
    pub classify: Option<ClassifyBlock>,
    pub concentrate: Option<ConcentrateBlock>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Check,
    GroundState,
    Evolve,
    Classify,
    Concentrate,
    GnConstant,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Check => "check",
            Task::GroundState => "groundstate",
            Task::Evolve => "evolve",
            Task::Classify => "classify",
            Task::Concentrate => "concentrate",
            Task::GnConstant => "gn-constant",
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(s) = &mut self.system {
            s.resolve_paths(base);
        }
        if let Some(InitialData::File { path }) = self.evolve.as_mut().and_then(|e| e.initial.as_mut()) {
            fix(path);
        }
        if let Some(p) = self.classify.as_mut().and_then(|c| c.file.as_mut()) {
            fix(p);
        }
        if let Some(p) = self.concentrate.as_mut().and_then(|c| c.file.as_mut()) {
            fix(p);
        }
        if let Some(p) = &mut self.output_dir {
            fix(p);
        }
    }

    /// Task blocks must belong to the subcommand and referenced files must
    /// exist.
    pub fn validate(&self, task: Task) -> Result<()> {
        let present = [
            ("grid", self.grid.is_some()),
            ("groundstate", self.groundstate.is_some()),
            ("evolve", self.evolve.is_some()),
            ("classify", self.classify.is_some()),
            ("concentrate", self.concentrate.is_some()),
        ];
        let allowed: &[&str] = match task {
            Task::Check => &[],
            Task::GroundState | Task::GnConstant => &["grid", "groundstate"],
            Task::Evolve => &["grid", "groundstate", "evolve"],
            Task::Classify => &["grid", "groundstate", "classify", "evolve"],
            Task::Concentrate => &["grid", "groundstate", "concentrate"],
        };
        for (block, set) in present {
            if set && !allowed.contains(&block) {
                bail!("config block '{block}' does not apply to '{}'", task.name());
            }
        }
        if let Some(s) = &self.system {
            s.validate_paths()?;
        }
        let files = [
            self.evolve.as_ref().and_then(|e| match &e.initial {
                Some(InitialData::File { path }) => Some(path),
                _ => None,
            }),
            self.classify.as_ref().and_then(|c| c.file.as_ref()),
            self.concentrate.as_ref().and_then(|c| c.file.as_ref()),
        ];
        for p in files.into_iter().flatten() {
            if !p.is_file() {
                bail!("referenced file {} does not exist", p.display());
            }
        }
        if let Some(g) = &self.grid {
            if !(1..=6).contains(&g.n) {
                return Err(qnls_core::Error::DimensionOutOfRange(g.n).into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_blocks_take_defaults() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"system": {"builtin": "kappa", "kappa": 1.0},
                "grid": {"n": 4},
                "evolve": {"config": {"dt": 0.002}, "initial": {"kind": "gaussian", "amplitude": 0.3}}}"#,
        )
        .unwrap();
        let e = cfg.evolve.as_ref().unwrap();
        assert_eq!(e.config.dt, 0.002);
        assert_eq!(e.config.record_every, EvolveConfig::default().record_every);
        assert_eq!(cfg.grid.as_ref().unwrap().m, DEFAULT_M);
        assert!(cfg.validate(Task::Evolve).is_ok());
        assert!(cfg.validate(Task::Concentrate).is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"grid": {"n": 3, "mm": 5}}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"groundstate": {"tolerance": 1e-9}}"#).is_err());
    }

    #[test]
    fn dimension_checked() {
        let cfg: RunConfig = serde_json::from_str(r#"{"grid": {"n": 7}}"#).unwrap();
        let err = cfg.validate(Task::GroundState).unwrap_err();
        assert!(err.to_string().contains("dimension 7 out of supported range"));
    }
}
