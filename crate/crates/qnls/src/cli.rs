//! Argument parsing, merging flags over a config file, and parameter sweeps.
//!
//! Precedence is flag, then config file, then the defaults of each module.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qnls_core::ground_state::PetviashviliOptions;
use serde_json::{json, Value};

use crate::commands::{self, Extras, Outcome};
use crate::config::{
    ClassifyBlock, ConcentrateBlock, EvolveBlock, GridSpec, InitialData, RunConfig, Task, DEFAULT_M, DEFAULT_R_MAX,
};
use crate::exit::{CliError, CONFIG};
use crate::json;
use crate::system::SystemSpec;

#[derive(Debug, Parser)]
#[command(name = "qnls", version, about = "Quadratic Schrödinger systems: ground states, evolution, blow-up criteria")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structural hypotheses, charge weights, mass resonance, gauge symmetry.
    Check(Flags),
    /// Ground state by Petviashvili iteration, with identities and constants.
    Groundstate(Flags),
    /// Time evolution with conservation diagnostics.
    Evolve(Flags),
    /// A priori blow-up / global verdict, optionally confirmed by evolution.
    Classify(Flags),
    /// Concentration profile and, in dimension six, rescaling and localized
    /// Sobolev checks.
    Concentrate(Flags),
    /// Sharp Gagliardo–Nirenberg constant against random fields.
    GnConstant(Flags),
}

#[derive(Debug, Clone, Args)]
pub struct Flags {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Builtin system (kappa, shg3, scalar-cubic, ...).
    #[arg(long, conflicts_with = "spec")]
    pub builtin: Option<String>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Nonlinearity spec file (JSON with l, F, alpha, gamma).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub omega: Option<f64>,
    /// Comma-separated `β_k`.
    #[arg(long, value_delimiter = ',')]
    pub beta: Option<Vec<f64>>,

    /// Spatial dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of grid cells.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,

    // Ground-state solver.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub mixing: Option<f64>,
    #[arg(long)]
    pub critical_tol: Option<f64>,
    #[arg(long)]
    pub pin_radius: Option<f64>,

    // Evolution.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub record_every: Option<usize>,
    #[arg(long)]
    pub blowup_k_factor: Option<f64>,
    #[arg(long)]
    pub tail_tol: Option<f64>,
    #[arg(long)]
    pub drift_tol: Option<f64>,
    #[arg(long)]
    pub max_halvings: Option<u32>,
    #[arg(long)]
    pub rk_substeps: Option<usize>,
    /// Write a binary snapshot at every record.
    #[arg(long)]
    pub snapshots: bool,

    // Initial data.
    /// Scale of the ground state used as data.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Gaussian initial data with this amplitude.
    #[arg(long, conflicts_with_all = ["lambda", "input"])]
    pub gaussian: Option<f64>,
    #[arg(long, requires = "gaussian")]
    pub width: Option<f64>,
    #[arg(long, requires = "gaussian")]
    pub chirp: Option<f64>,
    /// Snapshot file (.csv or binary) used as data.
    #[arg(long, conflicts_with = "lambda")]
    pub input: Option<PathBuf>,

    /// Run the evolution after classifying.
    #[arg(long)]
    pub confirm: bool,
    /// Number of radii in the concentration profile.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    /// Comma-separated inner radii for the localized Sobolev checks.
    #[arg(long, value_delimiter = ',')]
    pub inner: Option<Vec<f64>>,
    /// Random fields tried by gn-constant.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Parameter sweep `lambda=V1,V2,...` or `kappa=V1,V2,...`, run in parallel.
    #[arg(long)]
    pub sweep: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKey {
    Lambda,
    Kappa,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub key: SweepKey,
    pub values: Vec<f64>,
}

impl Sweep {
    pub fn parse(text: &str) -> Result<Self> {
        let (key, list) = text.split_once('=').context("sweep must look like KEY=V1,V2,...")?;
        let key = match key.trim() {
            "lambda" => SweepKey::Lambda,
            "kappa" => SweepKey::Kappa,
            other => bail!("cannot sweep over '{other}' (lambda or kappa)"),
        };
        let values = list
            .split(',')
            .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad sweep value '{v}'")))
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            bail!("empty sweep");
        }
        Ok(Sweep { key, values })
    }

    fn name(&self) -> &'static str {
        match self.key {
            SweepKey::Lambda => "lambda",
            SweepKey::Kappa => "kappa",
        }
    }
}

impl Command {
    pub fn split(self) -> (Task, Flags) {
        match self {
            Command::Check(f) => (Task::Check, f),
            Command::Groundstate(f) => (Task::GroundState, f),
            Command::Evolve(f) => (Task::Evolve, f),
            Command::Classify(f) => (Task::Classify, f),
            Command::Concentrate(f) => (Task::Concentrate, f),
            Command::GnConstant(f) => (Task::GnConstant, f),
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Applies flags on top of the config file (if any).
pub fn build_config(task: Task, f: &Flags) -> Result<RunConfig> {
    let mut cfg = match &f.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };

    if let Some(name) = &f.builtin {
        cfg.system = Some(SystemSpec::builtin(name, f.kappa));
    } else if let Some(path) = &f.spec {
        cfg.system = Some(SystemSpec { file: Some(path.clone()), ..Default::default() });
    }
    if f.kappa.is_some() || f.omega.is_some() || f.beta.is_some() {
        let sys = cfg.system.get_or_insert_with(Default::default);
        set(&mut sys.kappa, f.kappa.map(Some));
        set(&mut sys.omega, f.omega.map(Some));
        set(&mut sys.beta, f.beta.clone().map(Some));
    }

    if f.n.is_some() || f.m.is_some() || f.r_max.is_some() {
        let grid = match cfg.grid.take() {
            Some(g) => g,
            None => GridSpec {
                n: f.n.context("--m/--r-max need a dimension (--n or a grid block)")?,
                m: DEFAULT_M,
                r_max: DEFAULT_R_MAX,
            },
        };
        let mut grid = grid;
        set(&mut grid.n, f.n);
        set(&mut grid.m, f.m);
        set(&mut grid.r_max, f.r_max);
        cfg.grid = Some(grid);
    }
    set(&mut cfg.output_dir, f.out.clone().map(Some));
    set(&mut cfg.seed, f.seed.map(Some));

    let gs_flags = [f.tol, f.theta, f.mixing, f.critical_tol, f.pin_radius].iter().any(Option::is_some)
        || f.max_iter.is_some();
    if gs_flags {
        let o = cfg.groundstate.get_or_insert_with(PetviashviliOptions::default);
        set(&mut o.tol, f.tol);
        set(&mut o.max_iter, f.max_iter);
        set(&mut o.theta, f.theta);
        set(&mut o.mixing, f.mixing.map(Some));
        set(&mut o.critical_tol, f.critical_tol);
        set(&mut o.pin_radius, f.pin_radius);
    }

    let ev_flags = [f.dt, f.t_final, f.blowup_k_factor, f.tail_tol, f.drift_tol].iter().any(Option::is_some)
        || f.record_every.is_some()
        || f.max_halvings.is_some()
        || f.rk_substeps.is_some()
        || f.snapshots;
    let init_flag = f.gaussian.is_some() || (task == Task::Evolve && (f.lambda.is_some() || f.input.is_some()));
    if ev_flags || init_flag {
        let e = cfg.evolve.get_or_insert_with(EvolveBlock::default);
        let c = &mut e.config;
        set(&mut c.dt, f.dt);
        set(&mut c.t_final, f.t_final);
        set(&mut c.record_every, f.record_every);
        set(&mut c.blowup_k_factor, f.blowup_k_factor);
        set(&mut c.tail_tol, f.tail_tol);
        set(&mut c.drift_tol, f.drift_tol);
        set(&mut c.max_halvings, f.max_halvings);
        set(&mut c.rk_substeps, f.rk_substeps);
        e.snapshots |= f.snapshots;
        if let Some(amplitude) = f.gaussian {
            e.initial = Some(InitialData::Gaussian {
                amplitude,
                width: f.width.unwrap_or(1.0),
                chirp: f.chirp.unwrap_or(0.0),
            });
        } else if task == Task::Evolve {
            if let Some(scale) = f.lambda {
                e.initial = Some(InitialData::GroundState { scale });
            } else if let Some(path) = &f.input {
                e.initial = Some(InitialData::File { path: path.clone() });
            }
        }
    }

    match task {
        Task::Classify if f.lambda.is_some() || f.input.is_some() || f.confirm => {
            let c = cfg.classify.get_or_insert_with(ClassifyBlock::default);
            set(&mut c.lambda, f.lambda);
            set(&mut c.file, f.input.clone().map(Some));
            c.confirm |= f.confirm;
        }
        Task::Concentrate
            if f.lambda.is_some() || f.input.is_some() || f.points.is_some() || f.deltas.is_some() || f.inner.is_some() =>
        {
            let c = cfg.concentrate.get_or_insert_with(ConcentrateBlock::default);
            set(&mut c.lambda, f.lambda);
            set(&mut c.file, f.input.clone().map(Some));
            set(&mut c.points, f.points);
            set(&mut c.deltas, f.deltas.clone());
            set(&mut c.inner_radii, f.inner.clone());
        }
        _ => {}
    }
    if f.confirm && task != Task::Classify {
        bail!("--confirm only applies to classify");
    }
    if f.samples.is_some() && task != Task::GnConstant {
        bail!("--samples only applies to gn-constant");
    }
    Ok(cfg)
}

/// Copy of `cfg` with the swept parameter set to `value`.
fn sweep_config(task: Task, cfg: &RunConfig, key: SweepKey, value: f64) -> Result<RunConfig> {
    let mut c = cfg.clone();
    match key {
        SweepKey::Kappa => {
            let sys = c.system.as_mut().context("kappa sweep needs a system")?;
            sys.kappa = Some(value);
        }
        SweepKey::Lambda => match task {
            Task::Classify => c.classify.get_or_insert_with(ClassifyBlock::default).lambda = value,
            Task::Concentrate => c.concentrate.get_or_insert_with(ConcentrateBlock::default).lambda = value,
            Task::Evolve => {
                c.evolve.get_or_insert_with(EvolveBlock::default).initial = Some(InitialData::GroundState { scale: value })
            }
            _ => bail!("lambda sweeps apply to evolve, classify and concentrate"),
        },
    }
    Ok(c)
}

fn sweep_dir(cfg: &RunConfig, task: Task) -> PathBuf {
    cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("qnls-output").join(task.name()))
}

/// Runs every sweep point on its own thread, each into its own directory.
pub fn run_sweep(task: Task, cfg: &RunConfig, extras: &Extras, sweep: &Sweep) -> Result<Outcome, CliError> {
    let base = sweep_dir(cfg, task);
    let configs = sweep
        .values
        .iter()
        .map(|&v| {
            let mut c = sweep_config(task, cfg, sweep.key, v)?;
            c.output_dir = Some(base.join(format!("{}={}", sweep.name(), v)));
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<Result<Outcome, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs.iter().map(|c| scope.spawn(move || commands::run(task, c, extras))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(CliError::new(CONFIG, anyhow!("sweep worker panicked")))))
            .collect()
    });
    let mut code = 0;
    let mut entries = Vec::new();
    for (v, r) in sweep.values.iter().zip(results) {
        let (c, body) = match r {
            Ok(o) => (o.code, json!({ "report": o.report })),
            Err(e) => (e.code, json!({ "error": format!("{e}") })),
        };
        code = code.max(c);
        let mut entry = json!({ sweep.name(): v, "exit_code": c });
        entry.as_object_mut().unwrap().extend(body.as_object().unwrap().clone());
        entries.push(entry);
    }
    Ok(Outcome { code, report: Value::Array(entries) })
}

fn execute(task: Task, flags: &Flags) -> Result<Outcome, CliError> {
    let cfg = build_config(task, flags).map_err(|e| CliError::new(CONFIG, e))?;
    let extras = Extras { samples: flags.samples.unwrap_or(commands::DEFAULT_SAMPLES) };
    match &flags.sweep {
        Some(text) => {
            let sweep = Sweep::parse(text).map_err(|e| CliError::new(CONFIG, e))?;
            cfg.validate(task)?;
            run_sweep(task, &cfg, &extras, &sweep)
        }
        None => commands::run(task, &cfg, &extras),
    }
}

/// Error text with the context chain, dropping causes already spelled out
/// by an outer message.
pub fn render_error(err: &anyhow::Error) -> String {
    let top = err.to_string();
    let mut msg = format!("error: {top}");
    let mut seen = top;
    for cause in err.chain().skip(1) {
        let c = cause.to_string();
        if !seen.contains(&c) {
            msg.push_str(&format!("\n  caused by: {c}"));
            seen.push_str(&c);
        }
    }
    msg
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { CONFIG } else { 0 };
        }
    };
    let (task, flags) = cli.command.split();
    match execute(task, &flags) {
        Ok(outcome) => match json::to_string(&outcome.report) {
            Ok(text) => {
                let mut out = std::io::stdout().lock();
                let _ = out.write_all(text.as_bytes());
                let _ = out.flush();
                outcome.code
            }
            Err(e) => {
                eprintln!("{}", render_error(&e));
                CONFIG
            }
        },
        Err(e) => {
            eprintln!("{}", render_error(&e.error));
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(args: &[&str]) -> (Task, Flags) {
        let mut all = vec!["qnls"];
        all.extend_from_slice(args);
        Cli::try_parse_from(all).unwrap().command.split()
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(
            &path,
            r#"{"system": {"builtin": "kappa", "kappa": 0.5}, "grid": {"n": 5, "m": 512},
                "classify": {"lambda": 0.5}}"#,
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let (task, f) = flags(&["classify", "--config", p, "--lambda", "1.1", "--r-max", "20"]);
        let cfg = build_config(task, &f).unwrap();
        let g = cfg.grid.unwrap();
        assert_eq!((g.n, g.m, g.r_max), (5, 512, 20.0));
        assert_eq!(cfg.classify.unwrap().lambda, 1.1);
        assert_eq!(cfg.system.unwrap().kappa, Some(0.5));
    }

    #[test]
    fn evolve_flags_fill_the_block() {
        let (task, f) = flags(&["evolve", "--builtin", "kappa", "--n", "4", "--dt", "0.002", "--gaussian", "0.3"]);
        let cfg = build_config(task, &f).unwrap();
        let e = cfg.evolve.unwrap();
        assert_eq!(e.config.dt, 0.002);
        assert_eq!(e.config.t_final, 1.0);
        assert!(matches!(e.initial, Some(InitialData::Gaussian { amplitude, .. }) if amplitude == 0.3));
    }

    #[test]
    fn sweep_parsing() {
        assert_eq!(Sweep::parse("lambda=0.5,1.1").unwrap(), Sweep { key: SweepKey::Lambda, values: vec![0.5, 1.1] });
        assert!(Sweep::parse("omega=1").is_err());
        assert!(Sweep::parse("kappa=a").is_err());
    }

    #[test]
    fn misplaced_flags_rejected() {
        let (task, f) = flags(&["groundstate", "--builtin", "kappa", "--n", "3", "--confirm"]);
        assert!(build_config(task, &f).is_err());
    }
}
