//! Structural checks on an interaction polynomial and its derived
//! nonlinearities. Polynomial identities are decided exactly; inequalities
//! are sampled.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::derived::{DerivedNonlinearity, Nonlinearity};
use super::poly::{Coeff, InteractionPoly, Monomial, Wirtinger};
use super::sigma::{solve_sigma, SigmaSolution};

/// How a hypothesis was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum CheckStatus {
    ExactPass,
    SampledPass,
    Fail,
    Declared,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HypothesisCheck {
    pub id: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneityReport {
    pub degree3: bool,
    pub offending: Vec<Monomial>,
    /// Largest relative deviation of `F(λz) − λ³F(z)` over the samples.
    pub sampled_deviation: f64,
}

fn random_point(rng: &mut ChaCha8Rng, l: usize) -> Vec<Complex64> {
    (0..l)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// Degree count plus sampling of `F(λz) = λ³F(z)` for `λ ∈ {2, 0.5, 3.7}`.
pub fn check_homogeneity(f: &InteractionPoly, seed: u64) -> HomogeneityReport {
    let offending: Vec<Monomial> =
        f.monomials().iter().filter(|m| m.degree() != 3).cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let z = random_point(&mut rng, f.components());
        let base = f.eval(&z);
        for lambda in [2.0, 0.5, 3.7] {
            let zl: Vec<Complex64> = z.iter().map(|v| v * lambda).collect();
            let expect = base * (lambda * lambda * lambda);
            let dev = (f.eval(&zl) - expect).norm();
            let scale = expect.norm();
            let rel = if scale > 0.0 { dev / scale } else { dev };
            worst = worst.max(rel);
        }
    }
    HomogeneityReport { degree3: offending.is_empty(), offending, sampled_deviation: worst }
}

/// Largest gauge residual over `samples` random `(θ, z)`, normalized by
/// `max(1, max_k |f_k(z)|)`, together with the largest `|Re F(rot z) − Re F(z)|`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GaugeReport {
    pub max_residual: f64,
    pub re_f_residual: f64,
}

/// Residual of the gauge identity at one point.
pub fn gauge_residual_at<N: Nonlinearity + ?Sized>(
    fk: &N,
    sigma: &[f64],
    z: &[Complex64],
    theta: f64,
) -> GaugeReport {
    let l = fk.components();
    let phase: Vec<Complex64> =
        sigma.iter().map(|s| Complex64::from_polar(1.0, s * theta / 2.0)).collect();
    let rot: Vec<Complex64> = z.iter().zip(&phase).map(|(a, p)| a * p).collect();
    let mut f0 = vec![Complex64::zero(); l];
    let mut f1 = vec![Complex64::zero(); l];
    fk.forcing(z, &mut f0);
    fk.forcing(&rot, &mut f1);
    let scale = f0.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let max_residual = (0..l)
        .map(|k| (f1[k] - phase[k] * f0[k]).norm() / scale)
        .fold(0.0, f64::max);
    let pf = fk.potential(z);
    let re_scale = pf.norm().max(1.0);
    let re_f_residual = (fk.potential(&rot).re - pf.re).abs() / re_scale;
    GaugeReport { max_residual, re_f_residual }
}

pub fn check_gauge<N: Nonlinearity + ?Sized>(
    fk: &N,
    sigma: &[f64],
    samples: usize,
    seed: u64,
) -> GaugeReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = GaugeReport { max_residual: 0.0, re_f_residual: 0.0 };
    for _ in 0..samples {
        let theta = rng.gen_range(0.0..core::f64::consts::TAU);
        let z = random_point(&mut rng, fk.components());
        let r = gauge_residual_at(fk, sigma, &z, theta);
        out.max_residual = out.max_residual.max(r.max_residual);
        out.re_f_residual = out.re_f_residual.max(r.re_f_residual);
    }
    out
}

/// Options for [`check_structure`].
#[derive(Clone, Debug)]
pub struct StructureOptions {
    pub seed: u64,
    pub samples: usize,
    /// Summands `F_1, …, F_m` for the super-modularity check; by default
    /// monomials are grouped by the set of variables they involve.
    pub decomposition: Option<Vec<InteractionPoly>>,
}

impl Default for StructureOptions {
    fn default() -> Self {
        StructureOptions { seed: 0x5eed, samples: 1000, decomposition: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
    pub sigma: SigmaSolution,
    pub nontrivial: bool,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn get(&self, id: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.id == id)
    }
}

const REL_TOL: f64 = 1e-12;

pub fn check_structure(
    f: &InteractionPoly,
    fk: &DerivedNonlinearity,
    opts: &StructureOptions,
) -> HypothesisReport {
    let l = f.components();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = Vec::new();
    let zero = vec![Complex64::zero(); l];

    // H1
    let f0 = f.eval(&zero);
    let fk0 = fk.eval_fk(&zero);
    let h1 = f0 == Complex64::zero() && fk0.iter().all(|v| *v == Complex64::zero());
    checks.push(HypothesisCheck {
        id: "H1",
        status: if h1 { CheckStatus::ExactPass } else { CheckStatus::Fail },
        detail: if h1 {
            "F(0) = 0 and f_k(0) = 0".into()
        } else {
            "nonzero constant term".into()
        },
    });

    let hom = check_homogeneity(f, opts.seed);
    let h5 = hom.degree3;
    checks.push(HypothesisCheck {
        id: "H2",
        status: if hom.degree3 { CheckStatus::Declared } else { CheckStatus::Fail },
        detail: if hom.degree3 {
            "automatic for cubic F: derivatives of f_k are linear".into()
        } else {
            "F is not cubic; Lipschitz bounds not established".into()
        },
    });
    checks.push(HypothesisCheck {
        id: "H3",
        status: CheckStatus::ExactPass,
        detail: "f_k built as dF/dconj(z_k) + conj(dF/dz_k)".into(),
    });

    // H4
    let sigma = solve_sigma(fk);
    checks.push(HypothesisCheck {
        id: "H4",
        status: match (&sigma.sigma, sigma.exact) {
            (Some(_), true) => CheckStatus::ExactPass,
            (Some(_), false) => CheckStatus::SampledPass,
            (None, _) => CheckStatus::Fail,
        },
        detail: match &sigma.sigma {
            Some(s) => format!(
                "sigma = ({}), solution space dimension {}",
                s.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", "),
                sigma.kernel_dim
            ),
            None => "no positive sigma cancels Im sum sigma_k f_k conj(z_k)".into(),
        },
    });

    checks.push(HypothesisCheck {
        id: "H5",
        status: if h5 { CheckStatus::ExactPass } else { CheckStatus::Fail },
        detail: if h5 {
            format!("homogeneous of degree 3 (sampled deviation {:.1e})", hom.sampled_deviation)
        } else {
            format!("{} monomial(s) of degree other than 3", hom.offending.len())
        },
    });

    // H6: |Re ∫F(u)| ≤ ∫F(|u|) on random discrete fields.
    let mut h6_fail = None;
    for s in 0..opts.samples {
        let pts = 8;
        let (mut lhs, mut rhs) = (0.0, 0.0);
        for _ in 0..pts {
            let w: f64 = rng.gen_range(0.1..1.0);
            let z = random_point(&mut rng, l);
            let modulus: Vec<Complex64> = z.iter().map(|v| Complex64::new(v.norm(), 0.0)).collect();
            lhs += w * f.eval(&z).re;
            rhs += w * f.eval(&modulus).re;
        }
        if lhs.abs() > rhs + REL_TOL * (lhs.abs() + rhs.abs()) {
            h6_fail = Some(s);
            break;
        }
    }
    checks.push(match h6_fail {
        None => HypothesisCheck {
            id: "H6",
            status: CheckStatus::SampledPass,
            detail: format!("{} random fields", opts.samples),
        },
        Some(s) => HypothesisCheck {
            id: "H6",
            status: CheckStatus::Fail,
            detail: format!("violated on sampled field {s}"),
        },
    });

    // H7: real on ℝ^l. Restricted to reals, z^a z̄^b = y^(a+b), so the
    // coefficient sums per combined exponent must be real.
    let mut by_exp: BTreeMap<Vec<u32>, Coeff> = BTreeMap::new();
    for m in f.monomials() {
        let e: Vec<u32> = m.holo.iter().zip(&m.anti).map(|(a, b)| a + b).collect();
        let c = by_exp.entry(e).or_insert_with(Coeff::zero);
        *c = c.add(&m.coeff);
    }
    let scale = f.max_coeff_norm().max(f64::MIN_POSITIVE);
    let mut real_exact = true;
    let mut real_ok = true;
    for c in by_exp.values() {
        match c.exact_parts() {
            Some((_, im)) => real_ok &= im.is_zero(),
            None => {
                real_exact = false;
                real_ok &= c.to_complex().im.abs() <= REL_TOL * scale;
            }
        }
    }
    let mut worst_im: f64 = 0.0;
    for _ in 0..100 {
        let y: Vec<Complex64> =
            (0..l).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
        let v = f.eval(&y);
        worst_im = worst_im.max(v.im.abs() / v.norm().max(1.0));
    }
    real_ok &= worst_im <= REL_TOL;
    checks.push(HypothesisCheck {
        id: "H7-real",
        status: match (real_ok, real_exact) {
            (true, true) => CheckStatus::ExactPass,
            (true, false) => CheckStatus::SampledPass,
            _ => CheckStatus::Fail,
        },
        detail: format!("max |Im F(y)| on 100 real samples: {worst_im:.1e}"),
    });

    // H7 positivity: f_k(y) ≥ 0 on the positive cone, f_k = ∂F/∂y_k there.
    let grad: Vec<InteractionPoly> = (0..l)
        .map(|k| {
            let a = f.wirtinger(k, Wirtinger::Holomorphic).expect("k < l");
            let b = f.wirtinger(k, Wirtinger::Antiholomorphic).expect("k < l");
            a.add(&b)
        })
        .collect();
    let mut cone_ok = true;
    let mut grad_dev: f64 = 0.0;
    let mut min_fk = f64::INFINITY;
    for _ in 0..100 {
        let y: Vec<Complex64> =
            (0..l).map(|_| Complex64::new(rng.gen_range(0.0..1.0), 0.0)).collect();
        let v = fk.eval_fk(&y);
        for k in 0..l {
            let g = grad[k].eval(&y);
            let s = v[k].norm().max(1.0);
            grad_dev = grad_dev.max((v[k] - g).norm() / s);
            min_fk = min_fk.min(v[k].re);
            if v[k].re < -REL_TOL * s || v[k].im.abs() > REL_TOL * s {
                cone_ok = false;
            }
        }
    }
    if grad_dev > REL_TOL {
        cone_ok = false;
    }
    checks.push(HypothesisCheck {
        id: "H7-cone",
        status: if cone_ok { CheckStatus::SampledPass } else { CheckStatus::Fail },
        detail: format!(
            "min f_k(y) = {min_fk:.3e} on 100 cone samples; |f_k - dF/dy_k| <= {grad_dev:.1e}"
        ),
    });

    // H8
    let parts = opts.decomposition.clone().unwrap_or_else(|| support_decomposition(f));
    let mut sum = InteractionPoly::zero(l);
    for p in &parts {
        sum = sum.add(p);
    }
    let decomposes = sum.sub(f).vanishes(scale, REL_TOL);
    let h8 = if !decomposes {
        Err("declared summands do not add up to F".to_string())
    } else {
        check_supermodular(&parts, opts.samples, &mut rng)
    };
    checks.push(HypothesisCheck {
        id: "H8",
        status: if h8.is_ok() { CheckStatus::SampledPass } else { CheckStatus::Fail },
        detail: match h8 {
            Ok(()) => format!("{} summand(s), {} samples each", parts.len(), opts.samples),
            Err(e) => e,
        },
    });

    HypothesisReport { checks, sigma, nontrivial: !f.is_zero() }
}

/// Groups monomials by the set of variables they involve.
pub fn support_decomposition(f: &InteractionPoly) -> Vec<InteractionPoly> {
    let l = f.components();
    let mut groups: BTreeMap<Vec<bool>, Vec<Monomial>> = BTreeMap::new();
    for m in f.monomials() {
        let support: Vec<bool> = (0..l).map(|j| m.holo[j] + m.anti[j] > 0).collect();
        groups.entry(support).or_default().push(m.clone());
    }
    groups
        .into_values()
        .map(|ms| {
            InteractionPoly::from_terms(l, ms.into_iter().map(|m| (m.coeff, m.holo, m.anti)))
        })
        .collect()
}

fn check_supermodular(
    parts: &[InteractionPoly],
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(), String> {
    for (s, p) in parts.iter().enumerate() {
        let l = p.components();
        let support: Vec<usize> = (0..l)
            .filter(|&j| p.monomials().iter().any(|m| m.holo[j] + m.anti[j] > 0))
            .collect();
        let eval = |y: &[f64]| -> f64 {
            let z: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            p.eval(&z).re
        };
        for _ in 0..samples {
            let mut y = vec![0.0; l];
            for &j in &support {
                y[j] = rng.gen_range(0.0..1.0);
            }
            let scale = 1.0 + eval(&y).abs();
            for &j in &support {
                let mut yz = y.clone();
                yz[j] = 0.0;
                if eval(&yz).abs() > REL_TOL * scale {
                    return Err(format!("summand {} does not vanish on y_{} = 0", s + 1, j + 1));
                }
            }
            if support.len() < 2 {
                continue;
            }
            let i = support[rng.gen_range(0..support.len())];
            let mut j = i;
            while j == i {
                j = support[rng.gen_range(0..support.len())];
            }
            let h: f64 = rng.gen_range(0.01..1.0);
            let k: f64 = rng.gen_range(0.01..1.0);
            let shift = |di: f64, dj: f64| {
                let mut v = y.clone();
                v[i] += di;
                v[j] += dj;
                eval(&v)
            };
            let lhs = shift(h, k) + eval(&y);
            let rhs = shift(h, 0.0) + shift(0.0, k);
            if lhs < rhs - REL_TOL * (lhs.abs() + rhs.abs() + 1.0) {
                return Err(format!(
                    "summand {} is not super-modular in (y_{}, y_{})",
                    s + 1,
                    i + 1,
                    j + 1
                ));
            }
        }
    }
    Ok(())
}
