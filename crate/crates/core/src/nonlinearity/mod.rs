//! Interaction polynomials `F(z, z̄)`, the nonlinearities they generate and
//! the structural hypotheses the rest of the crate relies on.
//!
//! ```
//! use qnls_core::nonlinearity::{parse_interaction, DerivedNonlinearity};
//!
//! let f = parse_interaction("conj(z1)^2 * z2", 2).unwrap();
//! let (fk, sol) = DerivedNonlinearity::from_interaction(&f);
//! assert_eq!(fk.polys()[1].to_string(), "z1^2");
//! assert_eq!(sol.kernel_dim, 1);
//! ```

mod builtin;
mod derived;
mod hypotheses;
mod params;
mod parse;
pub mod poly;
mod sigma;

pub use builtin::{builtin, scalar_cubic_params, AnyNonlinearity, BUILTIN_NAMES};
pub use derived::{build_fk, DerivedNonlinearity, Nonlinearity, ScalarCubic, ZeroNonlinearity};
pub use hypotheses::{
    check_gauge, check_homogeneity, check_structure, gauge_residual_at, support_decomposition,
    CheckStatus, GaugeReport, HomogeneityReport, HypothesisCheck, HypothesisReport,
    StructureOptions,
};
pub use params::SystemParams;
pub use parse::parse_interaction;
pub use poly::{Coeff, InteractionPoly, Monomial, Rational, Wirtinger};
pub use sigma::{check_mass_resonance, im_weighted_sum, solve_sigma, MassResonance, SigmaSolution};
