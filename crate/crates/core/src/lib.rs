//! Numerics for `l`-component nonlinear Schrödinger systems with quadratic
//! interactions
//!
//! ```text
//! i α_k ∂_t u_k + γ_k Δu_k − β_k u_k + f_k(u_1, …, u_l) = 0,   k = 1, …, l
//! ```
//!
//! where the nonlinearities derive from a cubic interaction polynomial
//! `F(z, z̄)` through `f_k = ∂F/∂z̄_k + conj(∂F/∂z_k)`.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure
//! computation over radially symmetric fields; file formats, JSON reports
//! and the command-line front end live in the `qnls` crate.
//!
//! Layout:
//!
//! - [`nonlinearity`]: interaction polynomials, their parser, Wirtinger
//!   derivatives and the structural hypothesis checks.
//! - [`grid`]: cell-centred radial grids, quadrature, the radial Laplacian
//!   and tridiagonal Helmholtz solves.
//! - [`functionals`]: charge, energy, action, Pohozaev and Weinstein
//!   functionals, sharp Gagliardo–Nirenberg constants.
//! - [`ground_state`]: Petviashvili iteration for the stationary system.
//! - [`evolution`]: Strang-split time integration with conservation
//!   monitoring.
//! - [`virial`]: virial and Morawetz quantities, truncated weights and the
//!   blow-up / global-existence classifier.
//! - [`concentration`]: concentration function, half-concentration
//!   rescaling and localized Sobolev checks in dimension six.

#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop, clippy::too_many_arguments)]

extern crate alloc;

pub mod concentration;
pub mod error;
pub mod evolution;
pub mod functionals;
pub mod grid;
pub mod ground_state;
mod linalg;
pub mod nonlinearity;
pub mod virial;

pub use error::{Error, Result};
pub use linalg::Scalar;
pub use num_complex::Complex64;

pub use functionals::DiagnosticsRecord;
pub use grid::{RadialField, RadialGrid};
pub use ground_state::{GroundStateResult, PetviashviliOptions};
pub use nonlinearity::{
    DerivedNonlinearity, InteractionPoly, Nonlinearity, ScalarCubic, SystemParams,
};
