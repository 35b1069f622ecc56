//! Analysis toolkit for the dimensionless Rayleigh-Plesset equation (RPE).
//!
//! The crate is organized around a small exact-arithmetic symbolic kernel
//! ([`symbolic`]) on top of which the analytical machinery is built:
//!
//! - [`model`] — the dimensional and dimensionless RPE, nondimensionalization,
//!   pressure forcing, and pointwise right-hand-side/residual evaluation;
//! - [`painleve`] — dominant-balance (leading-order) singularity analysis for
//!   ODEs given as sums of power monomials in `(t, R, Rdot, Rddot)`;
//! - [`lie`] — second prolongation of point vector fields, the symmetry
//!   condition on the equation manifold, determining equations, an exact
//!   polynomial-ansatz symmetry solver, and numeric group flows;
//! - [`solutions`] — closed-form invariant solutions and first integrals with
//!   independent verification paths;
//! - [`integrate`] — an embedded Runge-Kutta 5(4) integrator with dense output
//!   and collapse-event location, the reduced first-order ODE, and the
//!   five-channel energy audit;
//! - [`quad`] — adaptive Gauss-Kronrod quadrature used by the collapse-time
//!   integral.

// validations deliberately use `!(x > 0.0)` so NaN fails them too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod integrate;
pub mod lie;
pub mod linalg;
pub mod model;
pub mod painleve;
pub mod quad;
pub mod rational;
pub mod solutions;
pub mod symbolic;

/// Crate-wide error type.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A value violates a domain precondition (nonpositive radius, bad bracket, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// Expression text does not conform to the grammar.
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    /// An identifier outside the fixed symbol table.
    #[error("unknown symbol `{name}` at byte {pos}")]
    UnknownSymbol { name: String, pos: usize },
    /// Evaluation hit a symbol with no binding.
    #[error("unbound symbol `{0}` in evaluation")]
    Unbound(String),
    /// The operation is outside the supported fragment.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A numerical procedure failed to converge or left its domain.
    #[error("numerics: {0}")]
    Numerics(String),
}

pub type Result<T> = std::result::Result<T, Error>;
