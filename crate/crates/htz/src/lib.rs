//! Exact calculus for quasihomogeneous Toeplitz operators on the harmonic
//! Bergman space of the unit disk.
//!
//! The harmonic Bergman space is spanned by `{z^k} ∪ {z̄^k}`; a symbol of the
//! form `e^{ipθ}φ(r)` with radial `φ` acts on that basis by a single shift of
//! the angular index together with an exact rational weight built from Mellin
//! transform values of `φ`. Everything downstream of that action — truncated
//! operator matrices, products, commutators, Toeplitz-ness tests and the
//! commutant machinery for monomial symbols — stays inside arbitrary-precision
//! rational arithmetic, so rank and nullity decisions are exact.
//!
//! Crate layout:
//! - [`exactmath`]: rationals, dense rational matrices, rank/nullspace,
//!   finite verification of rational identities in an integer variable.
//! - [`symbols`]: radial/quasihomogeneous symbols, the symbol grammar, exact
//!   Mellin evaluation and a numerical quadrature oracle.
//! - [`operator`]: truncated operator matrices on the basis `e_q`, products,
//!   commutators, exact-region bookkeeping and the Toeplitz-ness test.
//! - [`commutant`]: block system, Gamma-ratio partial fractions, the ansatz
//!   equation generator and the certified commutant solver.
//! - [`verify`]: grid suites that replay the operator identities at desk
//!   scale and report pass/fail with witnesses.

pub mod commutant;
pub mod exactmath;
pub mod operator;
pub mod symbols;
pub mod verify;

pub use exactmath::{ExactMathError, RatMatrix, RatVector, Rational};
pub use symbols::{MellinSample, QuasiSymbol, RadialSymbol, SymbolError};
