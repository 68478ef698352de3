//! Explicit finite-dimensional approximations of the integral operator
//!
//! ```text
//! (K_α f)(x) = ∫₀¹ (1 − xy)^(α−1) f(y) dy,   0 < α < 1,
//! ```
//!
//! together with the numerical machinery needed to measure how fast they
//! converge.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: digamma, dilogarithm, Gauss ₂F₁ series, Γ ratios and the
//!   binomial-series coefficients of `(1 + x)^(−β)`.
//! * [`quadrature`]: adaptive Gauss–Kronrod integration with power
//!   substitutions at algebraic endpoint singularities.
//! * [`operator`]: the kernel in the coordinates `u = 1 − x`, `v = 1 − y`,
//!   test functions, a quadrature reference for `K f` and the closed form for
//!   power-pair inputs.
//! * [`approximant`]: the dyadic piecewise approximant of dimension `2n² + n`.
//! * [`analysis`]: regime classification, L^∞ / L^r errors, sweeps over `n`
//!   and decay-rate fits.
//! * [`spectral`]: graded Nyström discretisation, singular values and the
//!   Hilbert–Schmidt identity.
//! * [`entropy`]: covering counts and the entropy-number bound curve.
//! * [`table`]: deterministic CSV / JSON rendering shared by the CLI.

pub mod analysis;
pub mod approximant;
pub mod entropy;
mod error;
pub mod operator;
pub mod quadrature;
pub mod specfun;
pub mod spectral;
pub mod table;

pub use error::{Error, Result};
