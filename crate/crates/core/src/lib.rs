//! Thermodynamic formalism for the Gauss continued-fraction map.
//!
//! The crate computes the pressure `P(t, q)` of the potential
//! `t log|T'| + q log a_1` through a collocation approximation of the
//! Ruelle transfer operator, and builds on it to solve for the Khintchine
//! spectrum `t(xi)`, the Lyapunov spectrum `t~(beta)`, dimensions of sets
//! with bounded partial quotients, and the fast-growth spectra `1/(b+1)`.
//!
//! Module map:
//!
//! * [`cf`]: exact continued-fraction arithmetic (continuants, convergents,
//!   cylinders, orbit statistics, points with prescribed exponents).
//! * [`special`]: Riemann and Hurwitz zeta, and the constants `xi_0`,
//!   `lambda_0`, `gamma_0`.
//! * [`transfer`]: the discretized transfer operator, pressure, its
//!   derivatives, Gibbs eigendata and digit sampling.
//! * [`spectrum`]: solvers for the spectrum systems and closed-form spectra.
//! * [`oracle`]: independent reference computations used for cross-checks.
//! * [`acceptance`]: the self-verification suite shared by tests and the CLI.

pub mod acceptance;
pub mod cf;
mod error;
pub mod oracle;
pub mod par;
pub mod roots;
pub mod special;
pub mod spectrum;
pub mod transfer;

pub use error::{Error, Result};
