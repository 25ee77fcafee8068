use thiserror::Error;

/// Errors raised by the continued-fraction, pressure and spectrum routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("expansion terminated after {available} digits (requested {requested})")]
    ExpansionTerminated { available: usize, requested: usize },

    #[error("precision exhausted at digit {depth}: residual {residual:e} within error bound {bound:e}")]
    PrecisionLoss {
        depth: usize,
        residual: f64,
        bound: f64,
    },

    #[error("power iteration did not converge after {iterations} iterations (last change {last_change:e})")]
    NonConvergence { iterations: usize, last_change: f64 },

    #[error("root not bracketed on [{lo}, {hi}]: f(lo)={f_lo:e}, f(hi)={f_hi:e} ({context})")]
    BracketFailure {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
        context: String,
    },

    #[error("exponent {value} outside solver window [{min}, {max}]")]
    Window { value: f64, min: f64, max: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("insufficient grid: {0}")]
    InsufficientGrid(String),

    #[error("inconsistent derivatives: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
