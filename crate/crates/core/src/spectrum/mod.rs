//! Multifractal spectra of the Khintchine and Lyapunov exponents.
//!
//! The Khintchine spectrum `t(xi) = dim {x : gamma(x) = xi}` is the `t`
//! component of the unique solution of
//!
//! ```text
//! P(t, q) = q xi,    dP/dq (t, q) = xi,
//! ```
//!
//! and the Lyapunov spectrum `t~(beta)` solves the same system for the
//! family `P_1(t~, q) = P(t~ - q, 0)`, which reduces to one equation
//! `P'(u) = -beta`. The module also carries the closed-form results for fast
//! normalizations and the bounded-digit dimensions.

mod bounded;
mod closed_form;
mod khintchine;
mod lyapunov;
mod shape;

use serde::Serialize;

pub use bounded::bounded_digit_dimension;
pub use closed_form::{cantor_dimension, fast_spectrum_dim, growth_ratio, CantorEstimate, GrowthEstimate};
pub use khintchine::{khintchine_curve, khintchine_point};
pub use lyapunov::{lyapunov_curve, lyapunov_point, lyapunov_point_nested};
pub use shape::{spectrum_shape_report, ShapeReport};

use crate::roots::RootConfig;
use crate::special::constants;
use crate::transfer::TransferOperator;
use crate::{Error, Result};

/// Largest accepted system residual for a returned point.
pub const RESIDUAL_CONTRACT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Khintchine,
    Lyapunov,
}

impl std::fmt::Display for CurveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurveKind::Khintchine => write!(f, "khintchine"),
            CurveKind::Lyapunov => write!(f, "lyapunov"),
        }
    }
}

/// Solver settings shared by both spectra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Target for both system residuals.
    pub tolerance: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    /// Closest admissible distance of `beta` above `gamma_0`.
    pub beta_margin: f64,
    pub beta_max: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            xi_min: 0.05,
            xi_max: 50.0,
            beta_margin: 0.01,
            beta_max: 100.0,
        }
    }
}

impl SolverConfig {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }

    fn root_config(&self) -> RootConfig {
        RootConfig {
            f_tol: self.tolerance * 0.1,
            x_tol: 1e-15,
            max_iter: 200,
        }
    }

    pub fn check_xi(&self, xi: f64) -> Result<()> {
        if !(xi >= self.xi_min && xi <= self.xi_max) {
            return Err(Error::Window {
                value: xi,
                min: self.xi_min,
                max: self.xi_max,
            });
        }
        Ok(())
    }

    pub fn beta_min(&self) -> f64 {
        constants().gamma0 + self.beta_margin
    }

    pub fn check_beta(&self, beta: f64) -> Result<()> {
        if !(beta >= self.beta_min() && beta <= self.beta_max) {
            return Err(Error::Window {
                value: beta,
                min: self.beta_min(),
                max: self.beta_max,
            });
        }
        Ok(())
    }
}

/// One solved point of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumPoint {
    /// `xi` or `beta`, in nats.
    pub exponent: f64,
    /// `t(xi)` or `t~(beta)`.
    pub dimension: f64,
    pub q_value: f64,
    /// `P - q * exponent` and `dP/dq - exponent`.
    pub residuals: [f64; 2],
    /// Slope of the spectrum from the implicit-function formula.
    pub slope: f64,
    /// Pressure evaluations spent on this point.
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointFailure {
    pub exponent: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveMetadata {
    pub cutoff: Option<usize>,
    pub collocation_order: usize,
    pub tolerance: f64,
}

/// A spectrum sampled on a grid. Points are sorted by exponent; grid values
/// whose solve failed are listed separately.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumCurve {
    pub kind: CurveKind,
    pub points: Vec<SpectrumPoint>,
    pub failures: Vec<PointFailure>,
    pub metadata: CurveMetadata,
}

impl SpectrumCurve {
    /// Fraction of grid values that were solved.
    pub fn success_ratio(&self) -> f64 {
        let total = self.points.len() + self.failures.len();
        if total == 0 {
            return 0.0;
        }
        self.points.len() as f64 / total as f64
    }
}

fn metadata(op: &TransferOperator, cfg: &SolverConfig) -> CurveMetadata {
    CurveMetadata {
        cutoff: op.alphabet().tail_cutoff(),
        collocation_order: op.discretization().order(),
        tolerance: cfg.tolerance,
    }
}

/// Checks the residual contract and clamps dimensions that exceed `[0, 1]`
/// by rounding only.
fn finish_point(mut p: SpectrumPoint) -> Result<SpectrumPoint> {
    let worst = p.residuals[0].abs().max(p.residuals[1].abs());
    if !(worst < RESIDUAL_CONTRACT) {
        return Err(Error::NonConvergence {
            iterations: p.evaluations,
            last_change: worst,
        });
    }
    if p.dimension > 1.0 && p.dimension < 1.0 + 1e-9 {
        p.dimension = 1.0;
    }
    if p.dimension < 0.0 && p.dimension > -1e-9 {
        p.dimension = 0.0;
    }
    if !(0.0..=1.0).contains(&p.dimension) {
        return Err(Error::Hypothesis(format!(
            "solved dimension {} at exponent {} is outside [0, 1]",
            p.dimension, p.exponent
        )));
    }
    Ok(p)
}

/// Grows a bracket around `hint` for a monotone `f` until the sign changes,
/// staying inside `[lo, hi]`. Returns `(a, b, f(a), f(b))`.
fn bracket_monotone<F>(
    f: &mut F,
    hint: f64,
    step: f64,
    lo: f64,
    hi: f64,
    increasing: bool,
    context: &str,
) -> Result<(f64, f64, f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut x0 = hint.clamp(lo, hi);
    let mut f0 = f(x0)?;
    if f0 == 0.0 {
        return Ok((x0, x0, f0, f0));
    }
    // root lies above x0 when f is still on the "before the root" side
    let upward = (f0 < 0.0) == increasing;
    let mut step = step;
    loop {
        let x1 = if upward { (x0 + step).min(hi) } else { (x0 - step).max(lo) };
        let f1 = f(x1)?;
        if f1 == 0.0 || f1.signum() != f0.signum() {
            return Ok(if x1 < x0 { (x1, x0, f1, f0) } else { (x0, x1, f0, f1) });
        }
        if x1 == hi || x1 == lo {
            return Err(Error::BracketFailure {
                lo: x0.min(x1),
                hi: x0.max(x1),
                f_lo: if x1 < x0 { f1 } else { f0 },
                f_hi: if x1 < x0 { f0 } else { f1 },
                context: context.to_string(),
            });
        }
        x0 = x1;
        f0 = f1;
        step *= 2.0;
    }
}

/// Splits a grid at `peak` into an ascending branch above and a descending
/// branch below, so both can be solved from the peak outward.
fn split_at_peak(grid: &[f64], peak: f64) -> (Vec<(usize, f64)>, Vec<(usize, f64)>) {
    let mut below: Vec<(usize, f64)> = grid.iter().copied().enumerate().filter(|(_, x)| *x < peak).collect();
    below.reverse();
    let above = grid.iter().copied().enumerate().filter(|(_, x)| *x >= peak).collect();
    (below, above)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InsufficientGrid("empty exponent grid".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Domain("exponent grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Merges per-branch results back into grid order.
fn assemble(
    kind: CurveKind,
    grid: &[f64],
    results: Vec<(usize, Result<SpectrumPoint>)>,
    metadata: CurveMetadata,
) -> SpectrumCurve {
    let mut slots: Vec<Option<Result<SpectrumPoint>>> = (0..grid.len()).map(|_| None).collect();
    for (i, r) in results {
        slots[i] = Some(r);
    }
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (x, slot) in grid.iter().zip(slots) {
        match slot {
            Some(Ok(p)) => points.push(p),
            Some(Err(e)) => failures.push(PointFailure {
                exponent: *x,
                message: e.to_string(),
            }),
            None => failures.push(PointFailure {
                exponent: *x,
                message: "not attempted".into(),
            }),
        }
    }
    SpectrumCurve {
        kind,
        points,
        failures,
        metadata,
    }
}
