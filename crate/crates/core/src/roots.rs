//! Bracketed scalar root finding.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootConfig {
    /// Absolute tolerance on `|f(x)|`.
    pub f_tol: f64,
    /// Absolute tolerance on the bracket width.
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self {
            f_tol: 1e-12,
            x_tol: 1e-15,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
}

/// Brent's method on a bracket `[a, b]` with `f(a)` and `f(b)` of opposite
/// signs (or one of them zero). Function values at the endpoints are passed
/// in so callers that searched for the bracket do not pay for them twice.
pub fn brent<F>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, cfg: RootConfig) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    if fa == 0.0 {
        return Ok(Root { x: a, fx: fa, evaluations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: fb, evaluations: 0 });
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::BracketFailure {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
            context: "brent".into(),
        });
    }
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut bisected = true;
    let mut evaluations = 0;
    for _ in 0..cfg.max_iter {
        if fb.abs() <= cfg.f_tol || (b - a).abs() <= cfg.x_tol {
            return Ok(Root { x: b, fx: fb, evaluations });
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let between = if lo < b { s > lo && s < b } else { s > b && s < lo };
        let use_bisection = !between
            || (bisected && (s - b).abs() >= (b - c).abs() / 2.0)
            || (!bisected && (s - b).abs() >= (c - d).abs() / 2.0)
            || (bisected && (b - c).abs() < cfg.x_tol)
            || (!bisected && (c - d).abs() < cfg.x_tol);
        if use_bisection {
            s = 0.5 * (a + b);
        }
        bisected = use_bisection;
        let fs = f(s)?;
        evaluations += 1;
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Ok(Root { x: b, fx: fb, evaluations })
}
