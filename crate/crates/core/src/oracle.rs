//! Reference computations that share no code path with the transfer
//! operator, used to cross-check it.

use std::f64::consts::LN_2;

use crate::par;
use crate::special::riemann_zeta;
use crate::transfer::PressureParams;
use crate::{Error, Result};

/// Cylinder sums `Z_n = sum_{|w| = n, w_j <= M} prod w_j^q q_n(w)^{-2t}` for
/// `n = 1..=depth`, where `q_n(w)` is the denominator of `[w_1, ..., w_n]`
/// (the value at `x = 0` of the product of cylinder-map derivatives).
///
/// Words are enumerated depth first, split over the first digit.
pub fn cylinder_sums(depth: usize, cutoff: u64, p: PressureParams) -> Result<Vec<f64>> {
    if depth == 0 || cutoff == 0 {
        return Err(Error::Domain("cylinder sums need depth >= 1 and cutoff >= 1".into()));
    }
    let digits: Vec<u64> = (1..=cutoff).collect();
    let ln_digit: Vec<f64> = digits.iter().map(|&d| (d as f64).ln()).collect();
    let partial = par::map(&digits, |&first| {
        let mut sums = vec![0.0; depth];
        // continuants of the reversed word, q_n and q_{n-1}
        walk(
            1,
            first as f64,
            1.0,
            p.q * (first as f64).ln(),
            depth,
            &ln_digit,
            p,
            &mut sums,
        );
        sums
    });
    let mut total = vec![0.0; depth];
    for sums in partial {
        for (t, s) in total.iter_mut().zip(sums) {
            *t += s;
        }
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    level: usize,
    q_n: f64,
    q_prev: f64,
    log_weight: f64,
    depth: usize,
    ln_digit: &[f64],
    p: PressureParams,
    sums: &mut [f64],
) {
    sums[level - 1] += (log_weight - 2.0 * p.t * q_n.ln()).exp();
    if level == depth {
        return;
    }
    for (d, &ln_d) in ln_digit.iter().enumerate() {
        let a = (d + 1) as f64;
        walk(
            level + 1,
            a * q_n + q_prev,
            q_n,
            log_weight + p.q * ln_d,
            depth,
            ln_digit,
            p,
            sums,
        );
    }
}

/// Pressure estimate from the ratios `r_n = log(Z_n / Z_{n-1})`.
///
/// The ratios approach the pressure geometrically, with an alternating
/// error driven by the second eigenvalue, so the last three are combined by
/// Aitken's delta-squared extrapolation. The definition `(1/n) log Z_n`
/// converges only like `1/n`.
pub fn cylinder_pressure_estimate(depth: usize, cutoff: u64, p: PressureParams) -> Result<f64> {
    if depth < 4 {
        return Err(Error::Domain("the extrapolated estimate needs depth >= 4".into()));
    }
    let z = cylinder_sums(depth, cutoff, p)?;
    let r: Vec<f64> = z[depth - 4..].windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let denom = r[2] - 2.0 * r[1] + r[0];
    if denom.abs() < 1e-300 {
        return Ok(r[2]);
    }
    Ok(r[2] - (r[2] - r[1]).powi(2) / denom)
}

/// The definition `(1/n) log Z_n` itself.
pub fn cylinder_pressure_average(depth: usize, cutoff: u64, p: PressureParams) -> Result<f64> {
    let z = cylinder_sums(depth, cutoff, p)?;
    Ok(z[depth - 1].ln() / depth as f64)
}

/// `mu_G(I_1(k)) = log_2((k+1)^2 / (k(k+2)))`, the Gauss measure of the
/// first-level cylinder with digit `k`.
pub fn gauss_cylinder_measure(k: u64) -> f64 {
    let k = k as f64;
    (1.0 / (k * (k + 2.0))).ln_1p() / LN_2
}

/// `xi_0 = sum_k log k mu_G(I_1(k))` rearranged by summation by parts into
/// `sum_{k>=2} log(k/(k-1)) mu_G([0, 1/k])`, whose terms decay like `1/k^2`;
/// the remainder after `terms` is added from its asymptotic expansion.
pub fn khintchine_abel_series(terms: u64) -> f64 {
    let n = terms.max(2);
    let mut s = 0.0;
    for k in (2..=n).rev() {
        let kf = k as f64;
        s += (1.0 / (kf - 1.0)).ln_1p() * (1.0 / kf).ln_1p();
    }
    // sum_{k>n} of 1/k^2 + 1/(3k^4) + ..., Euler-Maclaurin for 1/k^2
    let x = n as f64;
    let tail = 1.0 / x - 0.5 / (x * x) + 1.0 / (6.0 * x * x * x);
    (s + tail) / LN_2
}

/// `lambda_0 = (2/log 2) int_0^1 -log x / (1 + x) dx`, by composite Simpson
/// after `x = e^{-u}`, which turns the log singularity into the smooth
/// integrand `u e^{-u} / (1 + e^{-u})` on `[0, 60]`.
pub fn lyapunov_quadrature(intervals: usize) -> f64 {
    let n = intervals.max(2) & !1;
    let upper = 60.0;
    let h = upper / n as f64;
    let f = |u: f64| u * (-u).exp() / (1.0 + (-u).exp());
    let mut s = f(0.0) + f(upper);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    2.0 / LN_2 * s * h / 3.0
}

/// Central difference of `log zeta` at `s`: approximates `zeta'(s)/zeta(s)`.
pub fn zeta_log_derivative_fd(s: f64, h: f64) -> Result<f64> {
    Ok((riemann_zeta(s + h)?.ln() - riemann_zeta(s - h)?.ln()) / (2.0 * h))
}
