use serde::Serialize;

use crate::{Error, Result};

/// Dimension `1/(b+1)` of the level sets `E_xi(phi)` for a normalization
/// with `phi(n+1)/phi(n) -> b`; the same for every `xi >= 0`.
pub fn fast_spectrum_dim(b: f64) -> Result<f64> {
    if !(b >= 1.0) || b.is_infinite() {
        return Err(Error::Domain(format!("growth ratio b must be finite and >= 1, got {b}")));
    }
    Ok(1.0 / (b + 1.0))
}

/// Estimate of `b = lim phi(n+1)/phi(n)` with hypothesis diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthEstimate {
    pub ratio: f64,
    /// Last raw ratio `phi(N)/phi(N-1)`.
    pub last_ratio: f64,
    /// Whether `phi(n+1) - phi(n)` increased across all samples.
    pub increments_increasing: bool,
    pub diagnostics: Vec<String>,
}

pub const MIN_GROWTH_SAMPLES: usize = 16;

/// Estimates the growth ratio from samples `phi(1), ..., phi(N)`.
///
/// The raw ratios `r_n = phi(n+1)/phi(n)` of polynomial-type sequences
/// approach their limit like `1/n`, so the last ratio is combined with the
/// one at half the horizon by Richardson extrapolation.
pub fn growth_ratio(samples: &[f64]) -> Result<GrowthEstimate> {
    if samples.len() < MIN_GROWTH_SAMPLES {
        return Err(Error::InsufficientGrid(format!(
            "growth_ratio needs at least {MIN_GROWTH_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Domain("samples must be finite and positive".into()));
    }
    if samples.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("samples must be strictly increasing".into()));
    }
    let n = samples.len() - 1;
    let m = n / 2;
    let ratio_at = |k: usize| samples[k] / samples[k - 1];
    let r_n = ratio_at(n);
    let r_m = ratio_at(m);
    let (nf, mf) = (n as f64, m as f64);
    let extrapolated = (nf * r_n - mf * r_m) / (nf - mf);
    let mut diagnostics = Vec::new();
    let increments: Vec<f64> = samples.windows(2).map(|w| w[1] - w[0]).collect();
    let violations = increments.windows(2).filter(|w| !(w[1] > w[0])).count();
    if violations > 0 {
        diagnostics.push(format!(
            "increments phi(n+1) - phi(n) fail to increase at {violations} of {} places",
            increments.len() - 1
        ));
    }
    if extrapolated < 0.99 {
        diagnostics.push(format!("extrapolated ratio {extrapolated} is well below 1"));
    }
    let ratio = extrapolated.max(1.0);
    Ok(GrowthEstimate {
        ratio,
        last_ratio: r_n,
        increments_increasing: violations == 0,
        diagnostics,
    })
}

/// liminf estimate for the Cantor-type construction with branching `s_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CantorEstimate {
    pub estimate: f64,
    /// Quotients at the last ten indices.
    pub window: Vec<f64>,
    /// Spread of `window`, as a stabilization hint.
    pub window_spread: f64,
}

pub const MIN_CANTOR_HORIZON: u64 = 32;

/// Estimates `liminf log(s_1...s_n) / (2 log(s_1...s_n) + log s_{n+1})`.
///
/// `log_s(n)` returns `log s_n`, so sequences like `2^{2^n}` stay finite.
/// The liminf is approximated by the smallest quotient over the trailing
/// half `N/2 <= n <= N` of the horizon; early indices carry transient values
/// that say nothing about the limit.
pub fn cantor_dimension<F>(log_s: F, horizon: u64) -> Result<CantorEstimate>
where
    F: Fn(u64) -> f64,
{
    if horizon < MIN_CANTOR_HORIZON {
        return Err(Error::InsufficientGrid(format!(
            "cantor_dimension needs a horizon of at least {MIN_CANTOR_HORIZON}, got {horizon}"
        )));
    }
    let ln3 = 3f64.ln();
    let mut partial = 0.0f64;
    let mut next = log_s(1);
    let mut quotients = Vec::with_capacity(horizon as usize);
    for n in 1..=horizon {
        let current = next;
        if !(current >= ln3 * (1.0 - 1e-15)) || !current.is_finite() {
            return Err(Error::Hypothesis(format!("s_{n} must be at least 3 (log s_{n} = {current})")));
        }
        partial += current;
        next = log_s(n + 1);
        quotients.push(partial / (2.0 * partial + next));
    }
    let start = (horizon / 2) as usize;
    let estimate = quotients[start..].iter().copied().fold(f64::INFINITY, f64::min);
    let window = quotients[quotients.len() - 10..].to_vec();
    let hi = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = window.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(CantorEstimate {
        estimate,
        window,
        window_spread: hi - lo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn fast_dimension_values() {
        assert_eq!(fast_spectrum_dim(1.0).unwrap(), 0.5);
        assert_eq!(fast_spectrum_dim(2.0).unwrap(), 1.0 / 3.0);
        assert_eq!(fast_spectrum_dim(3.0).unwrap(), 0.25);
        assert!(fast_spectrum_dim(1e6).unwrap() < 2e-6);
        assert!(fast_spectrum_dim(0.5).is_err());
        assert!(fast_spectrum_dim(f64::NAN).is_err());
    }

    #[test]
    fn growth_ratio_examples() {
        let squares: Vec<f64> = (1..=64).map(|n| (n * n) as f64).collect();
        let g = growth_ratio(&squares).unwrap();
        assert!((g.ratio - 1.0).abs() < 0.02);
        assert!(g.increments_increasing);

        let powers: Vec<f64> = (1..=40).map(|n| 3f64.powi(n)).collect();
        assert!((growth_ratio(&powers).unwrap().ratio - 3.0).abs() < 1e-9);

        let nlogn: Vec<f64> = (2..=200).map(|n| n as f64 * (n as f64).ln()).collect();
        let g = growth_ratio(&nlogn).unwrap();
        assert!((g.ratio - 1.0).abs() < 0.01);
        assert!(g.increments_increasing && g.diagnostics.is_empty());

        let concave: Vec<f64> = (1..=32).map(|n| (n as f64).sqrt()).collect();
        let g = growth_ratio(&concave).unwrap();
        assert!(!g.increments_increasing);
        assert!(!g.diagnostics.is_empty());

        assert!(growth_ratio(&squares[..10]).is_err());
    }

    #[test]
    fn cantor_examples() {
        let linear = |n: u64| (n as f64 + 2.0).ln();
        let e = cantor_dimension(linear, 10_000).unwrap();
        assert!((e.estimate - 0.5).abs() < 1e-3);
        let doubled = cantor_dimension(linear, 20_000).unwrap();
        assert!((doubled.estimate - e.estimate).abs() < 1e-4);

        let doubly_exp = |n: u64| 2f64.powi(n as i32) * LN_2;
        let e = cantor_dimension(doubly_exp, 40).unwrap();
        assert!((e.estimate - 1.0 / 3.0).abs() < 1e-3);
        let doubled = cantor_dimension(doubly_exp, 80).unwrap();
        assert!((doubled.estimate - e.estimate).abs() < 1e-6);

        assert!(matches!(cantor_dimension(|_| 2f64.ln(), 64), Err(Error::Hypothesis(_))));
        assert!(cantor_dimension(linear, 8).is_err());
    }

    #[test]
    fn cantor_agrees_with_fast_formula() {
        // phi(n) = sum_{k<=n} log s_k with s_k = 2^{2^k}: ratio 2, dimension 1/3
        let log_s = |k: u64| 2f64.powi(k as i32) * LN_2;
        let phi: Vec<f64> = (1..=40u64).scan(0.0, |acc, k| {
            *acc += log_s(k);
            Some(*acc)
        }).collect();
        let b = growth_ratio(&phi).unwrap().ratio;
        let fast = fast_spectrum_dim(b).unwrap();
        let cantor = cantor_dimension(log_s, 40).unwrap().estimate;
        assert!((fast - cantor).abs() < 1e-3);

        // s_k = 3 * 2^k: phi grows quadratically, ratio 1, dimension 1/2
        let log_s = |k: u64| 3f64.ln() + k as f64 * LN_2;
        let phi: Vec<f64> = (1..=4000u64).scan(0.0, |acc, k| {
            *acc += log_s(k);
            Some(*acc)
        }).collect();
        let fast = fast_spectrum_dim(growth_ratio(&phi).unwrap().ratio).unwrap();
        let cantor = cantor_dimension(log_s, 4000).unwrap().estimate;
        assert!((fast - cantor).abs() < 1e-3, "{fast} vs {cantor}");
    }
}
