//! Tail of the transfer-operator sum over digits `i > M`.
//!
//! For a polynomial `g(y) = sum_m c_m y^m`, the tail at a point `x` is
//!
//! ```text
//! sum_{i>M} i^q (i+x)^{-2t} g(1/(i+x)) = sum_m c_m S_m(x),
//! S_m(x) = sum_{i>M} i^q (i+x)^{-(2t+m)}.
//! ```
//!
//! Writing `i^q = (i+x)^q (1 - x/(i+x))^q` and expanding binomially gives
//! `S_m(x) = sum_r binom(q, r) (-x)^r zeta(2t - q + m + r, M + 1 + x)`, a
//! rapidly convergent series because `x / (M + 1 + x) <= 1/(M + 2)`. The
//! partial derivatives in `t` and `q` follow from the same expansion and
//! the `s`-derivative of the Hurwitz zeta function.

use crate::special::hurwitz_zeta_with_derivative;

/// `S_m` and its `t`/`q` partial derivatives for `m = 0..order`.
#[derive(Debug, Clone)]
pub(crate) struct TailSums {
    pub value: Vec<f64>,
    pub d_t: Vec<f64>,
    pub d_q: Vec<f64>,
    /// Size of the first neglected binomial term, relative to `S_0`.
    pub truncation: f64,
}

const MAX_BINOMIAL_TERMS: usize = 400;

pub(crate) fn tail_sums(x: f64, cutoff: usize, t: f64, q: f64, order: usize, derivs: bool) -> TailSums {
    let a = cutoff as f64 + 1.0 + x;
    let s0 = 2.0 * t - q;

    // binomial coefficients binom(q, r) (-x)^r and their q-derivatives
    let mut beta = vec![1.0];
    let mut dbeta = vec![0.0];
    let ratio = x / a;
    let mut scale = 1.0; // |beta_r| a^{-r} envelope
    let mut peak = 1.0f64;
    let mut truncation = 0.0;
    if x > 0.0 {
        for r in 1..MAX_BINOMIAL_TERMS {
            let rf = r as f64;
            let factor = (q - rf + 1.0) * (-x) / rf;
            let b = beta[r - 1] * factor;
            let db = dbeta[r - 1] * factor + beta[r - 1] * (-x) / rf;
            // the q-derivative terms survive where binom(q, r) vanishes at integer q
            scale *= (q - rf + 1.0).abs().max(1.0) / rf * ratio;
            peak = peak.max(scale);
            beta.push(b);
            dbeta.push(db);
            if scale < 1e-18 * peak && rf > q.abs() {
                truncation = scale;
                break;
            }
        }
    }
    let terms = beta.len();
    let span = order + terms - 1;
    let mut zeta = Vec::with_capacity(span);
    let mut dzeta = Vec::with_capacity(span);
    for u in 0..span {
        let (z, dz) = hurwitz_zeta_with_derivative(s0 + u as f64, a);
        zeta.push(z);
        dzeta.push(dz);
    }
    let mut value = vec![0.0; order];
    let mut d_t = vec![0.0; order];
    let mut d_q = vec![0.0; order];
    for m in 0..order {
        let mut v = 0.0;
        let mut vt = 0.0;
        let mut vq = 0.0;
        for r in 0..terms {
            let z = zeta[m + r];
            v += beta[r] * z;
            if derivs {
                let dz = dzeta[m + r];
                // d/dt zeta(2t - q + ..) = 2 zeta', d/dq = -zeta'
                vt += 2.0 * beta[r] * dz;
                vq += dbeta[r] * z - beta[r] * dz;
            }
        }
        value[m] = v;
        d_t[m] = vt;
        d_q[m] = vq;
    }
    TailSums {
        value,
        d_t,
        d_q,
        truncation,
    }
}

/// Tail sums against the conjugated basis: `E_m(x) = sum_{i>M} i^q
/// (i+x)^{-(2t+m)} (1 + theta/(i+x))^{-2t}`, obtained from the plain sums
/// through the binomial series of `(1 + theta y)^{-2t}` in `y = 1/(i+x)`.
pub(crate) fn conjugated_tail_sums(
    x: f64,
    cutoff: usize,
    t: f64,
    q: f64,
    theta: f64,
    order: usize,
    derivs: bool,
) -> TailSums {
    let ratio = theta / (cutoff as f64 + 1.0 + x);
    let mut beta = vec![1.0];
    let mut dbeta = vec![0.0];
    let mut envelope = 1.0;
    let mut peak = 1.0f64;
    let sigma = -2.0 * t;
    for n in 1..MAX_BINOMIAL_TERMS {
        let nf = n as f64;
        let factor = (sigma - nf + 1.0) * theta / nf;
        beta.push(beta[n - 1] * factor);
        dbeta.push(dbeta[n - 1] * factor - 2.0 * theta / nf * beta[n - 1]);
        envelope *= (sigma - nf + 1.0).abs().max(1.0) / nf * ratio;
        peak = peak.max(envelope);
        if envelope < 1e-18 * peak && nf > sigma.abs() {
            break;
        }
    }
    let terms = beta.len();
    let plain = tail_sums(x, cutoff, t, q, order + terms - 1, derivs);
    let mut value = vec![0.0; order];
    let mut d_t = vec![0.0; order];
    let mut d_q = vec![0.0; order];
    for m in 0..order {
        for n in 0..terms {
            value[m] += beta[n] * plain.value[m + n];
            if derivs {
                d_t[m] += beta[n] * plain.d_t[m + n] + dbeta[n] * plain.value[m + n];
                d_q[m] += beta[n] * plain.d_q[m + n];
            }
        }
    }
    TailSums {
        value,
        d_t,
        d_q,
        truncation: plain.truncation.max(envelope),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(x: f64, cutoff: usize, t: f64, q: f64, m: usize, weight: impl Fn(f64) -> f64) -> f64 {
        // explicit sum to 2e6; the exponents used below make the remainder negligible
        let mut s = 0.0;
        let n = 2_000_000usize;
        for i in (cutoff + 1..=n).rev() {
            let fi = i as f64;
            s += weight(fi) * fi.powf(q) * (fi + x).powf(-(2.0 * t + m as f64));
        }
        s
    }

    #[test]
    fn matches_direct_summation() {
        let (t, q) = (2.3, 0.4);
        for &x in &[0.0, 0.25, 1.0] {
            let ts = tail_sums(x, 8, t, q, 4, true);
            for m in 0..4 {
                let b = brute(x, 8, t, q, m, |_| 1.0);
                assert!((ts.value[m] - b).abs() < 1e-11 * b.abs().max(1e-300) + 1e-15, "x={x} m={m}");
                let bq = brute(x, 8, t, q, m, |i| i.ln());
                assert!((ts.d_q[m] - bq).abs() < 1e-9 * bq.abs(), "dq x={x} m={m}: {} vs {bq}", ts.d_q[m]);
                let bt = brute(x, 8, t, q, m, |i| -2.0 * (i + x).ln());
                assert!((ts.d_t[m] - bt).abs() < 1e-9 * bt.abs(), "dt x={x} m={m}");
            }
        }
    }

    #[test]
    fn conjugated_matches_direct_summation() {
        let theta = (5f64.sqrt() - 1.0) / 2.0;
        for &(t, q, x) in &[(2.3, 0.4, 0.5), (3.0, -1.0, 1.0), (2.0, 0.0, 0.0)] {
            let ts = conjugated_tail_sums(x, 8, t, q, theta, 3, true);
            for m in 0..3 {
                let conj = |i: f64| (1.0 + theta / (i + x)).powf(-2.0 * t);
                let b = brute(x, 8, t, q, m, conj);
                assert!((ts.value[m] - b).abs() < 1e-11 * b, "({t},{q},{x}) m={m}");
                let bt = brute(x, 8, t, q, m, |i| {
                    conj(i) * (-2.0 * (i + x).ln() - 2.0 * (1.0 + theta / (i + x)).ln())
                });
                assert!((ts.d_t[m] - bt).abs() < 1e-9 * bt.abs(), "dt ({t},{q},{x}) m={m}");
                let bq = brute(x, 8, t, q, m, |i| conj(i) * i.ln());
                assert!((ts.d_q[m] - bq).abs() < 1e-9 * bq.abs(), "dq ({t},{q},{x}) m={m}");
            }
        }
    }

    #[test]
    fn negative_q_expansion() {
        let (t, q) = (0.2, -3.5);
        let x = 0.8;
        let ts = tail_sums(x, 8, t, q, 2, false);
        let b = brute(x, 8, t, q, 0, |_| 1.0);
        assert!((ts.value[0] - b).abs() < 1e-12 * b);
    }
}
