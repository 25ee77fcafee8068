//! Zeta functions and the constants attached to the Gauss measure.

use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use serde::Serialize;

use crate::{Error, Result};

/// `B_{2k} / (2k)!` for `k = 1..=10`.
const BERNOULLI_OVER_FACTORIAL: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
    43_867.0 / 5_109_094_217_170_944_000.0,
    -174_611.0 / 802_857_662_698_291_200_000.0,
];

/// Hurwitz zeta `sum_{n>=0} (a+n)^{-s}` together with its derivative in `s`.
///
/// Direct summation up to a shift `A = a + N`, then Euler-Maclaurin with ten
/// Bernoulli corrections. `N` is chosen so that `A >= s + 20`, which keeps the
/// correction series well inside its asymptotic regime; summation stops
/// earlier once the remaining tail is below double precision.
pub fn hurwitz_zeta_with_derivative(s: f64, a: f64) -> (f64, f64) {
    debug_assert!(s > 1.0 && a > 0.0);
    let target = s + 20.0;
    let mut sum = 0.0;
    let mut dsum = 0.0;
    let mut shift = a;
    let mut negligible_tail = false;
    loop {
        let ln_shift = shift.ln();
        let tail = (-(s - 1.0) * ln_shift).exp() / (s - 1.0);
        if sum > 0.0 && tail < 1e-20 * sum {
            negligible_tail = true;
            break;
        }
        if shift >= target {
            break;
        }
        let term = (-s * ln_shift).exp();
        sum += term;
        dsum -= ln_shift * term;
        shift += 1.0;
    }

    let ln_a = shift.ln();
    let a_pow = (-s * ln_a).exp(); // A^{-s}
    let a_pow1 = a_pow * shift; // A^{1-s}
    let sm1 = s - 1.0;
    sum += a_pow1 / sm1 + 0.5 * a_pow;
    dsum += -ln_a * a_pow1 / sm1 - a_pow1 / (sm1 * sm1) - 0.5 * ln_a * a_pow;
    if negligible_tail {
        // the shift may be far below s, where the Bernoulli series diverges
        return (sum, dsum);
    }

    // rising factorial (s)_{2k-1} and its log-derivative
    let mut rising = s;
    let mut dlog_rising = 1.0 / s;
    let mut power = a_pow / shift; // A^{-s-1}
    let inv_a2 = 1.0 / (shift * shift);
    for (k, coeff) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let term = coeff * rising * power;
        sum += term;
        dsum += term * (dlog_rising - ln_a);
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        let m = (2 * k + 1) as f64;
        rising *= (s + m) * (s + m + 1.0);
        dlog_rising += 1.0 / (s + m) + 1.0 / (s + m + 1.0);
        power *= inv_a2;
    }
    (sum, dsum)
}

/// Hurwitz zeta `sum_{n>=0} (a+n)^{-s}` for `s > 1`, `a > 0`.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    hurwitz_zeta_with_derivative(s, a).0
}

/// Riemann zeta on the real half-line `s > 1`.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::Domain(format!("riemann_zeta requires s > 1, got {s}")));
    }
    Ok(hurwitz_zeta(s, 1.0))
}

/// Derivative `zeta'(s)` for `s > 1`.
pub fn riemann_zeta_derivative(s: f64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::Domain(format!("zeta derivative requires s > 1, got {s}")));
    }
    Ok(hurwitz_zeta_with_derivative(s, 1.0).1)
}

fn khintchine_term(n: f64) -> f64 {
    n.ln() * (1.0 / (n * (n + 2.0))).ln_1p()
}

/// Partial sum `(1/log 2) sum_{n<=n_max} log n log(1 + 1/(n(n+2)))`.
pub fn khintchine_partial_sum(n_max: u64) -> f64 {
    (2..=n_max).map(|n| khintchine_term(n as f64)).sum::<f64>() / LN_2
}

const KHINTCHINE_TERMS: u64 = 1_000_000;

/// The Khintchine exponent `xi_0 = int log a_1 dmu_G`, in nats.
///
/// This is the logarithm of Khintchine's constant `K_0 = 2.6854...`; the
/// series is summed to `10^6` terms and the remainder is replaced by the
/// integral of its leading asymptotics `log u / u^2 - 2 log u / u^3` from
/// `N + 1/2`, which leaves an error far below `1e-12`.
pub fn khintchine_constant() -> f64 {
    let x = KHINTCHINE_TERMS as f64 + 0.5;
    let lx = x.ln();
    let tail = (lx + 1.0) / x - (2.0 * lx + 1.0) / (2.0 * x * x);
    khintchine_partial_sum(KHINTCHINE_TERMS) + tail / LN_2
}

/// `lambda_0 = pi^2 / (6 log 2)`, the Lyapunov exponent of Lebesgue-almost
/// every point.
pub fn lyapunov_constant() -> f64 {
    PI * PI / (6.0 * LN_2)
}

/// `gamma_0 = 2 log((1 + sqrt 5)/2)`, the smallest possible Lyapunov exponent.
pub fn golden_constant() -> f64 {
    2.0 * ((1.0 + 5f64.sqrt()) / 2.0).ln()
}

/// Published high-precision value of `dim E_2` (digits bounded by 2).
pub const DIM_E2_REFERENCE: f64 = 0.531_280_506_277_205_1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantsTable {
    pub xi0: f64,
    pub lambda0: f64,
    pub gamma0: f64,
    pub dim_e2_reference: f64,
}

/// Constants computed once per process.
pub fn constants() -> &'static ConstantsTable {
    static TABLE: OnceLock<ConstantsTable> = OnceLock::new();
    TABLE.get_or_init(|| ConstantsTable {
        xi0: khintchine_constant(),
        lambda0: lyapunov_constant(),
        gamma0: golden_constant(),
        dim_e2_reference: DIM_E2_REFERENCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_closed_forms() {
        let z2 = riemann_zeta(2.0).unwrap();
        assert!((z2 - PI * PI / 6.0).abs() < 1e-14);
        let z4 = riemann_zeta(4.0).unwrap();
        assert!((z4 - PI.powi(4) / 90.0).abs() < 1e-14);
    }

    #[test]
    fn zeta_three_halves_against_long_partial_sum() {
        // 10^7-term partial sum with a three-term Euler-Maclaurin remainder.
        let n = 10_000_000u64;
        let mut partial = 0.0;
        for k in (1..=n).rev() {
            partial += (k as f64).powf(-1.5);
        }
        let x = n as f64;
        let rem = 2.0 / x.sqrt() - 0.5 * x.powf(-1.5) + 1.5 / 12.0 * x.powf(-2.5);
        let oracle = partial + rem;
        let z = riemann_zeta(1.5).unwrap();
        assert!((z - oracle).abs() < 1e-10 * z, "{z} vs {oracle}");
        assert!((z - 2.612_375_348_685_488).abs() < 1e-12);
    }

    #[test]
    fn zeta_rejects_s_le_one() {
        assert!(matches!(riemann_zeta(1.0), Err(Error::Domain(_))));
        assert!(riemann_zeta(0.5).is_err());
        assert!(riemann_zeta(f64::NAN).is_err());
    }

    #[test]
    fn zeta_limits() {
        assert!(riemann_zeta(40.0).unwrap() - 1.0 < 1e-11);
        assert!(riemann_zeta(40.0).unwrap() > 1.0);
        assert!(riemann_zeta(1.001).unwrap() > 690.0);
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let s = 1.01 + 0.25 * i as f64;
            let z = riemann_zeta(s).unwrap();
            // beyond s ~ 30 consecutive values agree to double precision
            assert!(z < prev || (s > 30.0 && z == prev), "s={s}");
            prev = z;
        }
    }

    #[test]
    fn zeta_derivative_matches_finite_difference() {
        for &s in &[1.2, 2.0, 3.0, 7.5] {
            let h = 1e-5;
            let fd = (riemann_zeta(s + h).unwrap() - riemann_zeta(s - h).unwrap()) / (2.0 * h);
            let d = riemann_zeta_derivative(s).unwrap();
            assert!((fd - d).abs() < 1e-7 * d.abs().max(1.0), "s={s}: {d} vs {fd}");
        }
        // zeta'(2) = -0.93754825431584375...
        assert!((riemann_zeta_derivative(2.0).unwrap() + 0.937_548_254_315_843_8).abs() < 1e-12);
    }

    #[test]
    fn hurwitz_reduces_to_shifted_riemann() {
        // zeta(s, 3) = zeta(s) - 1 - 2^{-s}
        for &s in &[1.05, 1.5, 2.5, 11.0] {
            let expected = riemann_zeta(s).unwrap() - 1.0 - 2f64.powf(-s);
            let h = hurwitz_zeta(s, 3.0);
            assert!((h - expected).abs() < 1e-12 * expected.max(1.0), "s={s}");
        }
    }

    #[test]
    fn khintchine_value() {
        let xi0 = khintchine_constant();
        // exp(xi0) is Khintchine's constant 2.685452001...
        assert!((xi0.exp() - 2.685_452_001_065_306).abs() < 1e-9, "{}", xi0.exp());
        // the n = 1 term vanishes; the first nonzero term is log 2 log(9/8) / log 2
        assert_eq!(khintchine_partial_sum(1), 0.0);
        assert!((khintchine_partial_sum(2) - (9.0f64 / 8.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn constant_table_invariants() {
        let c = constants();
        assert!((c.lambda0 - PI * PI / (6.0 * LN_2)).abs() < 1e-15);
        assert!((c.lambda0 - 2.37314).abs() < 5e-6);
        assert!((c.gamma0 - 0.962_423_650_1).abs() < 1e-10);
        let theta0 = (5f64.sqrt() - 1.0) / 2.0;
        assert!((c.gamma0 + 2.0 * theta0.ln()).abs() < 1e-15);
        // the almost-sure exponents satisfy gamma_0 < 2 xi_0 < lambda_0
        assert!(0.0 < c.gamma0 && c.gamma0 < 2.0 * c.xi0 && 2.0 * c.xi0 < c.lambda0);
    }
}
