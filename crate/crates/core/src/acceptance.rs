//! Self-verification suite: fifteen numbered criteria, each with a pinned
//! tolerance and a runtime budget. Shared by the integration tests and the
//! command-line `verify` command.

use std::f64::consts::LN_2;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cf::{
    construct_point, continuant, convergents, gauss_map_rational, ln_biguint, BlockRule, PartialQuotients,
};
use crate::oracle::{cylinder_pressure_estimate, khintchine_abel_series, lyapunov_quadrature};
use crate::special::{constants, riemann_zeta};
use crate::spectrum::{
    bounded_digit_dimension, cantor_dimension, fast_spectrum_dim, khintchine_curve, khintchine_point,
    lyapunov_point, lyapunov_point_nested, spectrum_shape_report, SolverConfig,
};
use crate::transfer::{
    sample_digits, Alphabet, Discretization, PressureParams, TransferOperator, DEFAULT_CUTOFF, DEFAULT_ORDER,
};
use crate::Result;

/// Discretization and seed the suite runs with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcceptanceConfig {
    pub cutoff: usize,
    pub order: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        Self {
            cutoff: DEFAULT_CUTOFF,
            order: DEFAULT_ORDER,
            tolerance: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub budget: Duration,
}

const fn criterion(id: u32, name: &'static str, secs: u64) -> Criterion {
    Criterion {
        id,
        name,
        budget: Duration::from_secs(secs),
    }
}

const CRITERIA: [Criterion; 15] = [
    criterion(1, "khintchine constant", 1),
    criterion(2, "lyapunov constant", 1),
    criterion(3, "pressure normalization", 1),
    criterion(4, "pressure boundary identity", 2),
    criterion(5, "derivative anchors", 2),
    criterion(6, "pressure sandwich and convexity", 30),
    criterion(7, "cylinder-sum oracle", 60),
    criterion(8, "spectrum peaks", 10),
    criterion(9, "khintchine spectrum shape", 300),
    criterion(10, "lyapunov route equivalence", 60),
    criterion(11, "bounded-digit dimension", 5),
    criterion(12, "fast spectrum", 2),
    criterion(13, "constructed points", 1),
    criterion(14, "gibbs sampling ergodicity", 5),
    criterion(15, "exact-arithmetic properties", 5),
];

pub fn criteria() -> &'static [Criterion] {
    &CRITERIA
}

/// Result of one criterion. `measured` and `expected` are the headline
/// quantity; multi-part checks report the worst deviation against 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Outcome {
    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.budget
    }

    /// One report line.
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<32} measured={:.10e} expected={:.10e} tol={:.1e} time={:.3}s/{}s{}{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.expected,
            self.tolerance,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            if self.detail.is_empty() { "" } else { "  " },
            self.detail,
        )
    }
}

struct Check {
    passed: bool,
    measured: f64,
    expected: f64,
    tolerance: f64,
    detail: String,
}

impl Check {
    fn near(measured: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            passed: (measured - expected).abs() < tolerance,
            measured,
            expected,
            tolerance,
            detail: format!("delta={:.3e}", measured - expected),
        }
    }

    /// A worst-case deviation that must stay below `tolerance`.
    fn deviation(worst: f64, tolerance: f64) -> Self {
        Self::near(worst, 0.0, tolerance)
    }

    fn and(mut self, ok: bool, note: impl Into<String>) -> Self {
        let note = note.into();
        if !note.is_empty() {
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(&note);
        }
        self.passed &= ok;
        self
    }
}

/// Runs one criterion by id.
pub fn run_one(id: u32, cfg: &AcceptanceConfig) -> Option<Outcome> {
    let c = CRITERIA.iter().find(|c| c.id == id)?;
    let start = Instant::now();
    let result = match id {
        1 => khintchine_constant_check(),
        2 => lyapunov_constant_check(),
        3 => normalization(cfg),
        4 => boundary_identity(cfg),
        5 => derivative_anchors(cfg),
        6 => sandwich_and_convexity(cfg),
        7 => cylinder_oracle(cfg),
        8 => spectrum_peaks(cfg),
        9 => khintchine_shape(cfg),
        10 => route_equivalence(cfg),
        11 => bounded_digits(cfg),
        12 => fast_spectrum(),
        13 => constructed_points(),
        14 => gibbs_sampling(cfg),
        15 => exact_properties(cfg),
        _ => unreachable!(),
    };
    let elapsed = start.elapsed();
    let check = result.unwrap_or_else(|e| Check {
        passed: false,
        measured: f64::NAN,
        expected: f64::NAN,
        tolerance: f64::NAN,
        detail: format!("error: {e}"),
    });
    let mut out = Outcome {
        id: c.id,
        name: c.name,
        passed: check.passed,
        measured: check.measured,
        expected: check.expected,
        tolerance: check.tolerance,
        detail: check.detail,
        elapsed,
        budget: c.budget,
    };
    if !out.within_budget() {
        out.passed = false;
        out.detail.push_str("; runtime budget exceeded");
    }
    Some(out)
}

/// Runs every criterion in order.
pub fn run(cfg: &AcceptanceConfig) -> Vec<Outcome> {
    CRITERIA.iter().filter_map(|c| run_one(c.id, cfg)).collect()
}

fn operator(cfg: &AcceptanceConfig) -> Result<TransferOperator> {
    TransferOperator::full(cfg.cutoff, cfg.order)
}

fn khintchine_constant_check() -> Result<Check> {
    let xi0 = constants().xi0;
    let oracle = khintchine_abel_series(1_000_000);
    let gap = (oracle - xi0).abs();
    Ok(Check::near(xi0.exp(), 2.6854, 1e-4).and(gap < 1e-6, format!("cylinder-series gap={gap:.3e}")))
}

fn lyapunov_constant_check() -> Result<Check> {
    let lambda0 = constants().lambda0;
    let gap = (lyapunov_quadrature(20_000) - lambda0).abs();
    Ok(Check::near(lambda0, 2.37314, 5e-6).and(gap < 1e-10, format!("quadrature gap={gap:.3e}")))
}

fn normalization(cfg: &AcceptanceConfig) -> Result<Check> {
    let p = operator(cfg)?.pressure_value(PressureParams::new(1.0, 0.0))?;
    Ok(Check::near(p, 0.0, 1e-6))
}

fn boundary_identity(cfg: &AcceptanceConfig) -> Result<Check> {
    let op = operator(cfg)?;
    let mut worst = 0.0f64;
    for q in [-1.5, -2.0, -3.0, -4.0] {
        let p = op.pressure_value(PressureParams::new(0.0, q))?;
        worst = worst.max((p - riemann_zeta(-q)?.ln()).abs());
    }
    Ok(Check::deviation(worst, 1e-6))
}

fn derivative_anchors(cfg: &AcceptanceConfig) -> Result<Check> {
    let c = constants();
    let (dt, dq) = operator(cfg)?.checked_gradient(PressureParams::new(1.0, 0.0))?;
    let (eq, et) = ((dq - c.xi0).abs(), (dt + c.lambda0).abs());
    Ok(Check::deviation(eq.max(et), 1e-3).and(true, format!("dP/dq-xi0={eq:.3e}, dP/dt+lambda0={et:.3e}")))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn sandwich_and_convexity(cfg: &AcceptanceConfig) -> Result<Check> {
    const EPS: f64 = 1e-8;
    const H: f64 = 1e-3;
    let op = operator(cfg)?;
    let grad = |t: f64, q: f64| -> Result<(f64, f64)> {
        let r = op.pressure(PressureParams::new(t, q))?;
        Ok((r.dp_dt, r.dp_dq))
    };
    let mut sandwich_violation = 0.0f64;
    let mut min_eigenvalue = f64::INFINITY;
    for t in linspace(0.7, 1.0, 7) {
        for q in linspace(-1.5, 0.3, 7) {
            let p = op.pressure_value(PressureParams::new(t, q))?;
            let upper = riemann_zeta(2.0 * t - q)?.ln();
            let lower = upper - t * 4f64.ln();
            sandwich_violation = sandwich_violation.max(lower - EPS - p).max(p - upper - EPS);
            let (tp, tm) = (grad(t + H, q)?, grad(t - H, q)?);
            let (qp, qm) = (grad(t, q + H)?, grad(t, q - H)?);
            let ptt = (tp.0 - tm.0) / (2.0 * H);
            let pqq = (qp.1 - qm.1) / (2.0 * H);
            let ptq = 0.5 * ((tp.1 - tm.1) + (qp.0 - qm.0)) / (2.0 * H);
            let mean = 0.5 * (ptt + pqq);
            let radius = (0.25 * (ptt - pqq).powi(2) + ptq * ptq).sqrt();
            min_eigenvalue = min_eigenvalue.min(mean - radius);
        }
    }
    let ok = min_eigenvalue >= -1e-6;
    Ok(Check::deviation(sandwich_violation.max(0.0), EPS).and(
        ok,
        format!("sandwich excess={sandwich_violation:.3e}, min Hessian eigenvalue={min_eigenvalue:.3e}"),
    ))
}

fn cylinder_oracle(cfg: &AcceptanceConfig) -> Result<Check> {
    let op = TransferOperator::new(Alphabet::truncated(cfg.cutoff)?, Discretization::chebyshev(cfg.order)?);
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for (t, q) in [(1.0, 0.0), (0.8, 0.0), (0.9, 0.5), (0.7, -0.5), (0.6, 0.1)] {
        let p = PressureParams::new(t, q);
        let a = op.pressure_value(p)?;
        let b = cylinder_pressure_estimate(4, 64, p)?;
        worst = worst.max((a - b).abs());
        notes.push(format!("({t},{q}):{:.2e}", a - b));
    }
    Ok(Check::deviation(worst, 0.02).and(true, notes.join(" ")))
}

fn spectrum_peaks(cfg: &AcceptanceConfig) -> Result<Check> {
    let op = operator(cfg)?;
    let scfg = SolverConfig::with_tolerance(cfg.tolerance);
    let c = constants();
    let k = khintchine_point(c.xi0, &op, &scfg)?;
    let l = lyapunov_point(c.lambda0, &op, &scfg)?;
    let worst = [k.dimension - 1.0, k.q_value, l.dimension - 1.0, l.q_value]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(Check::deviation(worst, 1e-4).and(
        true,
        format!(
            "khintchine=({:.3e},{:.3e}) lyapunov=({:.3e},{:.3e})",
            k.dimension - 1.0,
            k.q_value,
            l.dimension - 1.0,
            l.q_value
        ),
    ))
}

fn khintchine_shape(cfg: &AcceptanceConfig) -> Result<Check> {
    let op = operator(cfg)?;
    let scfg = SolverConfig::with_tolerance(cfg.tolerance);
    let (lo, hi, n) = (0.3f64, 40.0f64, 60);
    let grid: Vec<f64> = (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect();
    let curve = khintchine_curve(&grid, &op, &scfg)?;
    let report = spectrum_shape_report(&curve)?;
    let last = curve
        .points
        .iter()
        .find(|p| (p.exponent - hi).abs() < 1e-9)
        .map_or(f64::NAN, |p| p.dimension);
    let ok = curve.failures.is_empty()
        && report.slope_sign_changes == 1
        && report.q_sign_changes == 1
        && report.q_sign_change_at_peak
        && report.curvature_at_peak < 0.0
        && report.convexity_witness.is_some();
    let witness = report
        .convexity_witness
        .map_or("none".to_string(), |(a, b)| format!("[{a:.3},{b:.3}]"));
    Ok(Check::near(last, 0.53, 0.03).and(
        ok,
        format!(
            "failures={} peak={:.4} slope sign changes={} q sign changes={} curvature={:.3e} witness={witness}",
            curve.failures.len(),
            report.peak_exponent,
            report.slope_sign_changes,
            report.q_sign_changes,
            report.curvature_at_peak
        ),
    ))
}

fn route_equivalence(cfg: &AcceptanceConfig) -> Result<Check> {
    let op = operator(cfg)?;
    let scfg = SolverConfig::with_tolerance(cfg.tolerance);
    let lo = constants().gamma0 + 0.06;
    let hi = 30.0f64;
    let mut worst = 0.0f64;
    for i in 0..10 {
        let beta = (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / 9.0).exp();
        let a = lyapunov_point(beta, &op, &scfg)?;
        let b = lyapunov_point_nested(beta, &op, &scfg)?;
        worst = worst.max((a.dimension - b.dimension).abs());
    }
    Ok(Check::deviation(worst, 1e-8))
}

fn bounded_digits(cfg: &AcceptanceConfig) -> Result<Check> {
    let d = bounded_digit_dimension(&[1, 2], &Discretization::chebyshev(cfg.order)?)?;
    Ok(Check::near(d, 0.5312805, 1e-5))
}

fn fast_spectrum() -> Result<Check> {
    let exact = [1.0, 2.0, 3.0]
        .iter()
        .all(|&b| fast_spectrum_dim(b).is_ok_and(|d| d == 1.0 / (b + 1.0)));
    let doubly = cantor_dimension(|n| 2f64.powi(n as i32) * LN_2, 40)?.estimate;
    let linear = cantor_dimension(|n| (n as f64 + 2.0).ln(), 10_000)?.estimate;
    let (e1, e2) = (doubly - 1.0 / 3.0, linear - 0.5);
    Ok(Check::deviation(e1.abs().max(e2.abs()), 1e-3).and(
        exact,
        format!("exact 1/(b+1)={exact}, 2^(2^n) delta={e1:.3e}, n+2 delta={e2:.3e}"),
    ))
}

fn constructed_points() -> Result<Check> {
    let s = construct_point(1.0, BlockRule::Squares)?.exponent_estimates(10_000, 64);
    let dl = s.lyapunov_estimate - (2.0 + constants().gamma0);
    let dk = s.khintchine_estimate - 1.0;
    Ok(Check::near(s.khintchine_estimate, 1.0, 0.05)
        .and(dl.abs() < 0.05, format!("lyapunov={:.6} (delta {dl:.3e})", s.lyapunov_estimate))
        .and(true, format!("khintchine delta={dk:.3e}")))
}

fn gibbs_sampling(cfg: &AcceptanceConfig) -> Result<Check> {
    let g = operator(cfg)?.gibbs(PressureParams::new(1.0, 0.0))?;
    let digits = sample_digits(&g, 100_000, cfg.seed)?;
    let mean = digits.digits().iter().map(ln_biguint).sum::<f64>() / digits.len() as f64;
    Ok(Check::near(mean, constants().xi0, 0.05))
}

/// Window constant `K = e^4`, bracketed by rationals: `1/109 > 1/(2K)` and
/// `54 < K`, so passing the rational window implies the real one.
const JACOBIAN_LOWER: (u32, u32) = (1, 109);
const JACOBIAN_UPPER: u32 = 54;

/// Checks the four exact identities on one digit tuple with tail `y`.
/// Returns the name of the first failing property.
pub fn exact_property_violation(digits: &[u64], y: &BigRational) -> Option<&'static str> {
    let pq = PartialQuotients::from_u64(digits).ok()?;
    let n = digits.len();
    let conv = convergents(&pq);
    let (p_n, q_n) = (BigInt::from(conv[n - 1].p.clone()), BigInt::from(conv[n - 1].q.clone()));
    let (p_prev, q_prev) = if n >= 2 {
        (BigInt::from(conv[n - 2].p.clone()), BigInt::from(conv[n - 2].q.clone()))
    } else {
        (BigInt::from(0), BigInt::one())
    };
    let det = &p_n * &q_prev - &p_prev * &q_n;
    let sign = if n % 2 == 1 { BigInt::one() } else { -BigInt::one() };
    if det != sign {
        return Some("determinant identity");
    }
    if continuant(&pq) != continuant(&pq.reversed()) {
        return Some("mirror symmetry");
    }
    let prod: BigUint = digits.iter().map(|&a| BigUint::from(a)).product();
    let prod1: BigUint = digits.iter().map(|&a| BigUint::from(a + 1)).product();
    let q_u = &conv[n - 1].q;
    if !(&prod <= q_u && q_u <= &prod1) {
        return Some("continuant sandwich");
    }
    // x = (p_n + y p_{n-1}) / (q_n + y q_{n-1}); |(T^n)'(x)| = prod (T^j x)^{-2}
    let num = BigRational::from(p_n) + y * BigRational::from(p_prev);
    let den = BigRational::from(q_n.clone()) + y * BigRational::from(q_prev);
    let mut x = num / den;
    let mut derivative = BigRational::one();
    for _ in 0..n {
        if !x.is_positive() {
            return Some("jacobian window");
        }
        derivative /= &x * &x;
        x = gauss_map_rational(&x).ok()?;
    }
    if &x != y {
        return Some("jacobian window");
    }
    let ratio = BigRational::from(&q_n * &q_n) / derivative;
    let lower = BigRational::new(JACOBIAN_LOWER.0.into(), JACOBIAN_LOWER.1.into());
    if ratio < lower || ratio > BigRational::from_integer(JACOBIAN_UPPER.into()) {
        return Some("jacobian window");
    }
    None
}

fn exact_properties(cfg: &AcceptanceConfig) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut failures = Vec::new();
    let trials = 1000;
    for _ in 0..trials {
        let n = rng.random_range(1..=12);
        let digits: Vec<u64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.1) {
                    rng.random_range(1..=1_000_000)
                } else {
                    rng.random_range(1..=20)
                }
            })
            .collect();
        let den: u64 = rng.random_range(2..=1000);
        let y = BigRational::new(rng.random_range(1..den).into(), den.into());
        if let Some(what) = exact_property_violation(&digits, &y) {
            failures.push(format!("{what} at {digits:?}"));
        }
    }
    let mut detail = format!("{} of {trials} tuples violate a property", failures.len());
    if let Some(first) = failures.first() {
        detail.push_str(&format!(", first: {first}"));
    }
    Ok(Check {
        passed: failures.is_empty(),
        measured: failures.len() as f64,
        expected: 0.0,
        tolerance: 0.0,
        detail,
    })
}
