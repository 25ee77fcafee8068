//! Continued-fraction arithmetic for the Gauss map `T(x) = 1/x mod 1`.
//!
//! Digits, continuants and convergents are exact (arbitrary-precision
//! integers); floating point only appears at the boundary, in the Birkhoff
//! sums of `log a_j` and `log |T'|`, which are accumulated in the log domain
//! and never through `q_n` itself.

use std::f64::consts::LN_2;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::{Error, Result};

/// A finite, nonempty sequence of partial quotients `(a_1, ..., a_n)`, each `>= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialQuotients(Vec<BigUint>);

impl PartialQuotients {
    pub fn new(digits: Vec<BigUint>) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::Domain("partial quotients must be nonempty".into()));
        }
        if let Some(pos) = digits.iter().position(|d| d.is_zero()) {
            return Err(Error::Domain(format!("partial quotient a_{} is zero", pos + 1)));
        }
        Ok(Self(digits))
    }

    pub fn from_u64(digits: &[u64]) -> Result<Self> {
        Self::new(digits.iter().map(|&d| BigUint::from(d)).collect())
    }

    pub fn digits(&self) -> &[BigUint] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn reversed(&self) -> Self {
        Self(self.0.iter().rev().cloned().collect())
    }

    /// Digits as machine integers, if they all fit.
    pub fn to_u64(&self) -> Option<Vec<u64>> {
        self.0.iter().map(|d| d.to_u64()).collect()
    }

    pub fn into_inner(self) -> Vec<BigUint> {
        self.0
    }
}

impl fmt::Display for PartialQuotients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "]")
    }
}

/// Convergent `p_n / q_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergent {
    pub p: BigUint,
    pub q: BigUint,
}

impl Convergent {
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.p.clone()), BigInt::from(self.q.clone()))
    }
}

/// The rank-`n` fundamental interval `I_n(a_1, ..., a_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    pub digits: PartialQuotients,
    pub left_endpoint: BigRational,
    pub right_endpoint: BigRational,
    pub length: BigRational,
}

impl Cylinder {
    /// Closed-interval membership test.
    pub fn contains(&self, x: &BigRational) -> bool {
        &self.left_endpoint <= x && x <= &self.right_endpoint
    }
}

/// Finite-depth Birkhoff sums along an orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitStats {
    pub n: usize,
    /// `sum_{j<=n} log a_j`
    pub sum_log_digits: f64,
    /// `sum_{j<n} log |T'(T^j x)|`
    pub sum_log_deriv: f64,
    pub khintchine_estimate: f64,
    pub lyapunov_estimate: f64,
}

impl OrbitStats {
    fn new(n: usize, sum_log_digits: f64, sum_log_deriv: f64) -> Self {
        Self {
            n,
            sum_log_digits,
            sum_log_deriv,
            khintchine_estimate: sum_log_digits / n as f64,
            lyapunov_estimate: sum_log_deriv / n as f64,
        }
    }
}

/// Natural logarithm of an arbitrary-precision integer.
pub fn ln_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_u64().unwrap_or(u64::MAX);
    (top as f64).ln() + shift as f64 * LN_2
}

fn ln_rational(num: &BigUint, den: &BigUint) -> f64 {
    ln_biguint(num) - ln_biguint(den)
}

/// `ln(a + y)` for a digit `a >= 1` and `0 <= y < 1`.
fn ln_digit_plus(a: &BigUint, y: f64) -> f64 {
    match a.to_u64() {
        Some(small) if small < (1u64 << 52) => (small as f64 + y).ln(),
        _ => {
            let af = a.to_f64().unwrap_or(f64::INFINITY);
            ln_biguint(a) + (y / af).ln_1p()
        }
    }
}

/// The Gauss map `T(x) = 1/x mod 1`, with `T(0) = 0`.
pub fn gauss_map(x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("gauss_map requires 0 < x < 1, got {x}")));
    }
    let inv = 1.0 / x;
    Ok(inv - inv.floor())
}

/// Exact Gauss map on rationals in `[0, 1)`.
pub fn gauss_map_rational(x: &BigRational) -> Result<BigRational> {
    if x.is_zero() {
        return Ok(BigRational::zero());
    }
    if x < &BigRational::zero() || x >= &BigRational::one() {
        return Err(Error::Domain(format!("gauss_map requires 0 <= x < 1, got {x}")));
    }
    let inv = x.recip();
    Ok(&inv - inv.floor())
}

/// Digits of a double in `(0, 1)`, taken as exact input.
///
/// Each step of `x -> 1/x - a` tracks a bound on the accumulated rounding
/// error; a digit is emitted only when `floor(1/x)` is the same at both ends
/// of the error interval. When it is not, the expansion stops with
/// [`Error::PrecisionLoss`] naming the depth reached. Doubles that are
/// rationals with a short expansion terminate with
/// [`Error::ExpansionTerminated`].
pub fn expand(x: f64, depth: usize) -> Result<PartialQuotients> {
    expand_with_orbit(x, depth).map(|(digits, _)| digits)
}

/// Digits plus the orbit `x, Tx, ..., T^depth x` in floating point.
fn expand_with_orbit(x: f64, depth: usize) -> Result<(PartialQuotients, Vec<f64>)> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("expand requires 0 < x < 1, got {x}")));
    }
    if depth == 0 {
        return Err(Error::Domain("expansion depth must be positive".into()));
    }
    let mut digits = Vec::with_capacity(depth);
    let mut orbit = Vec::with_capacity(depth + 1);
    let mut cur = x;
    let mut err = 0.0f64;
    orbit.push(cur);
    for k in 0..depth {
        if cur == 0.0 && err == 0.0 {
            return Err(Error::ExpansionTerminated {
                available: k,
                requested: depth,
            });
        }
        if cur - err <= 0.0 {
            return Err(Error::PrecisionLoss {
                depth: k + 1,
                residual: cur,
                bound: err,
            });
        }
        let inv = 1.0 / cur;
        let exact = inv.mul_add(cur, -1.0) == 0.0;
        let a = inv.floor();
        if err > 0.0 {
            // widen by one ulp on each side to cover rounding in the bounds themselves
            let hi = (1.0 / (cur - err)).next_up();
            let lo = (1.0 / (cur + err)).next_down();
            if hi.floor() != lo.floor() {
                return Err(Error::PrecisionLoss {
                    depth: k + 1,
                    residual: cur,
                    bound: err,
                });
            }
        }
        let next = inv - a;
        let rounding = if exact { 0.0 } else { inv.next_up() - inv };
        err = err / (cur * (cur - err)) + rounding;
        digits.push(BigUint::from(a as u64));
        cur = next;
        orbit.push(cur);
    }
    Ok((PartialQuotients(digits), orbit))
}

/// Digits of an exact rational in `(0, 1)`.
pub fn expand_rational(x: &BigRational, depth: usize) -> Result<PartialQuotients> {
    expand_rational_with_orbit(x, depth).map(|(digits, _)| digits)
}

/// Digits plus the orbit as (numerator, denominator) pairs.
fn expand_rational_with_orbit(
    x: &BigRational,
    depth: usize,
) -> Result<(PartialQuotients, Vec<(BigUint, BigUint)>)> {
    if x <= &BigRational::zero() || x >= &BigRational::one() {
        return Err(Error::Domain(format!("expand requires 0 < x < 1, got {x}")));
    }
    if depth == 0 {
        return Err(Error::Domain("expansion depth must be positive".into()));
    }
    let mut num = x.numer().magnitude().clone();
    let mut den = x.denom().magnitude().clone();
    let mut digits = Vec::with_capacity(depth);
    let mut orbit = Vec::with_capacity(depth + 1);
    orbit.push((num.clone(), den.clone()));
    for k in 0..depth {
        if num.is_zero() {
            return Err(Error::ExpansionTerminated {
                available: k,
                requested: depth,
            });
        }
        let (a, r) = den.div_rem(&num);
        digits.push(a);
        den = std::mem::replace(&mut num, r);
        orbit.push((num.clone(), den.clone()));
    }
    Ok((PartialQuotients(digits), orbit))
}

/// The continuant `Q_n(e_1, ..., e_n)`, equal to the denominator `q_n`.
pub fn continuant(digits: &PartialQuotients) -> BigUint {
    let mut prev = BigUint::zero();
    let mut cur = BigUint::one();
    for d in digits.digits() {
        let next = d * &cur + &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// All convergents `p_1/q_1, ..., p_n/q_n`.
pub fn convergents(digits: &PartialQuotients) -> Vec<Convergent> {
    let (mut p_prev, mut p) = (BigUint::one(), BigUint::zero());
    let (mut q_prev, mut q) = (BigUint::zero(), BigUint::one());
    let mut out = Vec::with_capacity(digits.len());
    for d in digits.digits() {
        let p_next = d * &p + &p_prev;
        let q_next = d * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        out.push(Convergent {
            p: p.clone(),
            q: q.clone(),
        });
    }
    out
}

fn last_two_convergents(digits: &PartialQuotients) -> (Convergent, Convergent) {
    let conv = convergents(digits);
    let n = conv.len();
    let prev = if n >= 2 {
        conv[n - 2].clone()
    } else {
        Convergent {
            p: BigUint::zero(),
            q: BigUint::one(),
        }
    };
    (prev, conv[n - 1].clone())
}

/// The cylinder of points whose expansion starts with `digits`.
pub fn cylinder(digits: &PartialQuotients) -> Cylinder {
    let (prev, last) = last_two_convergents(digits);
    let a = last.to_rational();
    let b = BigRational::new(
        BigInt::from(&last.p + &prev.p),
        BigInt::from(&last.q + &prev.q),
    );
    let length = BigRational::new(
        BigInt::one(),
        BigInt::from(&last.q * (&last.q + &prev.q)),
    );
    let (left_endpoint, right_endpoint) = if digits.len() % 2 == 0 { (a, b) } else { (b, a) };
    Cylinder {
        digits: digits.clone(),
        left_endpoint,
        right_endpoint,
        length,
    }
}

/// `ln |(T^n)'(x)|` for `x = [a_1, ..., a_n + y]`, computed as
/// `2 ln(q_n + y q_{n-1})` from the exact convergents.
pub fn log_derivative_from_convergents(digits: &PartialQuotients, tail: f64) -> f64 {
    let (prev, last) = last_two_convergents(digits);
    let ln_q = ln_biguint(&last.q);
    let ratio = if last.q.bits() < 1000 {
        prev.q.to_f64().unwrap() / last.q.to_f64().unwrap()
    } else {
        let shift = last.q.bits() - 60;
        (&prev.q >> shift).to_f64().unwrap() / (&last.q >> shift).to_f64().unwrap()
    };
    2.0 * (ln_q + (tail * ratio).ln_1p())
}

/// Birkhoff sums for the point `[a_1, ..., a_n + tail]`, where `tail` stands
/// for `T^n x` in `[0, 1)`.
///
/// `T^j x` is rebuilt by the backward recursion `y_j = 1/(a_{j+1} + y_{j+1})`,
/// which contracts and so is stable, and `log |T'(T^j x)| = 2 log(a_{j+1} + y_{j+1})`.
pub fn orbit_stats(digits: &[BigUint], tail: f64) -> OrbitStats {
    let n = digits.len();
    let mut y = tail;
    let mut sum_log_deriv = 0.0;
    let mut sum_log_digits = 0.0;
    for a in digits.iter().rev() {
        let l = ln_digit_plus(a, y);
        sum_log_deriv += 2.0 * l;
        sum_log_digits += ln_biguint(a);
        y = (-l).exp();
    }
    OrbitStats::new(n, sum_log_digits, sum_log_deriv)
}

/// Finite-depth Khintchine and Lyapunov exponent estimates for a double.
pub fn exponent_estimates(x: f64, depth: usize) -> Result<OrbitStats> {
    let (digits, orbit) = expand_with_orbit(x, depth)?;
    let sum_log_digits = digits.digits().iter().map(ln_biguint).sum();
    let sum_log_deriv = orbit[..depth].iter().map(|&v| -2.0 * v.ln()).sum();
    Ok(OrbitStats::new(depth, sum_log_digits, sum_log_deriv))
}

/// Exponent estimates for an exact rational; rationals whose expansion ends
/// before `depth` are rejected.
pub fn exponent_estimates_rational(x: &BigRational, depth: usize) -> Result<OrbitStats> {
    let (digits, orbit) = expand_rational_with_orbit(x, depth)?;
    let sum_log_digits = digits.digits().iter().map(ln_biguint).sum();
    let sum_log_deriv = orbit[..depth]
        .iter()
        .map(|(n, d)| -2.0 * ln_rational(n, d))
        .sum();
    Ok(OrbitStats::new(depth, sum_log_digits, sum_log_deriv))
}

/// Density of the Gauss measure, `1/((1+x) log 2)`.
pub fn gauss_density(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("gauss_density requires 0 <= x <= 1, got {x}")));
    }
    Ok(1.0 / ((1.0 + x) * LN_2))
}

/// Block boundaries `n_0 = 1 < n_1 < n_2 < ...` for [`construct_point`].
#[derive(Debug, Clone, Copy)]
pub enum BlockRule {
    /// The perfect squares `1, 4, 9, 16, ...`.
    Squares,
    /// Any rule `k -> n_k` with `n_0 = 1`, strictly increasing, gaps tending
    /// to infinity and `n_k / n_{k+1} -> 1`.
    Custom(fn(u64) -> u64),
}

impl BlockRule {
    fn boundary(&self, k: u64) -> u64 {
        match self {
            BlockRule::Squares => (k + 1) * (k + 1),
            BlockRule::Custom(f) => f(k),
        }
    }
}

/// `ceil`-like integer approximation of `e^y` for `y >= 0`, exact to a
/// fraction `2^-16` of a unit: the result lies in `[e^y - 2^-16, e^y + 1]`.
///
/// Fixed-point Taylor series on `y / 2^s` followed by `s` squarings, with
/// enough guard bits that the absolute error stays below `2^-16`.
fn exp_integer(y: f64) -> BigUint {
    debug_assert!(y >= 0.0 && y.is_finite());
    if y < 30.0 {
        // e^30 < 2^44, so the double is accurate to far below one unit
        let v = y.exp();
        let guarded = v * (1.0 - 4.0 * f64::EPSILON);
        return BigUint::from(guarded.floor() as u64 + 1);
    }
    let s = (y.log2().ceil() as i32 + 2).max(0) as u32;
    let z = y / 2f64.powi(s as i32);
    let frac_bits = (y / LN_2).ceil() as u64 + s as u64 + 48;
    let one = BigUint::one() << frac_bits;
    let (mantissa, exponent, _) = num_traits::float::FloatCore::integer_decode(z);
    let shift = frac_bits as i64 + exponent as i64;
    let z_fixed = if shift >= 0 {
        BigUint::from(mantissa) << shift as u64
    } else {
        BigUint::from(mantissa) >> (-shift) as u64
    };
    let mut sum = one.clone();
    let mut term = one;
    let mut n = 1u32;
    loop {
        term = ((&term * &z_fixed) >> frac_bits) / n;
        if term.is_zero() {
            break;
        }
        sum += &term;
        n += 1;
    }
    for _ in 0..s {
        sum = (&sum * &sum) >> frac_bits;
    }
    (sum >> frac_bits) + 1u32
}

/// Digit stream of a point whose Khintchine exponent is `xi`.
///
/// At each block boundary `n_k` (`k >= 1`) the digit is an integer in
/// `[e^{(n_k - n_{k-1}) xi}, e^{(n_k - n_{k-1}) xi} + 1]`; every other digit
/// is 1. Its Lyapunov exponent is then `2 xi + gamma_0`.
#[derive(Debug, Clone)]
pub struct ConstructedPoint {
    xi: f64,
    rule: BlockRule,
    position: u64,
    block: u64,
    prev_boundary: u64,
    next_boundary: u64,
}

/// Builds the digit generator for [`ConstructedPoint`].
pub fn construct_point(xi: f64, rule: BlockRule) -> Result<ConstructedPoint> {
    if !(xi >= 0.0) || !xi.is_finite() {
        return Err(Error::Domain(format!("construct_point requires xi >= 0, got {xi}")));
    }
    if rule.boundary(0) != 1 {
        return Err(Error::Domain("block rule must start at n_0 = 1".into()));
    }
    let mut gap = 0;
    for k in 1..64 {
        let (a, b) = (rule.boundary(k - 1), rule.boundary(k));
        if b <= a {
            return Err(Error::Domain(format!("block rule not increasing at k={k}")));
        }
        if b - a < gap {
            return Err(Error::Domain(format!("block gaps shrink at k={k}")));
        }
        gap = b - a;
    }
    Ok(ConstructedPoint {
        xi,
        rule,
        position: 0,
        block: 1,
        prev_boundary: rule.boundary(0),
        next_boundary: rule.boundary(1),
    })
}

impl ConstructedPoint {
    /// Exponent estimates at `depth`, with the orbit tail `T^depth x`
    /// resolved from `lookahead` further digits.
    pub fn exponent_estimates(&self, depth: usize, lookahead: usize) -> OrbitStats {
        let mut stream = self.clone();
        let digits: Vec<BigUint> = (&mut stream).take(depth + lookahead).collect();
        orbit_stats(&digits[..depth], tail_y(&digits[depth..]))
    }
}

/// `[a_1, a_2, ..., a_m]` as a double (zero for an empty slice).
fn tail_y(digits: &[BigUint]) -> f64 {
    let mut y = 0.0;
    for a in digits.iter().rev() {
        y = (-ln_digit_plus(a, y)).exp();
    }
    y
}

impl Iterator for ConstructedPoint {
    type Item = BigUint;

    fn next(&mut self) -> Option<BigUint> {
        self.position += 1;
        if self.position == self.next_boundary {
            let gap = self.next_boundary - self.prev_boundary;
            let digit = exp_integer(gap as f64 * self.xi);
            self.block += 1;
            self.prev_boundary = self.next_boundary;
            self.next_boundary = self.rule.boundary(self.block);
            Some(digit)
        } else {
            Some(BigUint::one())
        }
    }
}
