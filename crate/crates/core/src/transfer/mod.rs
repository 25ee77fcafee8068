//! Collocation approximation of the Ruelle transfer operator
//!
//! ```text
//! (L g)(x) = sum_{i in A} i^q (i + x)^{-2t} g(1 / (i + x))
//! ```
//!
//! for the potential `t log|psi_i'| + q log i` of the Gauss system
//! `psi_i(x) = 1/(i+x)`. The pressure `P(t, q)` is the log of the dominant
//! eigenvalue. Functions are represented by their values on Chebyshev
//! extrema in `[0, 1]`; off-node values come from barycentric interpolation.
//! For the full alphabet the digits `i > M` are summed in closed form
//! through Hurwitz zeta values (see [`tail`]), so `M` only trades explicit
//! work for series work and does not truncate the operator.

mod discretization;
mod gibbs;
mod tail;

use serde::Serialize;

pub use discretization::Discretization;
pub use gibbs::{sample_digits, GibbsApprox};

use crate::{Error, Result};

/// Minimum distance `2t - q - 1` kept from the boundary of the admissible
/// domain for the full alphabet.
pub const DOMAIN_MARGIN: f64 = 0.005;

/// Default explicit-digit cutoff.
pub const DEFAULT_CUTOFF: usize = 64;

/// Default collocation order.
pub const DEFAULT_ORDER: usize = 16;

/// Relative tolerance of the power iteration.
pub const POWER_TOLERANCE: f64 = 1e-13;

pub const MAX_POWER_ITERATIONS: usize = 10_000;

/// Central finite-difference step used for derivative cross-checks.
pub const FD_STEP: f64 = 1e-5;

/// Largest tolerated gap between Gibbs-integral and finite-difference
/// derivatives.
pub const DERIVATIVE_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PressureParams {
    pub t: f64,
    pub q: f64,
}

impl PressureParams {
    pub fn new(t: f64, q: f64) -> Self {
        Self { t, q }
    }

    /// `2t - q`, the decay exponent of the weights `i^{q-2t}`.
    pub fn decay(&self) -> f64 {
        2.0 * self.t - self.q
    }
}

/// Digit set of the iterated function system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Alphabet {
    /// All digits. `cutoff` digits are summed explicitly; when `tail` is set
    /// the rest are added in closed form, otherwise they are dropped (which
    /// is the restricted alphabet `{1, ..., cutoff}`).
    Full { cutoff: usize, tail: bool },
    /// A finite digit set such as `{1, 2}`.
    Restricted(Vec<u64>),
}

impl Alphabet {
    pub const MIN_CUTOFF: usize = 8;

    pub fn full(cutoff: usize) -> Result<Self> {
        if cutoff < Self::MIN_CUTOFF {
            return Err(Error::Domain(format!(
                "alphabet cutoff must be >= {}, got {cutoff}",
                Self::MIN_CUTOFF
            )));
        }
        Ok(Alphabet::Full { cutoff, tail: true })
    }

    /// `{1, ..., cutoff}` with no tail.
    pub fn truncated(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::Domain("truncated alphabet must be nonempty".into()));
        }
        Ok(Alphabet::Full { cutoff, tail: false })
    }

    pub fn restricted(mut digits: Vec<u64>) -> Result<Self> {
        digits.sort_unstable();
        digits.dedup();
        if digits.is_empty() || digits[0] == 0 {
            return Err(Error::Domain("restricted alphabet must be a nonempty set of positive digits".into()));
        }
        Ok(Alphabet::Restricted(digits))
    }

    /// Digits summed term by term.
    pub fn explicit_digits(&self) -> Vec<u64> {
        match self {
            Alphabet::Full { cutoff, .. } => (1..=*cutoff as u64).collect(),
            Alphabet::Restricted(d) => d.clone(),
        }
    }

    /// Cutoff of the closed-form tail, if any.
    pub fn tail_cutoff(&self) -> Option<usize> {
        match self {
            Alphabet::Full { cutoff, tail: true } => Some(*cutoff),
            _ => None,
        }
    }

    /// Checks `(t, q)` against the convergence domain of this alphabet.
    pub fn check(&self, p: PressureParams) -> Result<()> {
        if !p.t.is_finite() || !p.q.is_finite() {
            return Err(Error::Domain(format!("non-finite parameters (t, q) = ({}, {})", p.t, p.q)));
        }
        if self.tail_cutoff().is_some() && p.decay() < 1.0 + DOMAIN_MARGIN {
            return Err(Error::Domain(format!(
                "(t, q) = ({}, {}) outside D: 2t - q = {} < 1 + {DOMAIN_MARGIN}",
                p.t,
                p.q,
                p.decay()
            )));
        }
        Ok(())
    }
}

/// Dominant eigendata of the discretized operator at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureResult {
    pub params: PressureParams,
    /// `P(t, q)`, in nats.
    pub value: f64,
    pub eigenvalue: f64,
    /// Dominant right eigenfunction `h` at the nodes, max-normalized.
    pub eigenfunction_values: Vec<f64>,
    /// Dominant left eigenvector `nu`, normalized to sum 1.
    pub left_eigen_weights: Vec<f64>,
    /// Gibbs integral `-int log|T'| dmu`.
    pub dp_dt: f64,
    /// Gibbs integral `int log a_1 dmu`.
    pub dp_dq: f64,
    /// Bound on the pressure error from truncating the tail series.
    pub tail_error_bound: f64,
    pub iterations: usize,
}

/// Matrices of the operator and its parameter derivatives, row-major `K x K`.
struct OperatorMatrices {
    a: Vec<f64>,
    a_t: Vec<f64>,
    a_q: Vec<f64>,
    truncation: f64,
}

/// `theta = (sqrt 5 - 1)/2`, the fixed point of `x -> 1/(1+x)`.
pub(crate) const THETA: f64 = 0.618_033_988_749_894_9;

/// The transfer operator for one alphabet and one discretization, with the
/// parameter-independent geometry (interpolation rows at every image point
/// `1/(i + x_j)`) cached.
///
/// Eigenproblems are solved for the conjugated operator
/// `f -> (1 + theta x)^{2t} L[(1 + theta y)^{-2t} f]`. The factor
/// `(1 + theta x)^{-2t}` is an exact eigenfunction of the digit-1 branch, so
/// the remaining factor `f = h (1 + theta x)^{2t}` stays smooth for large
/// `t`, where `h` itself varies by `phi^{2t}` across `[0, 1]` and defeats
/// polynomial interpolation.
#[derive(Debug, Clone)]
pub struct TransferOperator {
    alphabet: Alphabet,
    disc: Discretization,
    ln_digit: Vec<f64>,
    /// `ln(i + x_j)`, indexed `j * digits + d`
    ln_shift: Vec<f64>,
    /// `ln(1 + theta / (i + x_j))`, same indexing
    ln_conj_image: Vec<f64>,
    /// `ln(1 + theta x_j)`
    ln_conj_node: Vec<f64>,
    /// interpolation rows, indexed `(j * digits + d) * K + k`
    rows: Vec<f64>,
}

impl TransferOperator {
    pub fn new(alphabet: Alphabet, disc: Discretization) -> Self {
        let digits = alphabet.explicit_digits();
        let k = disc.order();
        let ln_digit: Vec<f64> = digits.iter().map(|&i| (i as f64).ln()).collect();
        let mut ln_shift = Vec::with_capacity(k * digits.len());
        let mut ln_conj_image = Vec::with_capacity(k * digits.len());
        let mut rows = vec![0.0; k * digits.len() * k];
        for (j, &x) in disc.nodes().iter().enumerate() {
            for (d, &i) in digits.iter().enumerate() {
                let shifted = i as f64 + x;
                ln_shift.push(shifted.ln());
                ln_conj_image.push((THETA / shifted).ln_1p());
                let start = (j * digits.len() + d) * k;
                disc.basis(1.0 / shifted, &mut rows[start..start + k]);
            }
        }
        let ln_conj_node = disc.nodes().iter().map(|&x| (THETA * x).ln_1p()).collect();
        Self {
            alphabet,
            disc,
            ln_digit,
            ln_shift,
            ln_conj_image,
            ln_conj_node,
            rows,
        }
    }

    /// Full alphabet with the given cutoff and collocation order.
    pub fn full(cutoff: usize, order: usize) -> Result<Self> {
        Ok(Self::new(Alphabet::full(cutoff)?, Discretization::chebyshev(order)?))
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    /// Collocation matrices of the operator, conjugated by
    /// `(1 + theta x)^{2t}` when `conjugate` is set.
    fn matrices(&self, p: PressureParams, conjugate: bool, derivs: bool) -> Result<OperatorMatrices> {
        self.alphabet.check(p)?;
        let k = self.disc.order();
        let nd = self.ln_digit.len();
        let sigma = if conjugate { 2.0 * p.t } else { 0.0 };
        let mut a = vec![0.0; k * k];
        let mut a_t = if derivs { vec![0.0; k * k] } else { Vec::new() };
        let mut a_q = if derivs { vec![0.0; k * k] } else { Vec::new() };
        let mut truncation = 0.0f64;
        for j in 0..k {
            let row = j * k;
            let conj_node = if conjugate { self.ln_conj_node[j] } else { 0.0 };
            for d in 0..nd {
                let idx = j * nd + d;
                let conj_image = if conjugate { self.ln_conj_image[idx] } else { 0.0 };
                let ln_s = self.ln_shift[idx];
                let w = (p.q * self.ln_digit[d] - 2.0 * p.t * ln_s + sigma * (conj_node - conj_image)).exp();
                let basis = &self.rows[idx * k..(idx + 1) * k];
                for (c, &b) in basis.iter().enumerate() {
                    a[row + c] += w * b;
                }
                if derivs {
                    let dsigma = if conjugate { 2.0 } else { 0.0 };
                    let wt = (-2.0 * ln_s + dsigma * (conj_node - conj_image)) * w;
                    let wq = self.ln_digit[d] * w;
                    for (c, &b) in basis.iter().enumerate() {
                        a_t[row + c] += wt * b;
                        a_q[row + c] += wq * b;
                    }
                }
            }
            if let Some(cutoff) = self.alphabet.tail_cutoff() {
                let x = self.disc.nodes()[j];
                let (sums, scale) = if conjugate {
                    let sums = tail::conjugated_tail_sums(x, cutoff, p.t, p.q, THETA, k, derivs);
                    (sums, (sigma * conj_node).exp())
                } else {
                    (tail::tail_sums(x, cutoff, p.t, p.q, k, derivs), 1.0)
                };
                truncation = truncation.max(sums.truncation * sums.value[0] * scale);
                for (c, coeffs) in self.disc.monomial_coefficients().iter().enumerate() {
                    let mut v = 0.0;
                    let mut vt = 0.0;
                    let mut vq = 0.0;
                    for (m, &cm) in coeffs.iter().enumerate() {
                        v += cm * sums.value[m];
                        if derivs {
                            vt += cm * sums.d_t[m];
                            vq += cm * sums.d_q[m];
                        }
                    }
                    a[row + c] += scale * v;
                    if derivs {
                        let dscale = if conjugate { 2.0 * conj_node } else { 0.0 };
                        a_t[row + c] += scale * (vt + dscale * v);
                        a_q[row + c] += scale * vq;
                    }
                }
            }
        }
        Ok(OperatorMatrices { a, a_t, a_q, truncation })
    }

    /// Applies the discretized operator to node values `g`.
    pub fn apply(&self, p: PressureParams, g: &[f64]) -> Result<Vec<f64>> {
        let k = self.disc.order();
        if g.len() != k {
            return Err(Error::Domain(format!("expected {k} node values, got {}", g.len())));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("node values must be finite".into()));
        }
        let m = self.matrices(p, false, false)?;
        Ok(mat_vec(&m.a, g, k))
    }

    /// Pressure, dominant eigendata and Gibbs-integral derivatives.
    pub fn pressure(&self, p: PressureParams) -> Result<PressureResult> {
        let k = self.disc.order();
        let m = self.matrices(p, true, true)?;
        let (lambda, f, it_right) = dominant_eigen(&m.a, k, false)?;
        let (_, mut nu, it_left) = dominant_eigen(&m.a, k, true)?;
        let total: f64 = nu.iter().sum();
        nu.iter_mut().for_each(|v| *v /= total);
        let nu_f = dot(&nu, &f);
        let dp_dt = dot(&nu, &mat_vec(&m.a_t, &f, k)) / (lambda * nu_f);
        let dp_dq = dot(&nu, &mat_vec(&m.a_q, &f, k)) / (lambda * nu_f);
        let mut h: Vec<f64> = f
            .iter()
            .zip(&self.ln_conj_node)
            .map(|(v, c)| v * (-2.0 * p.t * c).exp())
            .collect();
        let h_max = h.iter().copied().fold(0.0, f64::max);
        h.iter_mut().for_each(|v| *v /= h_max);
        let row_norm = (0..k)
            .map(|j| m.a[j * k..(j + 1) * k].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        Ok(PressureResult {
            params: p,
            value: lambda.ln(),
            eigenvalue: lambda,
            eigenfunction_values: h,
            left_eigen_weights: nu,
            dp_dt,
            dp_dq,
            tail_error_bound: m.truncation * row_norm.max(1.0) / lambda + f64::EPSILON,
            iterations: it_right + it_left,
        })
    }

    /// Pressure value only (right eigenvector, no derivatives).
    pub fn pressure_value(&self, p: PressureParams) -> Result<f64> {
        let m = self.matrices(p, true, false)?;
        let (lambda, _, _) = dominant_eigen(&m.a, self.disc.order(), false)?;
        Ok(lambda.ln())
    }

    /// `P(t) = P(t, 0)`.
    pub fn pressure_1d(&self, t: f64) -> Result<PressureResult> {
        self.pressure(PressureParams::new(t, 0.0))
    }

    /// `P_1(t~, q)`: pressure of `t~ log|T'| - q log|T'|`, which only sees
    /// the combined exponent `t~ - q`.
    pub fn lyapunov_pressure(&self, t_tilde: f64, q: f64) -> Result<PressureResult> {
        self.pressure(PressureParams::new(t_tilde - q, 0.0))
    }

    /// Central finite differences `(dP/dt, dP/dq)` with step [`FD_STEP`].
    pub fn finite_difference_gradient(&self, p: PressureParams) -> Result<(f64, f64)> {
        let h = FD_STEP;
        let f = |t: f64, q: f64| self.pressure_value(PressureParams::new(t, q));
        let dt = (f(p.t + h, p.q)? - f(p.t - h, p.q)?) / (2.0 * h);
        let dq = (f(p.t, p.q + h)? - f(p.t, p.q - h)?) / (2.0 * h);
        Ok((dt, dq))
    }

    /// Gibbs-integral derivatives checked against finite differences.
    pub fn checked_gradient(&self, p: PressureParams) -> Result<(f64, f64)> {
        let r = self.pressure(p)?;
        let (fd_t, fd_q) = self.finite_difference_gradient(p)?;
        for (name, gibbs, fd) in [("dP/dt", r.dp_dt, fd_t), ("dP/dq", r.dp_dq, fd_q)] {
            if (gibbs - fd).abs() > DERIVATIVE_TOLERANCE {
                return Err(Error::Consistency(format!(
                    "{name} at ({}, {}): Gibbs integral {gibbs} vs finite difference {fd}",
                    p.t, p.q
                )));
            }
        }
        Ok((r.dp_dt, r.dp_dq))
    }

    pub fn gibbs(&self, p: PressureParams) -> Result<GibbsApprox> {
        let r = self.pressure(p)?;
        Ok(GibbsApprox::new(self.alphabet.clone(), self.disc.clone(), r))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec(a: &[f64], v: &[f64], k: usize) -> Vec<f64> {
    (0..k).map(|j| dot(&a[j * k..(j + 1) * k], v)).collect()
}

fn mat_t_vec(a: &[f64], v: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k];
    for (j, &vj) in v.iter().enumerate() {
        for (o, &x) in out.iter_mut().zip(&a[j * k..(j + 1) * k]) {
            *o += vj * x;
        }
    }
    out
}

/// Perron-Frobenius check on the converged pair.
fn positive(lambda: f64, v: Vec<f64>, it: usize, transpose: bool) -> Result<(f64, Vec<f64>, usize)> {
    if lambda > 0.0 && (transpose || v.iter().all(|&x| x > 0.0)) {
        Ok((lambda, v, it))
    } else {
        Err(Error::NonConvergence {
            iterations: it,
            last_change: f64::NAN,
        })
    }
}

/// Power iteration from the positive vector, normalized in the sup norm.
/// Returns `(eigenvalue, eigenvector, iterations)`.
fn dominant_eigen(a: &[f64], k: usize, transpose: bool) -> Result<(f64, Vec<f64>, usize)> {
    let mut v = vec![1.0; k];
    let mut lambda = 0.0;
    let mut best_change = f64::INFINITY;
    let mut stalled = 0;
    let mut change = f64::INFINITY;
    for it in 1..=MAX_POWER_ITERATIONS {
        let w = if transpose { mat_t_vec(a, &v, k) } else { mat_vec(a, &v, k) };
        let (idx, _) = w
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, &x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
        let peak = w[idx];
        if !(peak.is_finite()) || peak == 0.0 {
            return Err(Error::NonConvergence {
                iterations: it,
                last_change: f64::NAN,
            });
        }
        let next: Vec<f64> = w.iter().map(|x| x / peak).collect();
        let new_lambda = peak / v[idx];
        change = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            .max((new_lambda - lambda).abs() / new_lambda.abs());
        v = next;
        lambda = new_lambda;
        if change <= POWER_TOLERANCE {
            return positive(lambda, v, it, transpose);
        }
        // rounding floor reached: the change stopped shrinking
        if change < best_change * 0.5 {
            best_change = change;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > 50 && change < 1e-11 {
                return positive(lambda, v, it, transpose);
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_POWER_ITERATIONS,
        last_change: change,
    })
}

/// One-shot pressure evaluation; builds the operator for this call.
pub fn pressure(p: PressureParams, alphabet: &Alphabet, disc: &Discretization) -> Result<PressureResult> {
    TransferOperator::new(alphabet.clone(), disc.clone()).pressure(p)
}

/// `P(t) = P(t, 0)`, for `t > 1/2`.
pub fn pressure_1d(t: f64, alphabet: &Alphabet, disc: &Discretization) -> Result<PressureResult> {
    pressure(PressureParams::new(t, 0.0), alphabet, disc)
}

/// Applies the discretized operator to node values.
pub fn apply_operator(
    p: PressureParams,
    alphabet: &Alphabet,
    disc: &Discretization,
    g: &[f64],
) -> Result<Vec<f64>> {
    TransferOperator::new(alphabet.clone(), disc.clone()).apply(p, g)
}

/// `dP/dq = int log a_1 dmu_{t,q}`, cross-checked against a central difference.
#[allow(non_snake_case)]
pub fn dP_dq(p: PressureParams, alphabet: &Alphabet, disc: &Discretization) -> Result<f64> {
    TransferOperator::new(alphabet.clone(), disc.clone())
        .checked_gradient(p)
        .map(|(_, dq)| dq)
}

/// `dP/dt = -int log|T'| dmu_{t,q}`, cross-checked against a central difference.
#[allow(non_snake_case)]
pub fn dP_dt(p: PressureParams, alphabet: &Alphabet, disc: &Discretization) -> Result<f64> {
    TransferOperator::new(alphabet.clone(), disc.clone())
        .checked_gradient(p)
        .map(|(dt, _)| dt)
}

pub fn gibbs(p: PressureParams, alphabet: &Alphabet, disc: &Discretization) -> Result<GibbsApprox> {
    TransferOperator::new(alphabet.clone(), disc.clone()).gibbs(p)
}
