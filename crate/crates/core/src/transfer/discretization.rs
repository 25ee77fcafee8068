use std::f64::consts::PI;

use crate::{Error, Result};

/// Chebyshev-extrema collocation grid on `[0, 1]` with barycentric
/// interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `monomial[k][m]`: coefficient of `y^m` in the `k`-th Lagrange basis
    /// polynomial.
    monomial: Vec<Vec<f64>>,
}

impl Discretization {
    pub const MIN_ORDER: usize = 4;

    pub fn chebyshev(order: usize) -> Result<Self> {
        if order < Self::MIN_ORDER {
            return Err(Error::Domain(format!(
                "collocation order must be >= {}, got {order}",
                Self::MIN_ORDER
            )));
        }
        let n = order - 1;
        let nodes: Vec<f64> = (0..order)
            .map(|j| {
                let s = (PI * j as f64 / (2 * n) as f64).sin();
                s * s
            })
            .collect();
        let weights: Vec<f64> = (0..order)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n {
                    0.5 * sign
                } else {
                    sign
                }
            })
            .collect();
        let monomial = (0..order)
            .map(|k| lagrange_monomial(&nodes, k))
            .collect();
        Ok(Self {
            nodes,
            weights,
            monomial,
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn barycentric_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn monomial_coefficients(&self) -> &[Vec<f64>] {
        &self.monomial
    }

    /// Values of every Lagrange basis polynomial at `y`.
    pub fn basis(&self, y: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.order());
        if let Some(hit) = self.nodes.iter().position(|&node| node == y) {
            out.fill(0.0);
            out[hit] = 1.0;
            return;
        }
        let mut denom = 0.0;
        for ((o, &w), &node) in out.iter_mut().zip(&self.weights).zip(&self.nodes) {
            let c = w / (y - node);
            *o = c;
            denom += c;
        }
        for o in out.iter_mut() {
            *o /= denom;
        }
    }

    /// Barycentric interpolation of node values at `y`.
    pub fn interpolate(&self, values: &[f64], y: f64) -> f64 {
        debug_assert_eq!(values.len(), self.order());
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&w, &node), &v) in self.weights.iter().zip(&self.nodes).zip(values) {
            let d = y - node;
            if d == 0.0 {
                return v;
            }
            let c = w / d;
            num += c * v;
            den += c;
        }
        num / den
    }

    /// Monomial coefficients of the interpolant of `values`.
    pub fn interpolant_monomial(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.order()];
        for (row, &v) in self.monomial.iter().zip(values) {
            for (o, &c) in out.iter_mut().zip(row) {
                *o += v * c;
            }
        }
        out
    }
}

/// Expands `prod_{l != k} (y - y_l) / (y_k - y_l)` into monomials. The roots
/// are nonnegative, so the coefficients of the product alternate in sign and
/// each is a sum of same-signed terms: no cancellation.
fn lagrange_monomial(nodes: &[f64], k: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut coeffs = vec![0.0; n];
    coeffs[0] = 1.0;
    let mut degree = 0;
    let mut scale = 1.0;
    for (l, &root) in nodes.iter().enumerate() {
        if l == k {
            continue;
        }
        degree += 1;
        for m in (0..=degree).rev() {
            let shifted = if m > 0 { coeffs[m - 1] } else { 0.0 };
            coeffs[m] = shifted - root * coeffs[m];
        }
        scale *= nodes[k] - root;
    }
    coeffs.iter_mut().for_each(|c| *c /= scale);
    coeffs
}
