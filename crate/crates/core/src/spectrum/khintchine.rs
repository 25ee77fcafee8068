use super::{
    assemble, bracket_monotone, check_grid, finish_point, metadata, split_at_peak, CurveKind, SolverConfig,
    SpectrumCurve, SpectrumPoint,
};
use crate::par;
use crate::roots::brent;
use crate::special::constants;
use crate::transfer::{PressureParams, PressureResult, TransferOperator, DOMAIN_MARGIN};
use crate::Result;

const T_MIN: f64 = 0.02;
/// Slightly above 1 so that the peak `t = 1` is bracketed from both sides.
const T_MAX: f64 = 1.01;
const Q_MIN: f64 = -500.0;

struct InnerSolution {
    q: f64,
    result: PressureResult,
}

/// Solves `dP/dq (t, q) = xi` for `q`; `dP/dq` is increasing in `q`.
fn solve_q(
    op: &TransferOperator,
    t: f64,
    xi: f64,
    q_hint: f64,
    cfg: &SolverConfig,
    evaluations: &mut usize,
) -> Result<InnerSolution> {
    let q_max = 2.0 * t - 1.0 - DOMAIN_MARGIN * 1.01;
    let mut g = |q: f64| -> Result<f64> {
        *evaluations += 1;
        Ok(op.pressure(PressureParams::new(t, q))?.dp_dq - xi)
    };
    let context = format!("inner q-solve at t = {t}, xi = {xi}");
    let (a, b, fa, fb) = bracket_monotone(&mut g, q_hint.min(q_max), 0.25, Q_MIN, q_max, true, &context)?;
    let root = brent(&mut g, a, b, fa, fb, cfg.root_config())?;
    *evaluations += 1;
    let result = op.pressure(PressureParams::new(t, root.x))?;
    Ok(InnerSolution { q: root.x, result })
}

/// Nested solve from a warm start `(t_hint, q_hint)`.
fn solve(
    op: &TransferOperator,
    xi: f64,
    t_hint: f64,
    q_hint: f64,
    cfg: &SolverConfig,
) -> Result<SpectrumPoint> {
    let mut evaluations = 0usize;
    let mut last_q = q_hint;
    let mut w = |t: f64| -> Result<f64> {
        let inner = solve_q(op, t, xi, last_q, cfg, &mut evaluations)?;
        last_q = inner.q;
        Ok(inner.result.value - xi * inner.q)
    };
    let context = format!("outer t-solve at xi = {xi}");
    let (a, b, fa, fb) = bracket_monotone(&mut w, t_hint, 0.02, T_MIN, T_MAX, false, &context)?;
    let root = brent(&mut w, a, b, fa, fb, cfg.root_config())?;
    let inner = solve_q(op, root.x, xi, last_q, cfg, &mut evaluations)?;
    let r = &inner.result;
    finish_point(SpectrumPoint {
        exponent: xi,
        dimension: root.x,
        q_value: inner.q,
        residuals: [r.value - inner.q * xi, r.dp_dq - xi],
        slope: inner.q / r.dp_dt,
        evaluations,
    })
}

/// Solves the Khintchine system at one exponent `xi` (in nats).
pub fn khintchine_point(xi: f64, op: &TransferOperator, cfg: &SolverConfig) -> Result<SpectrumPoint> {
    cfg.check_xi(xi)?;
    let xi0 = constants().xi0;
    // rough warm start: t ~ 1 near the peak, q of the sign of xi - xi0
    let q_hint = if xi < xi0 { -(xi0 / xi).ln() } else { 0.5 * (1.0 - xi0 / xi) };
    let t_hint = if xi < xi0 { 0.8 } else { 0.9 };
    solve(op, xi, t_hint, q_hint, cfg)
}

/// Khintchine spectrum on an increasing grid, continued outward from
/// `xi_0` in both directions with warm starts.
pub fn khintchine_curve(grid: &[f64], op: &TransferOperator, cfg: &SolverConfig) -> Result<SpectrumCurve> {
    check_grid(grid)?;
    for &xi in grid {
        cfg.check_xi(xi)?;
    }
    let xi0 = constants().xi0;
    let (below, above) = split_at_peak(grid, xi0);
    let branch = |items: Vec<(usize, f64)>| {
        let mut hint = (1.0, 0.0);
        let mut out = Vec::with_capacity(items.len());
        for (i, xi) in items {
            let mut r = solve(op, xi, hint.0, hint.1, cfg);
            if r.is_err() {
                r = khintchine_point(xi, op, cfg);
            }
            if let Ok(p) = &r {
                hint = (p.dimension, p.q_value);
            }
            out.push((i, r));
        }
        out
    };
    let (mut lo, hi) = par::join(|| branch(below), || branch(above));
    lo.extend(hi);
    Ok(assemble(CurveKind::Khintchine, grid, lo, metadata(op, cfg)))
}
