use super::{
    assemble, bracket_monotone, check_grid, finish_point, metadata, split_at_peak, CurveKind, SolverConfig,
    SpectrumCurve, SpectrumPoint,
};
use crate::par;
use crate::roots::brent;
use crate::special::constants;
use crate::transfer::{TransferOperator, DOMAIN_MARGIN};
use crate::Result;

/// Smallest `u` with `(u, 0)` inside the admissible domain.
const U_MIN: f64 = 0.5 + 0.5 * DOMAIN_MARGIN * 1.01;
const U_MAX: f64 = 200.0;

/// Legendre route: solve `P'(u) = -beta`, then `q = P(u)/beta` and
/// `t~ = u + q`. The residuals are recomputed from `P_1(t~, q)`.
fn solve_legendre(op: &TransferOperator, beta: f64, u_hint: f64, cfg: &SolverConfig) -> Result<SpectrumPoint> {
    let mut evaluations = 0usize;
    let mut g = |u: f64| -> Result<f64> {
        evaluations += 1;
        Ok(op.pressure_1d(u)?.dp_dt + beta)
    };
    let context = format!("Legendre u-solve at beta = {beta}");
    let (a, b, fa, fb) = bracket_monotone(&mut g, u_hint, 0.05, U_MIN, U_MAX, true, &context)?;
    let root = brent(&mut g, a, b, fa, fb, cfg.root_config())?;
    let u = root.x;
    let p_u = op.pressure_1d(u)?.value;
    let q = p_u / beta;
    let t_tilde = u + q;
    let check = op.lyapunov_pressure(t_tilde, q)?;
    evaluations += 2;
    finish_point(SpectrumPoint {
        exponent: beta,
        dimension: t_tilde,
        q_value: q,
        residuals: [check.value - q * beta, -check.dp_dt - beta],
        slope: -q / beta,
        evaluations,
    })
}

/// Solves the Lyapunov system at one exponent `beta > gamma_0`, in nats.
pub fn lyapunov_point(beta: f64, op: &TransferOperator, cfg: &SolverConfig) -> Result<SpectrumPoint> {
    cfg.check_beta(beta)?;
    let lambda0 = constants().lambda0;
    let u_hint = if beta > lambda0 { 0.5 + 0.5 * lambda0 / beta } else { 1.0 + (lambda0 - beta) * 3.0 };
    solve_legendre(op, beta, u_hint, cfg)
}

/// Direct nested solve of `P_1(t~, q) = q beta`, `dP_1/dq (t~, q) = beta`
/// on the two-parameter family, without the Legendre reduction.
pub fn lyapunov_point_nested(beta: f64, op: &TransferOperator, cfg: &SolverConfig) -> Result<SpectrumPoint> {
    cfg.check_beta(beta)?;
    let mut evaluations = 0usize;
    let mut last_q = 0.0;
    // dP_1/dq = -P'(t~ - q) increases with q
    let inner = |t_tilde: f64, q_hint: f64, evaluations: &mut usize| -> Result<f64> {
        let mut g = |q: f64| -> Result<f64> {
            *evaluations += 1;
            Ok(-op.lyapunov_pressure(t_tilde, q)?.dp_dt - beta)
        };
        let context = format!("nested q-solve at t~ = {t_tilde}, beta = {beta}");
        let (a, b, fa, fb) = bracket_monotone(&mut g, q_hint, 0.1, t_tilde - U_MAX, t_tilde - U_MIN, true, &context)?;
        Ok(brent(&mut g, a, b, fa, fb, cfg.root_config())?.x)
    };
    let mut w = |t_tilde: f64| -> Result<f64> {
        let q = inner(t_tilde, last_q, &mut evaluations)?;
        last_q = q;
        evaluations += 1;
        Ok(op.lyapunov_pressure(t_tilde, q)?.value - beta * q)
    };
    let context = format!("nested t~-solve at beta = {beta}");
    let (a, b, fa, fb) = bracket_monotone(&mut w, 1.0, 0.05, 0.0, 1.01, false, &context)?;
    let root = brent(&mut w, a, b, fa, fb, cfg.root_config())?;
    let t_tilde = root.x;
    let q = inner(t_tilde, last_q, &mut evaluations)?;
    let r = op.lyapunov_pressure(t_tilde, q)?;
    finish_point(SpectrumPoint {
        exponent: beta,
        dimension: t_tilde,
        q_value: q,
        residuals: [r.value - q * beta, -r.dp_dt - beta],
        slope: -q / beta,
        evaluations: evaluations + 1,
    })
}

/// Lyapunov spectrum on an increasing grid, continued outward from
/// `lambda_0`.
pub fn lyapunov_curve(grid: &[f64], op: &TransferOperator, cfg: &SolverConfig) -> Result<SpectrumCurve> {
    check_grid(grid)?;
    for &beta in grid {
        cfg.check_beta(beta)?;
    }
    let (below, above) = split_at_peak(grid, constants().lambda0);
    let branch = |items: Vec<(usize, f64)>| {
        let mut u_hint = 1.0;
        let mut out = Vec::with_capacity(items.len());
        for (i, beta) in items {
            let mut r = solve_legendre(op, beta, u_hint, cfg);
            if r.is_err() {
                r = lyapunov_point(beta, op, cfg);
            }
            if let Ok(p) = &r {
                u_hint = p.dimension - p.q_value;
            }
            out.push((i, r));
        }
        out
    };
    let (mut lo, hi) = par::join(|| branch(below), || branch(above));
    lo.extend(hi);
    Ok(assemble(CurveKind::Lyapunov, grid, lo, metadata(op, cfg)))
}
