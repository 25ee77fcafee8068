use serde::Serialize;

use super::SpectrumCurve;
use crate::{Error, Result};

pub const MIN_SHAPE_POINTS: usize = 20;

/// Finite-difference shape of a solved spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeReport {
    pub peak_exponent: f64,
    pub peak_dimension: f64,
    /// Sign changes of the difference quotients of the dimension.
    pub slope_sign_changes: usize,
    pub increasing_before_peak: bool,
    pub decreasing_after_peak: bool,
    /// Second difference at the peak.
    pub curvature_at_peak: f64,
    /// First grid interval beyond the peak on which the second difference
    /// is positive, if any.
    pub convexity_witness: Option<(f64, f64)>,
    pub q_sign_changes: usize,
    /// `q` changes sign once, between the grid points around the peak.
    pub q_sign_change_at_peak: bool,
}

fn sign_changes(values: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut last: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if v == 0.0 || v.is_nan() {
            continue;
        }
        if let Some((_, s)) = last {
            if s != v.signum() {
                out.push(i);
            }
        }
        last = Some((i, v.signum()));
    }
    out
}

pub fn spectrum_shape_report(curve: &SpectrumCurve) -> Result<ShapeReport> {
    let pts = &curve.points;
    if pts.len() < MIN_SHAPE_POINTS {
        return Err(Error::InsufficientGrid(format!(
            "shape report needs at least {MIN_SHAPE_POINTS} solved points, got {}",
            pts.len()
        )));
    }
    let x: Vec<f64> = pts.iter().map(|p| p.exponent).collect();
    let t: Vec<f64> = pts.iter().map(|p| p.dimension).collect();
    let q: Vec<f64> = pts.iter().map(|p| p.q_value).collect();
    let peak = t
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > t[best] { i } else { best });
    if peak == 0 || peak == pts.len() - 1 {
        return Err(Error::InsufficientGrid(
            "the grid does not reach both sides of the peak".into(),
        ));
    }
    let slopes: Vec<f64> = (0..pts.len() - 1)
        .map(|i| (t[i + 1] - t[i]) / (x[i + 1] - x[i]))
        .collect();
    let second: Vec<f64> = (1..pts.len() - 1)
        .map(|i| 2.0 * (slopes[i] - slopes[i - 1]) / (x[i + 1] - x[i - 1]))
        .collect();
    let witness = (peak + 1..pts.len() - 1)
        .find(|&i| second[i - 1] > 0.0)
        .map(|i| (x[i - 1], x[i + 1]));
    let q_changes = sign_changes(&q);
    let q_at_peak = q_changes.len() == 1 && (q_changes[0] == peak || q_changes[0] == peak + 1);
    Ok(ShapeReport {
        peak_exponent: x[peak],
        peak_dimension: t[peak],
        slope_sign_changes: sign_changes(&slopes).len(),
        increasing_before_peak: slopes[..peak].iter().all(|&s| s > 0.0),
        decreasing_after_peak: slopes[peak..].iter().all(|&s| s < 0.0),
        curvature_at_peak: second[peak - 1],
        convexity_witness: witness,
        q_sign_changes: q_changes.len(),
        q_sign_change_at_peak: q_at_peak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{CurveKind, CurveMetadata, SpectrumPoint};

    fn synthetic(f: impl Fn(f64) -> (f64, f64), n: usize) -> SpectrumCurve {
        let points = (0..n)
            .map(|i| {
                let x = 0.1 + 0.1 * i as f64;
                let (t, q) = f(x);
                SpectrumPoint {
                    exponent: x,
                    dimension: t,
                    q_value: q,
                    residuals: [0.0; 2],
                    slope: 0.0,
                    evaluations: 0,
                }
            })
            .collect();
        SpectrumCurve {
            kind: CurveKind::Khintchine,
            points,
            failures: vec![],
            metadata: CurveMetadata {
                cutoff: None,
                collocation_order: 4,
                tolerance: 0.0,
            },
        }
    }

    #[test]
    fn bump_with_convex_tail() {
        // peak at 1.03 then a tail that flattens toward 1/2
        let c = synthetic(|x| (0.5 + 0.5 / (1.0 + (x - 1.03).powi(2) * 4.0), x - 1.03), 40);
        let r = spectrum_shape_report(&c).unwrap();
        assert_eq!(r.slope_sign_changes, 1);
        assert!((r.peak_exponent - 1.0).abs() < 0.11);
        assert!(r.curvature_at_peak < 0.0);
        assert!(r.convexity_witness.unwrap().0 > r.peak_exponent);
        assert!(r.q_sign_change_at_peak);
        assert!(r.increasing_before_peak && r.decreasing_after_peak);
    }

    #[test]
    fn rejects_short_or_one_sided_curves() {
        let c = synthetic(|x| (x, 0.0), 10);
        assert!(spectrum_shape_report(&c).is_err());
        let c = synthetic(|x| (x, 0.0), 30);
        assert!(matches!(spectrum_shape_report(&c), Err(Error::InsufficientGrid(_))));
    }
}
