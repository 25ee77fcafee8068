use gauss_spectra::oracle::zeta_log_derivative_fd;
use gauss_spectra::special::constants;
use gauss_spectra::spectrum::{
    khintchine_curve, khintchine_point, lyapunov_curve, lyapunov_point, lyapunov_point_nested, SolverConfig,
};
use gauss_spectra::transfer::{
    dP_dq, dP_dt, pressure, sample_digits, Alphabet, Discretization, PressureParams, TransferOperator,
};
use gauss_spectra::{cf::ln_biguint, Error};

fn op() -> TransferOperator {
    TransferOperator::full(64, 16).unwrap()
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    // batch means absorb the correlation along the chain
    let batches = 50;
    let size = values.len() / batches;
    let means: Vec<f64> = values.chunks(size).take(batches).map(|c| c.iter().sum::<f64>() / size as f64).collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (m, (var / batches as f64).sqrt())
}

#[test]
fn pressure_is_monotone() {
    let op = op();
    for &q in &[-1.0, -0.3, 0.0, 0.4] {
        let mut last = f64::INFINITY;
        for i in 0..8 {
            let t = 0.75 + 0.05 * i as f64;
            let r = op.pressure(PressureParams::new(t, q)).unwrap();
            assert!(r.value < last && r.dp_dt < 0.0);
            last = r.value;
        }
    }
    for &t in &[0.7, 0.85, 1.0] {
        let mut last = f64::NEG_INFINITY;
        for i in 0..8 {
            let q = -1.5 + 0.2 * i as f64;
            let r = op.pressure(PressureParams::new(t, q)).unwrap();
            assert!(r.dp_dq > last, "dP/dq not increasing at ({t}, {q})");
            last = r.dp_dq;
        }
    }
}

#[test]
fn free_functions_agree_with_operator() {
    let alphabet = Alphabet::full(64).unwrap();
    let disc = Discretization::chebyshev(16).unwrap();
    let p = PressureParams::new(0.9, 0.2);
    let r = pressure(p, &alphabet, &disc).unwrap();
    assert_eq!(r.value, op().pressure_value(p).unwrap());
    assert!((dP_dq(p, &alphabet, &disc).unwrap() - r.dp_dq).abs() < 1e-12);
    assert!((dP_dt(p, &alphabet, &disc).unwrap() - r.dp_dt).abs() < 1e-12);
}

#[test]
fn boundary_derivative_matches_zeta_oracle() {
    // P(0, q) = log zeta(-q), so dP/dq(0, -3) = -zeta'(3)/zeta(3)
    let r = op().pressure(PressureParams::new(0.0, -3.0)).unwrap();
    let oracle = -zeta_log_derivative_fd(3.0, 1e-5).unwrap();
    assert!((r.dp_dq - oracle).abs() < 1e-8, "{} vs {oracle}", r.dp_dq);
}

#[test]
fn domain_violations_are_reported() {
    let op = op();
    assert!(matches!(op.pressure(PressureParams::new(0.4, 0.0)), Err(Error::Domain(_))));
    assert!(matches!(op.pressure(PressureParams::new(0.5, 0.0)), Err(Error::Domain(_))));
    assert!(op.pressure(PressureParams::new(f64::NAN, 0.0)).is_err());
}

#[test]
fn gibbs_sampling_matches_derivative() {
    let op = op();
    let p = PressureParams::new(0.9, 0.5);
    let g = op.gibbs(p).unwrap();
    let digits = sample_digits(&g, 100_000, 7).unwrap();
    let logs: Vec<f64> = digits.digits().iter().map(ln_biguint).collect();
    let (m, se) = mean_and_stderr(&logs);
    let expected = op.pressure(p).unwrap().dp_dq;
    assert!((m - expected).abs() < 3.0 * se + 1e-3, "{m} +- {se} vs {expected}");
}

#[test]
fn sampling_at_a_spectrum_point_recovers_the_exponent() {
    let op = op();
    let s = khintchine_point(1.0, &op, &SolverConfig::default()).unwrap();
    let g = op.gibbs(PressureParams::new(s.dimension, s.q_value)).unwrap();
    let digits = sample_digits(&g, 100_000, 11).unwrap();
    let logs: Vec<f64> = digits.digits().iter().map(ln_biguint).collect();
    let (m, se) = mean_and_stderr(&logs);
    assert!((m - 1.0).abs() < 3.0 * se + 1e-3, "{m} +- {se}");
}

#[test]
fn khintchine_q_sign_and_slope() {
    let op = op();
    let cfg = SolverConfig::default();
    let xi0 = constants().xi0;
    assert!(khintchine_point(0.5, &op, &cfg).unwrap().q_value < 0.0);
    assert!(khintchine_point(5.0, &op, &cfg).unwrap().q_value > 0.0);
    // dt/dxi = q / (dP/dt) against a central difference of the curve
    let h = 1e-4;
    for &xi in &[0.4, 0.8, 2.0, 8.0] {
        let mid = khintchine_point(xi, &op, &cfg).unwrap();
        let up = khintchine_point(xi + h, &op, &cfg).unwrap();
        let down = khintchine_point(xi - h, &op, &cfg).unwrap();
        let fd = (up.dimension - down.dimension) / (2.0 * h);
        assert!((mid.slope - fd).abs() < 1e-5 * (1.0 + fd.abs()), "xi={xi}: {} vs {fd}", mid.slope);
        assert_eq!(mid.slope.signum(), (xi0 - xi).signum());
    }
}

#[test]
fn khintchine_window_and_limits() {
    let op = op();
    let cfg = SolverConfig::default();
    assert!(matches!(khintchine_point(1e-6, &op, &cfg), Err(Error::Window { .. })));
    let t_small = khintchine_point(0.05, &op, &cfg).unwrap().dimension;
    let t_less_small = khintchine_point(0.1, &op, &cfg).unwrap().dimension;
    assert!(t_small < t_less_small && t_small < 0.3);
    let t40 = khintchine_point(40.0, &op, &cfg).unwrap().dimension;
    let t50 = khintchine_point(50.0, &op, &cfg).unwrap().dimension;
    assert!(t50 < t40 && t50 > 0.5);
}

#[test]
fn lyapunov_routes_and_slope() {
    let op = op();
    let cfg = SolverConfig::default();
    let g0 = constants().gamma0;
    for i in 0..10 {
        let beta = g0 + 0.05 + (30.0 - g0 - 0.05) * (i as f64 / 9.0).powi(2);
        let a = lyapunov_point(beta, &op, &cfg).unwrap();
        let b = lyapunov_point_nested(beta, &op, &cfg).unwrap();
        assert!((a.dimension - b.dimension).abs() < 1e-8, "beta={beta}");
        assert!(a.dimension > 0.0 && a.dimension <= 1.0);
    }
    let h = 1e-4;
    let beta = 4.0;
    let mid = lyapunov_point(beta, &op, &cfg).unwrap();
    let fd = (lyapunov_point(beta + h, &op, &cfg).unwrap().dimension
        - lyapunov_point(beta - h, &op, &cfg).unwrap().dimension)
        / (2.0 * h);
    assert!((mid.slope - fd).abs() < 1e-5, "{} vs {fd}", mid.slope);
    assert!(matches!(lyapunov_point(g0, &op, &cfg), Err(Error::Window { .. })));
}

#[test]
fn curves_keep_grid_order_and_peak() {
    let op = op();
    let cfg = SolverConfig::default();
    let grid: Vec<f64> = (0..24).map(|i| 1.0 + 29.0 * i as f64 / 23.0).collect();
    let c = lyapunov_curve(&grid, &op, &cfg).unwrap();
    assert!(c.failures.is_empty());
    let x: Vec<f64> = c.points.iter().map(|p| p.exponent).collect();
    assert_eq!(x, grid);
    let grid: Vec<f64> = (0..12).map(|i| 0.5 + 0.5 * i as f64).collect();
    let c = khintchine_curve(&grid, &op, &cfg).unwrap();
    let peak = c.points.iter().fold(&c.points[0], |a, b| if b.dimension > a.dimension { b } else { a });
    assert!((peak.exponent - constants().xi0).abs() <= 0.5);
    assert!(khintchine_curve(&[2.0, 1.0], &op, &cfg).is_err());
}
