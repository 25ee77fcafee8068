use crate::roots::{brent, RootConfig};
use crate::transfer::{Alphabet, Discretization, PressureParams, TransferOperator};
use crate::Result;

/// Hausdorff dimension of the numbers whose partial quotients all lie in
/// `digits`: the zero of the restricted pressure `t -> P(t)`.
pub fn bounded_digit_dimension(digits: &[u64], disc: &Discretization) -> Result<f64> {
    let alphabet = Alphabet::restricted(digits.to_vec())?;
    if alphabet.explicit_digits().len() == 1 {
        // a single point, the fixed point of one branch
        return Ok(0.0);
    }
    let op = TransferOperator::new(alphabet, disc.clone());
    let f = |t: f64| op.pressure_value(PressureParams::new(t, 0.0));
    // P(0) = log #digits > 0 and P(1) < 0 for any finite alphabet
    let (f0, f1) = (f(0.0)?, f(1.0)?);
    let cfg = RootConfig {
        f_tol: 1e-14,
        x_tol: 1e-15,
        max_iter: 200,
    };
    Ok(brent(f, 0.0, 1.0, f0, f1, cfg)?.x)
}
