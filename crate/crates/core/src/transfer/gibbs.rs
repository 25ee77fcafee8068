use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tail::conjugated_tail_sums;
use super::{Alphabet, Discretization, PressureParams, PressureResult, THETA};
use crate::cf::PartialQuotients;
use crate::{Error, Result};

/// Gibbs eigendata at one parameter point, able to produce the digit law
///
/// ```text
/// p(i | x) = e^{-P} i^q (i + x)^{-2t} h(1/(i + x)) / h(x)
/// ```
///
/// of the Markov chain `x -> 1/(i + x)`.
#[derive(Debug, Clone)]
pub struct GibbsApprox {
    alphabet: Alphabet,
    disc: Discretization,
    result: PressureResult,
    digits: Vec<u64>,
    /// `h (1 + theta x)^{2t}` at the nodes; smooth where `h` is not
    smooth_values: Vec<f64>,
    /// monomial coefficients of the interpolant of `smooth_values`
    smooth_monomial: Vec<f64>,
}

/// Digit law at one point: explicit probabilities followed by the mass of
/// all digits above the cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitLaw {
    pub digits: Vec<u64>,
    pub probabilities: Vec<f64>,
    pub tail_mass: f64,
    /// Sum of the unnormalized probabilities; equals 1 up to the accuracy of
    /// the eigenfunction.
    pub normalizer: f64,
}

impl GibbsApprox {
    pub(super) fn new(alphabet: Alphabet, disc: Discretization, result: PressureResult) -> Self {
        let digits = alphabet.explicit_digits();
        let sigma = 2.0 * result.params.t;
        let smooth_values: Vec<f64> = disc
            .nodes()
            .iter()
            .zip(&result.eigenfunction_values)
            .map(|(&x, &h)| h * (sigma * (THETA * x).ln_1p()).exp())
            .collect();
        let smooth_monomial = disc.interpolant_monomial(&smooth_values);
        Self {
            alphabet,
            disc,
            result,
            digits,
            smooth_values,
            smooth_monomial,
        }
    }

    pub fn params(&self) -> PressureParams {
        self.result.params
    }

    pub fn pressure(&self) -> f64 {
        self.result.value
    }

    pub fn result(&self) -> &PressureResult {
        &self.result
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Interpolated eigenfunction `h(x)`.
    pub fn eigenfunction(&self, x: f64) -> f64 {
        let sigma = 2.0 * self.result.params.t;
        self.disc.interpolate(&self.smooth_values, x) * (-sigma * (THETA * x).ln_1p()).exp()
    }

    /// Normalized digit law at `x in [0, 1]`.
    pub fn digit_law(&self, x: f64) -> Result<DigitLaw> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("digit law needs x in [0, 1], got {x}")));
        }
        let PressureParams { t, q } = self.result.params;
        let scale = (-self.result.value).exp() / self.eigenfunction(x);
        let mut probabilities: Vec<f64> = self
            .digits
            .iter()
            .map(|&i| {
                let s = i as f64 + x;
                let w = (q * (i as f64).ln() - 2.0 * t * s.ln()).exp();
                scale * w * self.eigenfunction(1.0 / s)
            })
            .collect();
        let mut tail_mass = match self.alphabet.tail_cutoff() {
            Some(cutoff) => {
                let sums = conjugated_tail_sums(x, cutoff, t, q, THETA, self.disc.order(), false);
                let v: f64 = self.smooth_monomial.iter().zip(&sums.value).map(|(c, s)| c * s).sum();
                (scale * v).max(0.0)
            }
            None => 0.0,
        };
        let total: f64 = probabilities.iter().sum::<f64>() + tail_mass;
        probabilities.iter_mut().for_each(|p| *p /= total);
        tail_mass /= total;
        Ok(DigitLaw {
            digits: self.digits.clone(),
            probabilities,
            tail_mass,
            normalizer: total,
        })
    }

    /// `p(i | x)` for a single digit; digits above the cutoff get their share
    /// of the tail mass under the power law `i^{q - 2t}`.
    pub fn digit_probability(&self, i: u64, x: f64) -> Result<f64> {
        if i == 0 {
            return Err(Error::Domain("digits are positive".into()));
        }
        let law = self.digit_law(x)?;
        if let Some(pos) = law.digits.iter().position(|&d| d == i) {
            return Ok(law.probabilities[pos]);
        }
        match self.alphabet.tail_cutoff() {
            Some(cutoff) if i as usize > cutoff => {
                let s = self.result.params.decay();
                let lo = cutoff as f64 + 0.5;
                let share = ((i as f64 - 0.5) / lo).powf(1.0 - s) - ((i as f64 + 0.5) / lo).powf(1.0 - s);
                Ok(law.tail_mass * share)
            }
            _ => Ok(0.0),
        }
    }

    fn draw(&self, law: &DigitLaw, rng: &mut ChaCha8Rng) -> u64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (&d, &p) in law.digits.iter().zip(&law.probabilities) {
            acc += p;
            if u < acc {
                return d;
            }
        }
        match self.alphabet.tail_cutoff() {
            Some(cutoff) if law.tail_mass > 0.0 => {
                // inverse CDF of the continuous power law on [M + 1/2, inf)
                let s = self.result.params.decay();
                let v: f64 = 1.0 - rng.random::<f64>();
                let k = (cutoff as f64 + 0.5) * v.powf(-1.0 / (s - 1.0)) + 0.5;
                if k >= u64::MAX as f64 {
                    u64::MAX
                } else {
                    (k.floor() as u64).max(cutoff as u64 + 1)
                }
            }
            _ => *law.digits.last().expect("alphabet is nonempty"),
        }
    }
}

/// Samples `length` digits from the Gibbs chain started at `x = 0`, using a
/// ChaCha8 generator seeded with `seed`.
pub fn sample_digits(g: &GibbsApprox, length: usize, seed: u64) -> Result<PartialQuotients> {
    if length == 0 {
        return Err(Error::Domain("sample length must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0.0f64;
    let mut out = Vec::with_capacity(length);
    for _ in 0..length {
        let law = g.digit_law(x)?;
        let i = g.draw(&law, &mut rng);
        out.push(BigUint::from(i));
        x = 1.0 / (i as f64 + x);
    }
    PartialQuotients::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::TransferOperator;

    fn gauss() -> GibbsApprox {
        TransferOperator::full(64, 16)
            .unwrap()
            .gibbs(PressureParams::new(1.0, 0.0))
            .unwrap()
    }

    #[test]
    fn gauss_digit_law_is_exact() {
        let g = gauss();
        // for h = 1/(1+x): p(i|x) = (1+x) / ((i+x)(i+1+x))
        for &x in &[0.0, 0.3, 1.0] {
            for i in 1..6u64 {
                let fi = i as f64;
                let exact = (1.0 + x) / ((fi + x) * (fi + 1.0 + x));
                assert!((g.digit_probability(i, x).unwrap() - exact).abs() < 1e-10);
            }
        }
        assert!((g.digit_probability(1, 0.0).unwrap() - 0.5).abs() < 1e-12);
        // averaged over the Gauss measure the first digit is 1 with
        // probability log(4/3)/log 2
        let n = 2000;
        let mut avg = 0.0;
        for k in 0..n {
            let x = (k as f64 + 0.5) / n as f64;
            let density = 1.0 / ((1.0 + x) * std::f64::consts::LN_2);
            avg += g.digit_probability(1, x).unwrap() * density / n as f64;
        }
        assert!((avg - (4.0f64 / 3.0).log2()).abs() < 1e-6);
    }

    #[test]
    fn law_is_normalized_and_tail_consistent() {
        let op = TransferOperator::full(64, 16).unwrap();
        for &(t, q) in &[(1.0, 0.0), (0.9, 0.5), (0.6, 0.15), (2.0, -1.0)] {
            let g = op.gibbs(PressureParams::new(t, q)).unwrap();
            for k in 0..10 {
                let x = k as f64 / 9.0;
                let law = g.digit_law(x).unwrap();
                let raw_total: f64 = law.probabilities.iter().sum::<f64>() + law.tail_mass;
                assert!((raw_total - 1.0).abs() < 1e-12);
                assert!((law.normalizer - 1.0).abs() < 1e-8, "({t},{q}) x={x}: {}", law.normalizer);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = gauss();
        let a = sample_digits(&g, 500, 7).unwrap();
        let b = sample_digits(&g, 500, 7).unwrap();
        let c = sample_digits(&g, 500, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(sample_digits(&g, 0, 1).is_err());
    }
}
