use gauss_spectra::acceptance::exact_property_violation;
use gauss_spectra::cf::{continuant, convergents, expand_rational, ln_biguint, PartialQuotients};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use proptest::prelude::*;

fn digit() -> impl Strategy<Value = u64> {
    prop_oneof![9 => 1u64..=30, 1 => 1u64..=10_000_000]
}

fn tuple() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(digit(), 1..=16)
}

proptest! {
    #[test]
    fn exact_identities(digits in tuple(), den in 2u64..5000, num_frac in 0.0f64..1.0) {
        let num = ((num_frac * (den - 1) as f64) as u64).max(1);
        let y = BigRational::new(num.into(), den.into());
        prop_assert_eq!(exact_property_violation(&digits, &y), None);
    }

    #[test]
    fn insertion_bound(digits in tuple(), b in digit()) {
        // appending b multiplies q_n by a factor in [(b+1)/2, b+1]
        let q = continuant(&PartialQuotients::from_u64(&digits).unwrap());
        let mut longer = digits.clone();
        longer.push(b);
        let q1 = continuant(&PartialQuotients::from_u64(&longer).unwrap());
        prop_assert!(BigUint::from(2u32) * &q1 >= &q * BigUint::from(b + 1));
        prop_assert!(q1 <= &q * BigUint::from(b + 1));
    }

    #[test]
    fn continuant_growth(digits in prop::collection::vec(1u64..=50, 1..=40)) {
        // q_n >= 2^{(n-1)/2}
        let q = continuant(&PartialQuotients::from_u64(&digits).unwrap());
        let n = digits.len() as f64;
        prop_assert!(ln_biguint(&q) >= 0.5 * (n - 1.0) * 2f64.ln() - 1e-12);
    }

    #[test]
    fn rational_reconstruction(digits in tuple()) {
        prop_assume!(digits != [1]);
        // the last convergent expands back to the same digits, up to the
        // terminal ambiguity [.., a] = [.., a - 1, 1]
        let pq = PartialQuotients::from_u64(&digits).unwrap();
        let conv = convergents(&pq);
        let last = conv.last().unwrap();
        let x = BigRational::new(BigInt::from(last.p.clone()), BigInt::from(last.q.clone()));
        let mut canonical = digits.clone();
        if canonical.len() > 1 && *canonical.last().unwrap() == 1 {
            canonical.pop();
            *canonical.last_mut().unwrap() += 1;
        }
        let back = expand_rational(&x, canonical.len()).unwrap();
        prop_assert_eq!(back.to_u64().unwrap(), canonical);
    }
}
