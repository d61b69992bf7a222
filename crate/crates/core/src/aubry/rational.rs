//! Exact continued-fraction arithmetic for rotation-number targets.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Convergent `p/q` with exact integer numerator and denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergent {
    pub p: BigInt,
    pub q: BigInt,
}

impl Convergent {
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.p.clone(), self.q.clone())
    }

    /// `(p, q)` when both fit in `i64`.
    pub fn to_i64(&self) -> Option<(i64, i64)> {
        Some((self.p.to_i64()?, self.q.to_i64()?))
    }
}

/// Simple continued fraction `[a0; a1, a2, ...]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuedFraction {
    quotients: Vec<BigInt>,
    /// Exact value when the fraction was expanded from a rational.
    value: Option<BigRational>,
}

impl ContinuedFraction {
    pub fn from_quotients(quotients: Vec<BigInt>) -> Self {
        Self { quotients, value: None }
    }

    /// Expansion of an exact rational (terminates).
    pub fn from_rational(x: &BigRational) -> Self {
        let mut quotients = Vec::new();
        let mut num = x.numer().clone();
        let mut den = x.denom().clone();
        while !den.is_zero() {
            let (a, r) = num.div_mod_floor(&den);
            quotients.push(a);
            num = den;
            den = r;
        }
        Self { quotients, value: Some(x.clone()) }
    }

    /// `[1; 1, 1, ...]` with `n` quotients.
    pub fn golden(n: usize) -> Self {
        Self::from_quotients(vec![BigInt::one(); n])
    }

    pub fn quotients(&self) -> &[BigInt] {
        &self.quotients
    }

    pub fn len(&self) -> usize {
        self.quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotients.is_empty()
    }

    /// Exact value: the stored rational, or the last convergent.
    pub fn value(&self) -> BigRational {
        match &self.value {
            Some(v) => v.clone(),
            None => {
                let all = convergents(self, self.len()).expect("length is available");
                all.last().map(Convergent::to_rational).unwrap_or_else(BigRational::zero)
            }
        }
    }
}

/// First `k` convergents `p_i/q_i` by the recurrence
/// `p_i = a_i p_{i-1} + p_{i-2}`, `q_i = a_i q_{i-1} + q_{i-2}`.
pub fn convergents(cf: &ContinuedFraction, k: usize) -> Result<Vec<Convergent>> {
    if k > cf.len() {
        return Err(Error::InsufficientQuotients { requested: k, available: cf.len() });
    }
    // (p_{-2}, p_{-1}) = (0, 1), (q_{-2}, q_{-1}) = (1, 0)
    let (mut p_prev, mut p) = (BigInt::zero(), BigInt::one());
    let (mut q_prev, mut q) = (BigInt::one(), BigInt::zero());
    let mut out = Vec::with_capacity(k);
    for a in &cf.quotients[..k] {
        let p_next = a * &p + &p_prev;
        let q_next = a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        out.push(Convergent { p: p.clone(), q: q.clone() });
    }
    Ok(out)
}

/// Partial sum `sum_{n=1}^{terms} base^{-n!}` of the Liouville constant.
pub fn liouville_partial_sum(terms: u32, base: u32) -> BigRational {
    let mut sum = BigRational::zero();
    let mut fact: u32 = 1;
    for n in 1..=terms {
        fact *= n;
        sum += BigRational::new(BigInt::one(), BigInt::from(base).pow(fact));
    }
    sum
}

/// `log10 |x|` for a nonzero big integer, accurate to double precision.
pub(crate) fn log10_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.abs().to_f64().expect("finite").log10();
    }
    let shift = bits - 60;
    let top: BigInt = x.abs() >> shift;
    top.to_f64().expect("finite").log10() + shift as f64 * std::f64::consts::LOG10_2
}

/// `log10(|ω - p/q| q^τ)`; `-inf` when `ω = p/q`.
pub fn log10_liouville_deficiency(omega: &BigRational, p: &BigInt, q: &BigInt, tau: f64) -> f64 {
    let diff = (omega - BigRational::new(p.clone(), q.clone())).abs();
    if diff.is_zero() {
        return f64::NEG_INFINITY;
    }
    log10_bigint(diff.numer()) - log10_bigint(diff.denom()) + tau * log10_bigint(q)
}

/// `|ω - p/q| · q^τ` computed from exact rationals.
pub fn liouville_deficiency(omega: &BigRational, p: i64, q: i64, tau: f64) -> Result<f64> {
    if q <= 0 {
        return Err(Error::NonPositiveDenominator(q));
    }
    Ok(10f64.powf(log10_liouville_deficiency(omega, &BigInt::from(p), &BigInt::from(q), tau)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn golden_convergents_are_fibonacci_ratios() {
        let c = convergents(&ContinuedFraction::golden(5), 5).unwrap();
        let got: Vec<(i64, i64)> = c.iter().map(|c| c.to_i64().unwrap()).collect();
        assert_eq!(got, vec![(1, 1), (2, 1), (3, 2), (5, 3), (8, 5)]);
    }

    #[test]
    fn short_fraction() {
        let cf = ContinuedFraction::from_quotients(vec![BigInt::zero(), BigInt::from(2)]);
        let c = convergents(&cf, 2).unwrap();
        assert_eq!(c[1].to_rational(), rat(1, 2));
        assert!(matches!(convergents(&cf, 3), Err(Error::InsufficientQuotients { .. })));
    }

    #[test]
    fn liouville_partial_sums() {
        assert_eq!(liouville_partial_sum(2, 10), rat(11, 100));
        assert_eq!(liouville_partial_sum(3, 10), rat(110001, 1_000_000));
        assert_eq!(liouville_partial_sum(1, 2), rat(1, 2));
    }

    #[test]
    fn rational_expansion_round_trips() {
        let x = liouville_partial_sum(4, 10);
        let cf = ContinuedFraction::from_rational(&x);
        assert_eq!(cf.quotients()[..4], [0, 9, 11, 99].map(BigInt::from));
        let last = convergents(&cf, cf.len()).unwrap().pop().unwrap();
        assert_eq!(last.to_rational(), x);
    }

    #[test]
    fn deficiency_examples() {
        let s4 = liouville_partial_sum(4, 10);
        let d = liouville_deficiency(&s4, 110001, 1_000_000, 3.0).unwrap();
        assert!((d - 1e-6).abs() < 1e-18);
        assert_eq!(liouville_deficiency(&rat(3, 7), 3, 7, 2.0).unwrap(), 0.0);
        let golden = ContinuedFraction::golden(80).value();
        let d = liouville_deficiency(&golden, 8, 5, 2.0).unwrap();
        assert!((d - 0.450849718747).abs() < 1e-9, "{d}");
    }
}
