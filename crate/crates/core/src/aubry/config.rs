use std::fmt;

use crate::error::{Error, Result};
use crate::solve::mod1;

/// Rotation data of a periodic configuration: `x_{i+q} = x_i + p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Period {
    pub p: i64,
    pub q: i64,
}

/// A finite window `(x_j, ..., x_k)` of a configuration, indexed from
/// `offset = j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    offset: i64,
    entries: Vec<f64>,
    period: Option<Period>,
}

impl Configuration {
    pub fn new(offset: i64, entries: Vec<f64>) -> Self {
        Self { offset, entries, period: None }
    }

    /// Periodic configuration from one period `x_0, ..., x_{q-1}`; the stored
    /// window gets `x_q = x_0 + p` appended.
    pub fn periodic(p: i64, q: i64, mut one_period: Vec<f64>) -> Result<Self> {
        if q <= 0 {
            return Err(Error::NonPositiveDenominator(q));
        }
        if one_period.len() != q as usize {
            return Err(Error::InvalidArgument(format!(
                "periodic configuration needs {q} entries, got {}",
                one_period.len()
            )));
        }
        one_period.push(one_period[0] + p as f64);
        Ok(Self { offset: 0, entries: one_period, period: Some(Period { p, q }) })
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn period(&self) -> Option<Period> {
        self.period
    }

    /// Index range `offset ..= offset + len - 1`.
    pub fn indices(&self) -> std::ops::Range<i64> {
        self.offset..self.offset + self.entries.len() as i64
    }

    /// Entry at absolute index `i`. Periodic configurations extend to every
    /// index; others return `None` outside the stored window.
    pub fn at(&self, i: i64) -> Option<f64> {
        match self.period {
            Some(Period { p, q }) => {
                let k = (i - self.offset).rem_euclid(q);
                let shift = (i - self.offset - k) / q;
                Some(self.entries[k as usize] + (shift * p) as f64)
            }
            None => {
                let k = i - self.offset;
                (k >= 0 && (k as usize) < self.entries.len()).then(|| self.entries[k as usize])
            }
        }
    }

    /// Window `[from, to]` of this configuration as a new (non-periodic)
    /// configuration.
    pub fn window(&self, from: i64, to: i64) -> Option<Configuration> {
        let entries: Option<Vec<f64>> = (from..=to).map(|i| self.at(i)).collect();
        entries.map(|e| Configuration::new(from, e))
    }

    /// Translate `T_(a,b)`: `x'_i = x_{i-a} + b`.
    pub fn translate(&self, a: i64, b: i64) -> Configuration {
        Configuration {
            offset: self.offset + a,
            entries: self.entries.iter().map(|x| x + b as f64).collect(),
            period: self.period,
        }
    }
}

/// Rotation symbol of a minimal configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RotationSymbol {
    Irrational(f64),
    Rational { p: i64, q: i64 },
    RationalPlus { p: i64, q: i64 },
    RationalMinus { p: i64, q: i64 },
}

impl fmt::Display for RotationSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RotationSymbol::Irrational(w) => write!(f, "{w}"),
            RotationSymbol::Rational { p, q } => write!(f, "{p}/{q}"),
            RotationSymbol::RationalPlus { p, q } => write!(f, "{p}/{q}+"),
            RotationSymbol::RationalMinus { p, q } => write!(f, "{p}/{q}-"),
        }
    }
}

pub(crate) fn check_reduced(p: i64, q: i64) -> Result<()> {
    if q <= 0 {
        return Err(Error::NonPositiveDenominator(q));
    }
    if num_integer::gcd(p, q) != 1 {
        return Err(Error::NotReduced { p, q });
    }
    Ok(())
}

const SYMBOL_TOL: f64 = 1e-12;

/// Compares `x'_i = x_{i+q} - p` with `x_i` over the window.
pub fn rotation_symbol_of(x: &Configuration, p: i64, q: i64) -> Result<RotationSymbol> {
    check_reduced(p, q)?;
    if x.len() < 2 * q as usize + 1 {
        return Err(Error::InvalidArgument(format!(
            "window of length {} is shorter than 2q + 1 = {}",
            x.len(),
            2 * q + 1
        )));
    }
    let e = x.entries();
    let q = q as usize;
    let diffs: Vec<f64> = (0..e.len() - q).map(|i| e[i + q] - p as f64 - e[i]).collect();
    let (p, q) = (p, q as i64);
    if diffs.iter().all(|d| d.abs() <= SYMBOL_TOL) {
        Ok(RotationSymbol::Rational { p, q })
    } else if diffs.iter().all(|&d| d > 0.0) {
        Ok(RotationSymbol::RationalPlus { p, q })
    } else if diffs.iter().all(|&d| d < 0.0) {
        Ok(RotationSymbol::RationalMinus { p, q })
    } else {
        Err(Error::NonUniformComparison)
    }
}

/// Number of sign changes of `x_i - y_i`; zeros are skipped, so touching
/// without changing side does not count.
pub fn crossing_count(x: &Configuration, y: &Configuration) -> Result<usize> {
    if x.offset() != y.offset() || x.len() != y.len() {
        return Err(Error::MismatchedWindows);
    }
    let mut last = 0.0f64;
    let mut count = 0;
    for (a, b) in x.entries().iter().zip(y.entries()) {
        let s = (a - b).signum();
        if a == b {
            continue;
        }
        if last != 0.0 && s != last {
            count += 1;
        }
        last = s;
    }
    Ok(count)
}

/// Largest empty arc of a finite subset of the circle `R/Z`.
///
/// The returned interval is `(start, start + gap)`, with `start` in `[0, 1)`.
pub fn nondensity_gap(points: &[f64]) -> Result<(f64, (f64, f64))> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: points.len() });
    }
    let mut pts: Vec<f64> = points.iter().map(|&x| mod1(x)).collect();
    pts.sort_by(f64::total_cmp);
    // ties go to the smallest left endpoint, the wrapping arc last
    let mut best = (f64::NEG_INFINITY, 0.0);
    for w in pts.windows(2) {
        let g = w[1] - w[0];
        if g > best.0 + 1e-12 {
            best = (g, w[0]);
        }
    }
    let wrap = pts[0] + 1.0 - pts[pts.len() - 1];
    if wrap > best.0 + 1e-12 {
        best = (wrap, pts[pts.len() - 1]);
    }
    Ok((best.0, (best.1, best.1 + best.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_extension_and_translates() {
        let c = Configuration::periodic(1, 2, vec![0.1, 0.6]).unwrap();
        assert_eq!(c.entries(), &[0.1, 0.6, 1.1]);
        assert_eq!(c.at(2), Some(1.1));
        assert_eq!(c.at(-1), Some(0.6 - 1.0));
        assert_eq!(c.at(5), Some(0.6 + 2.0));
        let t = c.window(0, 3).unwrap().translate(1, 2);
        assert_eq!(t.at(1), Some(2.1));
        assert_eq!(t.offset(), 1);
    }

    #[test]
    fn rotation_symbol_examples() {
        let exact = Configuration::new(0, (0..21).map(|i| i as f64 / 2.0).collect());
        assert_eq!(rotation_symbol_of(&exact, 1, 2).unwrap(), RotationSymbol::Rational { p: 1, q: 2 });
        let above = Configuration::new(0, (0..21).map(|i| i as f64 / 2.0 + 0.1 * (1.0 - 0.5f64.powi(i))).collect());
        assert_eq!(rotation_symbol_of(&above, 1, 2).unwrap(), RotationSymbol::RationalPlus { p: 1, q: 2 });
        let below = Configuration::new(0, (0..21).map(|i| i as f64 / 2.0 - 0.1 * (1.0 - 0.5f64.powi(i))).collect());
        assert_eq!(rotation_symbol_of(&below, 1, 2).unwrap(), RotationSymbol::RationalMinus { p: 1, q: 2 });
        let crossing = Configuration::new(0, (0..21).map(|i| i as f64 / 2.0 + 0.01 * (i as f64 - 10.0).powi(2)).collect());
        assert_eq!(rotation_symbol_of(&crossing, 1, 2), Err(Error::NonUniformComparison));
        assert_eq!(rotation_symbol_of(&exact, 2, 4), Err(Error::NotReduced { p: 2, q: 4 }));
    }

    #[test]
    fn crossing_count_examples() {
        let idx: Vec<i64> = (-5..=5).collect();
        let x = Configuration::new(-5, idx.iter().map(|&i| 0.5 * i as f64).collect());
        let y = Configuration::new(-5, idx.iter().map(|&i| 0.5 * i as f64 + 0.25).collect());
        assert_eq!(crossing_count(&x, &y).unwrap(), 0);
        let zero = Configuration::new(-5, vec![0.0; 11]);
        let line = Configuration::new(-5, idx.iter().map(|&i| 0.1 * (i as f64 - 0.5)).collect());
        assert_eq!(crossing_count(&zero, &line).unwrap(), 1);
        assert_eq!(crossing_count(&x, &x).unwrap(), 0);
        let short = Configuration::new(-4, vec![0.0; 10]);
        assert_eq!(crossing_count(&x, &short), Err(Error::MismatchedWindows));
    }

    #[test]
    fn zero_followed_by_sign_change_is_one_crossing() {
        let a = Configuration::new(0, vec![1.0, 0.0, -1.0]);
        let b = Configuration::new(0, vec![0.0, 0.0, 0.0]);
        assert_eq!(crossing_count(&a, &b).unwrap(), 1);
        let touch = Configuration::new(0, vec![1.0, 0.0, 1.0]);
        assert_eq!(crossing_count(&touch, &b).unwrap(), 0);
    }

    #[test]
    fn gap_examples() {
        let (g, _) = nondensity_gap(&[0.0, 0.25, 0.5, 0.75]).unwrap();
        assert!((g - 0.25).abs() < 1e-15);
        let (g, (a, b)) = nondensity_gap(&[0.0, 0.1, 0.2]).unwrap();
        assert!((g - 0.8).abs() < 1e-15);
        assert_eq!((a, b), (0.2, 1.0));
        assert!(nondensity_gap(&[0.3]).is_err());
        assert_eq!(nondensity_gap(&[0.5, 0.0]).unwrap().1, (0.0, 0.5));
        assert_eq!(nondensity_gap(&[0.0, 0.25, 0.5, 0.75]).unwrap().1, (0.0, 0.25));
    }
}
