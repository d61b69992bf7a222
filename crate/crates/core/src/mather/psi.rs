//! The bump `Ψ(t) = exp(1 / (t² - 1))` on `|t| < 1` and its derivatives.
//!
//! `Ψ^(k) = Ψ · P_k(t) / (t² - 1)^{2k}` with `P_0 = 1` and
//! `P_{k+1} = P_k' (t² - 1)² - 2t P_k - 4k t (t² - 1) P_k`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::solve::golden_min;

/// Largest smoothness order `r`; derivatives are available up to `r + 1`.
pub const MAX_R: u32 = 8;
const MAX_ORDER: usize = MAX_R as usize + 1;

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] += x;
    }
    out
}

fn poly_eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

fn polys() -> &'static [Vec<f64>] {
    static P: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    P.get_or_init(|| {
        let s = [-1.0, 0.0, 1.0]; // t² - 1
        let s2 = poly_mul(&s, &s);
        let mut out = vec![vec![1.0]];
        for k in 0..MAX_ORDER {
            let p = &out[k];
            let dp: Vec<f64> = if p.len() > 1 {
                p.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect()
            } else {
                vec![0.0]
            };
            let a = poly_mul(&dp, &s2);
            let b = poly_mul(&[0.0, -2.0], p);
            let c = poly_mul(&poly_mul(&[0.0, -4.0 * k as f64], &s), p);
            out.push(poly_add(&poly_add(&a, &b), &c));
        }
        out
    })
}

pub fn psi(t: f64) -> f64 {
    psi_derivative(t, 0)
}

/// `Ψ^(k)(t)` for `k <= 9`; zero for `|t| >= 1`.
pub fn psi_derivative(t: f64, k: usize) -> f64 {
    assert!(k <= MAX_ORDER, "derivative order {k} above {MAX_ORDER}");
    let s = t * t - 1.0;
    if s >= 0.0 {
        return 0.0;
    }
    // exp(1/s) / s^{2k}, combined in the exponent so that neither factor
    // under- or overflows near the edges
    let e = 1.0 / s - 2.0 * k as f64 * (-s).ln();
    e.exp() * poly_eval(&polys()[k], t)
}

const C0_GRID: usize = 100_000;

fn order_max(k: usize) -> f64 {
    let n = C0_GRID;
    let f = |t: f64| psi_derivative(t, k).abs();
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..=n {
        let t = -1.0 + 2.0 * i as f64 / n as f64;
        let v = f(t);
        if v > best.1 {
            best = (i, v);
        }
    }
    let h = 2.0 / n as f64;
    let t = -1.0 + best.0 as f64 * h;
    let (_, neg) = golden_min(|s| -f(s), (t - h).max(-1.0), (t + h).min(1.0), 1e-14);
    best.1.max(-neg)
}

fn order_maxima() -> &'static [f64] {
    static M: OnceLock<Vec<f64>> = OnceLock::new();
    M.get_or_init(|| (0..=MAX_ORDER).map(order_max).collect())
}

/// `max |Ψ^(k)|` over `[-1, 1]`.
pub fn psi_derivative_max(k: usize) -> f64 {
    order_maxima()[k]
}

fn check_r(r: u32) -> Result<()> {
    if r == 0 || r > MAX_R {
        Err(Error::UnsupportedOrder(r))
    } else {
        Ok(())
    }
}

/// `C0(r) = ||Ψ||_{C^{r+1}}`: the largest `|Ψ^(k)|`, `k <= r + 1`.
pub fn c0(r: u32) -> Result<f64> {
    check_r(r)?;
    Ok(order_maxima()[..=r as usize + 1].iter().cloned().fold(0.0, f64::max))
}

/// `C1(r) = Ψ(1/3) 2^{-r-2} / C0(r)`.
pub fn c1(r: u32) -> Result<f64> {
    Ok(psi(1.0 / 3.0) * 0.5f64.powi(r as i32 + 2) / c0(r)?)
}

/// `C2(r) = 2^{-r-1} / C0(r)`.
pub fn c2(r: u32) -> Result<f64> {
    Ok(0.5f64.powi(r as i32 + 1) / c0(r)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert!((psi(0.0) - (-1f64).exp()).abs() < 1e-16);
        assert_eq!(psi(1.0), 0.0);
        assert_eq!(psi(-1.0), 0.0);
        assert_eq!(psi(2.0), 0.0);
        assert!((psi(1.0 / 3.0) - (-9.0f64 / 8.0).exp()).abs() < 1e-16);
    }

    #[test]
    fn recursion_matches_finite_differences() {
        let h = 1e-3;
        for k in 0..6 {
            for &t in &[-0.7, -0.2, 0.0, 0.35, 0.8] {
                let d = |s: f64| psi_derivative(t + s, k) - psi_derivative(t - s, k);
                let fd = (8.0 * d(h) - d(2.0 * h)) / (12.0 * h);
                let exact = psi_derivative(t, k + 1);
                assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "k={k} t={t}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn c0_orders() {
        assert!(c0(1).unwrap() >= psi(0.0));
        let mut prev = 0.0;
        for r in 1..=MAX_R {
            let c = c0(r).unwrap();
            assert!(c >= prev);
            prev = c;
        }
        assert!(c0(0).is_err() && c0(9).is_err());
    }
}
