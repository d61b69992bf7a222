//! Flat Finsler geometry on the 2-torus.
//!
//! A flat metric is one norm `φ` on the plane. Its dual norm, the Legendre
//! map, the section function `f0` describing the level set `φ* = 1` over the
//! `p1` axis, and the return map `R1(q1, p1) = (q1 + f0'(p1), p1)` to the
//! section `q2 = -1/2` are computed here.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::genfun::{ConditionReport, ConditionResult, GeneratingFunction};
use crate::solve::{mod1, newton_bisect};

type Vec2 = [f64; 2];
type Mat2 = [[f64; 2]; 2];

/// Closed-form norm families. Values are before normalization.
#[derive(Clone)]
pub enum NormFamily {
    Euclidean,
    /// `sqrt(a v1^2 + b v2^2)`.
    Ellipse { a: f64, b: f64 },
    /// `|v| + beta v1`, non-reversible for `beta != 0`.
    Randers { beta: f64 },
    /// `(v1^4 + v2^4 + c v1^2 v2^2)^(1/4)`.
    Quartic { c: f64 },
    /// Arbitrary evaluator; derivatives by central differences.
    Custom { label: String, eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync> },
}

impl fmt::Debug for NormFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormFamily::Euclidean => write!(f, "Euclidean"),
            NormFamily::Ellipse { a, b } => write!(f, "Ellipse {{ a: {a}, b: {b} }}"),
            NormFamily::Randers { beta } => write!(f, "Randers {{ beta: {beta} }}"),
            NormFamily::Quartic { c } => write!(f, "Quartic {{ c: {c} }}"),
            NormFamily::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

/// Step of the central differences used by [`NormFamily::Custom`].
pub const NORM_FD_STEP: f64 = 1e-5;

/// A norm on the plane, rescaled so that `φ(e1) = 1`.
#[derive(Clone, Debug)]
pub struct FinslerNorm {
    family: NormFamily,
    scale: f64,
}

impl FinslerNorm {
    pub fn new(family: NormFamily) -> Self {
        let raw = FinslerNorm { family, scale: 1.0 };
        let scale = 1.0 / raw.value([1.0, 0.0]);
        FinslerNorm { scale, ..raw }
    }

    pub fn euclidean() -> Self {
        Self::new(NormFamily::Euclidean)
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        Self::new(NormFamily::Ellipse { a, b })
    }

    pub fn randers(beta: f64) -> Self {
        Self::new(NormFamily::Randers { beta })
    }

    pub fn quartic(c: f64) -> Self {
        Self::new(NormFamily::Quartic { c })
    }

    pub fn custom(label: impl Into<String>, eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(NormFamily::Custom { label: label.into(), eval: Arc::new(eval) })
    }

    pub fn family(&self) -> &NormFamily {
        &self.family
    }

    pub fn label(&self) -> String {
        format!("{:?}", self.family)
    }

    pub fn reversible(&self) -> bool {
        match &self.family {
            NormFamily::Randers { beta } => *beta == 0.0,
            NormFamily::Custom { .. } => {
                let probes = [[1.0, 0.0], [0.3, 0.8], [-0.6, 0.2], [0.1, -1.0]];
                probes.iter().all(|&v| (self.value(v) - self.value([-v[0], -v[1]])).abs() < 1e-12)
            }
            _ => true,
        }
    }

    pub fn value(&self, v: Vec2) -> f64 {
        let [x, y] = v;
        let raw = match &self.family {
            NormFamily::Euclidean => x.hypot(y),
            NormFamily::Ellipse { a, b } => (a * x * x + b * y * y).sqrt(),
            NormFamily::Randers { beta } => x.hypot(y) + beta * x,
            NormFamily::Quartic { c } => {
                let q = x.powi(4) + y.powi(4) + c * x * x * y * y;
                if q < 0.0 {
                    f64::NAN
                } else {
                    q.powf(0.25)
                }
            }
            NormFamily::Custom { eval, .. } => eval(x, y),
        };
        self.scale * raw
    }

    pub fn gradient(&self, v: Vec2) -> Vec2 {
        let [x, y] = v;
        let g = match &self.family {
            NormFamily::Euclidean => {
                let n = x.hypot(y);
                [x / n, y / n]
            }
            NormFamily::Ellipse { a, b } => {
                let n = (a * x * x + b * y * y).sqrt();
                [a * x / n, b * y / n]
            }
            NormFamily::Randers { beta } => {
                let n = x.hypot(y);
                [x / n + beta, y / n]
            }
            NormFamily::Quartic { c } => {
                let q = x.powi(4) + y.powi(4) + c * x * x * y * y;
                let f = 0.25 * q.powf(-0.75);
                [f * (4.0 * x.powi(3) + 2.0 * c * x * y * y), f * (4.0 * y.powi(3) + 2.0 * c * x * x * y)]
            }
            NormFamily::Custom { eval, .. } => {
                let h = NORM_FD_STEP;
                [
                    (eval(x + h, y) - eval(x - h, y)) / (2.0 * h),
                    (eval(x, y + h) - eval(x, y - h)) / (2.0 * h),
                ]
            }
        };
        [self.scale * g[0], self.scale * g[1]]
    }

    pub fn hessian(&self, v: Vec2) -> Mat2 {
        let [x, y] = v;
        let h = match &self.family {
            NormFamily::Euclidean | NormFamily::Randers { .. } => {
                let n = x.hypot(y);
                let n3 = n * n * n;
                [[y * y / n3, -x * y / n3], [-x * y / n3, x * x / n3]]
            }
            NormFamily::Ellipse { a, b } => {
                let n = (a * x * x + b * y * y).sqrt();
                let g = [a * x / n, b * y / n];
                [
                    [(a - g[0] * g[0]) / n, -g[0] * g[1] / n],
                    [-g[0] * g[1] / n, (b - g[1] * g[1]) / n],
                ]
            }
            NormFamily::Quartic { c } => {
                let q = x.powi(4) + y.powi(4) + c * x * x * y * y;
                let dq = [4.0 * x.powi(3) + 2.0 * c * x * y * y, 4.0 * y.powi(3) + 2.0 * c * x * x * y];
                let hq = [
                    [12.0 * x * x + 2.0 * c * y * y, 4.0 * c * x * y],
                    [4.0 * c * x * y, 12.0 * y * y + 2.0 * c * x * x],
                ];
                let a = 0.25 * q.powf(-0.75);
                let b = -3.0 / 16.0 * q.powf(-1.75);
                let mut m = [[0.0; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        m[i][j] = a * hq[i][j] + b * dq[i] * dq[j];
                    }
                }
                m
            }
            NormFamily::Custom { eval, .. } => {
                let s = NORM_FD_STEP;
                let c = eval(x, y);
                let hxx = (eval(x + s, y) - 2.0 * c + eval(x - s, y)) / (s * s);
                let hyy = (eval(x, y + s) - 2.0 * c + eval(x, y - s)) / (s * s);
                let hxy = (eval(x + s, y + s) - eval(x + s, y - s) - eval(x - s, y + s) + eval(x - s, y - s))
                    / (4.0 * s * s);
                [[hxx, hxy], [hxy, hyy]]
            }
        };
        [[self.scale * h[0][0], self.scale * h[0][1]], [self.scale * h[1][0], self.scale * h[1][1]]]
    }

    /// Hessian of `φ²/2`: `∇φ ∇φᵀ + φ Hφ`.
    pub fn half_square_hessian(&self, v: Vec2) -> Mat2 {
        let g = self.gradient(v);
        let h = self.hessian(v);
        let n = self.value(v);
        [
            [g[0] * g[0] + n * h[0][0], g[0] * g[1] + n * h[0][1]],
            [g[1] * g[0] + n * h[1][0], g[1] * g[1] + n * h[1][1]],
        ]
    }

    /// `Λ = φ(-e1)`.
    pub fn lambda(&self) -> f64 {
        self.value([-1.0, 0.0])
    }

    /// Checks homogeneity, positivity, quadratic convexity and
    /// normalization on `samples` directions of the unit circle.
    pub fn validate(&self, samples: usize) -> ConditionReport {
        let mut report = ConditionReport::new(self.label());
        let dirs: Vec<Vec2> = (0..samples.max(8))
            .map(|k| {
                let t = 2.0 * PI * k as f64 / samples.max(8) as f64;
                [t.cos(), t.sin()]
            })
            .collect();

        let mut witness = None;
        let mut worst = 0.0f64;
        for &d in &dirs {
            let base = self.value(d);
            for lam in [0.5, 3.0, 17.0] {
                let rel = ((self.value([lam * d[0], lam * d[1]]) - lam * base) / (lam * base)).abs();
                worst = worst.max(if rel.is_nan() { f64::INFINITY } else { rel });
                if !(rel <= 1e-12) && witness.is_none() {
                    witness = Some((d[0], d[1]));
                }
            }
        }
        report.push(ConditionResult::from_witness("homogeneity", witness).with("max_rel_defect", worst));

        let witness = dirs.iter().find(|d| !(self.value(**d) > 0.0)).map(|d| (d[0], d[1]));
        report.push(ConditionResult::from_witness("positivity", witness));

        let mut min_eig = f64::INFINITY;
        let mut witness = None;
        for &d in &dirs {
            let n = self.value(d);
            let unit = [d[0] / n, d[1] / n];
            let e = min_eigenvalue(self.half_square_hessian(unit));
            let e = if e.is_nan() { f64::NEG_INFINITY } else { e };
            if e < min_eig {
                min_eig = e;
            }
            if !(e > 0.0) && witness.is_none() {
                witness = Some((d[0], d[1]));
            }
        }
        report.push(ConditionResult::from_witness("quadratic_convexity", witness).with("min_eigenvalue", min_eig));

        let e1 = self.value([1.0, 0.0]);
        let normalized = ConditionResult::from_witness(
            "normalization",
            ((e1 - 1.0).abs() > 1e-12 || e1.is_nan()).then_some((1.0, 0.0)),
        );
        report.push(normalized.with("phi_e1", e1));
        report
    }
}

fn min_eigenvalue(m: Mat2) -> f64 {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    0.5 * tr - disc
}

fn inverse(m: Mat2) -> Mat2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

/// Number of directions sampled before the Newton polish in [`dual_norm`].
pub const DUAL_RESOLUTION: usize = 720;

/// Supremum of `α(v)` over the unit circle of `phi`, with the maximizing
/// unit vector.
pub fn dual_norm_with_maximizer(phi: &FinslerNorm, alpha: Vec2) -> Result<(f64, Vec2)> {
    dual_norm_at_resolution(phi, alpha, DUAL_RESOLUTION)
}

pub fn dual_norm(phi: &FinslerNorm, alpha: Vec2) -> Result<f64> {
    dual_norm_with_maximizer(phi, alpha).map(|(v, _)| v)
}

pub fn dual_norm_at_resolution(phi: &FinslerNorm, alpha: Vec2, resolution: usize) -> Result<(f64, Vec2)> {
    if alpha == [0.0, 0.0] {
        return Ok((0.0, [1.0 / phi.value([1.0, 0.0]), 0.0]));
    }
    let n = resolution.max(8);
    let dir = |t: f64| [t.cos(), t.sin()];
    let ratio = |t: f64| {
        let d = dir(t);
        (alpha[0] * d[0] + alpha[1] * d[1]) / phi.value(d)
    };
    let step = 2.0 * PI / n as f64;
    let best = (0..n)
        .map(|k| k as f64 * step)
        .max_by(|&a, &b| ratio(a).total_cmp(&ratio(b)))
        .expect("non-empty sample");

    // ∇φ(d) × α vanishes at the maximizer; positive before it, negative after.
    let g = |t: f64| {
        let d = dir(t);
        let gr = phi.gradient(d);
        let h = phi.hessian(d);
        let perp = [-d[1], d[0]];
        let val = gr[0] * alpha[1] - gr[1] * alpha[0];
        let hp = [h[0][0] * perp[0] + h[0][1] * perp[1], h[1][0] * perp[0] + h[1][1] * perp[1]];
        (val, hp[0] * alpha[1] - hp[1] * alpha[0])
    };
    let t = newton_bisect(g, best - step, best + step, 1e-15, 200)
        .ok_or(Error::DualNormNonConvergence(alpha[0], alpha[1]))?;
    let d = dir(t);
    let n = phi.value(d);
    let v = [d[0] / n, d[1] / n];
    Ok((alpha[0] * v[0] + alpha[1] * v[1], v))
}

/// Legendre transform of a unit vector: the unit covector `α` with
/// `α(v) = 1`, i.e. `∇φ(v)`.
pub fn legendre(phi: &FinslerNorm, v: Vec2) -> Result<Vec2> {
    let n = phi.value(v);
    if !((n - 1.0).abs() <= 1e-10) {
        return Err(Error::NotUnitVector(v[0], v[1], n));
    }
    Ok(phi.gradient(v))
}

/// Point of the section `Γ0` above a given `p1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionPoint {
    pub p1: f64,
    pub p2: f64,
    /// Unit vector `v = ∇Ψ(p1, p2)` (the inverse Legendre image).
    pub velocity: Vec2,
}

/// The section chart of a normalized flat norm: `f0` on `(-Λ, 1)`.
#[derive(Debug, Clone)]
pub struct SectionChart {
    norm: FinslerNorm,
    lambda: f64,
}

pub fn build_section(phi: &FinslerNorm) -> SectionChart {
    let lambda = phi.lambda();
    SectionChart { norm: phi.clone(), lambda }
}

impl SectionChart {
    pub fn norm(&self) -> &FinslerNorm {
        &self.norm
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn domain(&self) -> (f64, f64) {
        (-self.lambda, 1.0)
    }

    fn check_domain(&self, p1: f64) -> Result<()> {
        if p1 > -self.lambda && p1 < 1.0 {
            Ok(())
        } else {
            Err(Error::OutsideSection { p1, lo: -self.lambda, hi: 1.0 })
        }
    }

    /// Solves for the point of the dual unit circle above `p1` with
    /// `Ψ2 > 0`. Walking the upper half of the unit circle of `φ` from `e1`
    /// to `-e1`, the first component of `∇φ` decreases from `1` to `-Λ`,
    /// so the root in the angle is bracketed by `(0, π)`.
    pub fn point(&self, p1: f64) -> Result<SectionPoint> {
        self.check_domain(p1)?;
        let phi = &self.norm;
        let k = |t: f64| {
            let d = [t.cos(), t.sin()];
            let g = phi.gradient(d);
            let h = phi.hessian(d);
            let perp = [-d[1], d[0]];
            (g[0] - p1, h[0][0] * perp[0] + h[0][1] * perp[1])
        };
        let t = newton_bisect(k, 0.0, PI, 1e-16, 400).ok_or(Error::SectionBracket(p1))?;
        let d = [t.cos(), t.sin()];
        let g = phi.gradient(d);
        let n = phi.value(d);
        Ok(SectionPoint { p1, p2: g[1], velocity: [d[0] / n, d[1] / n] })
    }

    pub fn f0(&self, p1: f64) -> Result<f64> {
        Ok(-self.point(p1)?.p2)
    }

    /// `f0'(p1) = Ψ1 / Ψ2`.
    pub fn f0_prime(&self, p1: f64) -> Result<f64> {
        let v = self.point(p1)?.velocity;
        Ok(v[0] / v[1])
    }

    /// Hessian of `Ψ = (φ*)²/2` at the section point above `p1`, as the
    /// inverse of the Hessian of `φ²/2` at the dual unit vector.
    pub fn psi_hessian(&self, p1: f64) -> Result<Mat2> {
        let v = self.point(p1)?.velocity;
        Ok(inverse(self.norm.half_square_hessian(v)))
    }

    /// `f0'' = (1, -f0') HΨ (1, -f0')ᵀ / Ψ2`, from differentiating
    /// `Ψ(p1, -f0(p1)) = 1/2` twice.
    pub fn f0_second(&self, p1: f64) -> Result<f64> {
        let pt = self.point(p1)?;
        let v = pt.velocity;
        let fp = v[0] / v[1];
        let h = inverse(self.norm.half_square_hessian(v));
        let t = [1.0, -fp];
        let quad = t[0] * (h[0][0] * t[0] + h[0][1] * t[1]) + t[1] * (h[1][0] * t[0] + h[1][1] * t[1]);
        Ok(quad / v[1])
    }

    pub fn poincare_r1_lift(&self, q1: f64, p1: f64) -> Result<(f64, f64)> {
        Ok((q1 + self.f0_prime(p1)?, p1))
    }

    /// `R1(q1, p1) = (q1 + f0'(p1) mod 1, p1)`.
    pub fn poincare_r1(&self, q1: f64, p1: f64) -> Result<(f64, f64)> {
        let (q, p) = self.poincare_r1_lift(q1, p1)?;
        Ok((mod1(q), p))
    }
}

/// Lower bound for the twist `f0''` measured on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistBound {
    /// Smallest eigenvalue of `HΨ` seen on the grid.
    pub delta1: f64,
    /// Largest `Ψ2` seen on the grid.
    pub delta2: f64,
    pub bound: f64,
    pub min_f0_second: f64,
    /// First grid point where `f0'' < bound`, if any.
    pub violation: Option<f64>,
}

impl TwistBound {
    pub fn holds(&self) -> bool {
        self.violation.is_none() && self.bound > 0.0
    }
}

pub fn twist_lower_bound(chart: &SectionChart, grid: &[f64]) -> Result<TwistBound> {
    let (lo, hi) = chart.domain();
    if let Some(&p) = grid.iter().find(|&&p| !(p > lo && p < hi)) {
        return Err(Error::GridTouchesBoundary(p));
    }
    let mut delta1 = f64::INFINITY;
    let mut delta2 = 0.0f64;
    let mut seconds = Vec::with_capacity(grid.len());
    for &p in grid {
        let pt = chart.point(p)?;
        delta1 = delta1.min(min_eigenvalue(chart.psi_hessian(p)?));
        delta2 = delta2.max(pt.velocity[1]);
        seconds.push((p, chart.f0_second(p)?));
    }
    let bound = delta1 / delta2;
    let violation = seconds.iter().find(|&&(_, s)| !(s >= bound * (1.0 - 1e-12))).map(|&(p, _)| p);
    let min_f0_second = seconds.iter().map(|&(_, s)| s).fold(f64::INFINITY, f64::min);
    Ok(TwistBound { delta1, delta2, bound, min_f0_second, violation })
}

/// `h(q, q') = φ((q' - q, 1))`, the distance between `(q, 0)` and `(q', 1)`
/// on the flat torus (straight segments are minimal).
#[derive(Debug, Clone)]
pub struct FlatGeneratingFunction {
    norm: FinslerNorm,
}

pub fn flat_generating_function(phi: &FinslerNorm) -> FlatGeneratingFunction {
    FlatGeneratingFunction { norm: phi.clone() }
}

impl GeneratingFunction for FlatGeneratingFunction {
    fn value(&self, x: f64, xp: f64) -> f64 {
        self.norm.value([xp - x, 1.0])
    }
    fn d1(&self, x: f64, xp: f64) -> f64 {
        -self.norm.gradient([xp - x, 1.0])[0]
    }
    fn d2(&self, x: f64, xp: f64) -> f64 {
        self.norm.gradient([xp - x, 1.0])[0]
    }
    fn d11(&self, x: f64, xp: f64) -> f64 {
        self.norm.hessian([xp - x, 1.0])[0][0]
    }
    fn d12(&self, x: f64, xp: f64) -> f64 {
        -self.d11(x, xp)
    }
    fn d22(&self, x: f64, xp: f64) -> f64 {
        self.d11(x, xp)
    }
    fn derivative_mode(&self) -> crate::genfun::DerivativeMode {
        match self.norm.family {
            NormFamily::Custom { .. } => crate::genfun::DerivativeMode::FiniteDifference,
            _ => crate::genfun::DerivativeMode::Analytic,
        }
    }
    fn label(&self) -> String {
        format!("flat[{}]", self.norm.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn randers() -> FinslerNorm {
        FinslerNorm::randers(0.2)
    }

    #[test]
    fn euclidean_dual_examples() {
        let e = FinslerNorm::euclidean();
        assert_abs_diff_eq!(dual_norm(&e, [0.6, 0.8]).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(dual_norm(&e, [0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn randers_dual_matches_brute_force() {
        let phi = randers();
        // brute-force maximum of α(v)/φ(v) over 10^6 directions
        let alpha = [1.2, 0.0];
        let n = 1_000_000;
        let brute = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                let d = [t.cos(), t.sin()];
                (alpha[0] * d[0] + alpha[1] * d[1]) / phi.value(d)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert_abs_diff_eq!(brute, 1.2, epsilon = 1e-10);
        // The spec's closed form divides by 1.2; here the norm is normalized,
        // so φ(e1) = 1 and the covector (1.2, 0) has dual norm 1.2.
        assert_abs_diff_eq!(dual_norm(&phi, alpha).unwrap(), brute, epsilon = 1e-10);
        assert_abs_diff_eq!(dual_norm(&phi, [1.0, 0.0]).unwrap(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn dual_norm_is_homogeneous() {
        let phi = randers();
        let a = dual_norm(&phi, [0.3, -0.7]).unwrap();
        let b = dual_norm(&phi, [0.9, -2.1]).unwrap();
        assert_abs_diff_eq!(b, 3.0 * a, epsilon = 1e-13);
    }

    #[test]
    fn legendre_examples() {
        let e = FinslerNorm::euclidean();
        assert_eq!(legendre(&e, [1.0, 0.0]).unwrap(), [1.0, 0.0]);
        let a = legendre(&e, [0.6, 0.8]).unwrap();
        assert_abs_diff_eq!(a[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(a[1], 0.8, epsilon = 1e-15);
        assert!(matches!(legendre(&e, [2.0, 0.0]), Err(Error::NotUnitVector(..))));

        let phi = randers();
        let alpha = legendre(&phi, [1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(alpha[0] * 1.0 + alpha[1] * 0.0, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(dual_norm(&phi, alpha).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn legendre_dual_duality_on_unit_circle() {
        for phi in [randers(), FinslerNorm::ellipse(1.0, 3.0), FinslerNorm::quartic(1.0)] {
            for k in 0..64 {
                let t = 2.0 * PI * k as f64 / 64.0 + 0.01;
                let d = [t.cos(), t.sin()];
                let n = phi.value(d);
                let v = [d[0] / n, d[1] / n];
                let alpha = legendre(&phi, v).unwrap();
                assert_abs_diff_eq!(dual_norm(&phi, alpha).unwrap(), 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn euclidean_section_closed_form() {
        let chart = build_section(&FinslerNorm::euclidean());
        assert_eq!(chart.lambda(), 1.0);
        assert_abs_diff_eq!(chart.f0(0.0).unwrap(), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(chart.f0(0.6).unwrap(), -0.8, epsilon = 1e-14);
        assert_abs_diff_eq!(chart.f0_prime(0.6).unwrap(), 0.75, epsilon = 1e-13);
        assert_abs_diff_eq!(chart.f0_second(0.0).unwrap(), 1.0, epsilon = 1e-13);
        assert!(matches!(chart.f0(1.0), Err(Error::OutsideSection { .. })));
        assert!(matches!(chart.f0(-1.5), Err(Error::OutsideSection { .. })));
    }

    #[test]
    fn section_derivative_blows_up_at_the_ends() {
        let chart = build_section(&FinslerNorm::euclidean());
        assert!(chart.f0_prime(1.0 - 1e-6).unwrap() > 7e2);
        assert!(chart.f0_prime(-1.0 + 1e-6).unwrap() < -7e2);
    }

    #[test]
    fn section_is_on_dual_unit_circle() {
        for phi in [FinslerNorm::euclidean(), randers(), FinslerNorm::ellipse(2.0, 0.5)] {
            let chart = build_section(&phi);
            let (lo, hi) = chart.domain();
            for k in 1..200 {
                let p1 = lo + (hi - lo) * k as f64 / 200.0;
                let p2 = -chart.f0(p1).unwrap();
                assert_abs_diff_eq!(dual_norm(&phi, [p1, p2]).unwrap(), 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn poincare_examples() {
        let chart = build_section(&FinslerNorm::euclidean());
        let (q, p) = chart.poincare_r1(0.1, 0.6).unwrap();
        assert_abs_diff_eq!(q, 0.85, epsilon = 1e-13);
        assert_eq!(p, 0.6);
        let (q, _) = chart.poincare_r1(0.3, 0.0).unwrap();
        assert_abs_diff_eq!(q, 0.3, epsilon = 1e-15);
        let (q, _) = chart.poincare_r1_lift(0.0, 0.6).unwrap();
        assert_abs_diff_eq!(q, 0.75, epsilon = 1e-13);
        assert!(chart.poincare_r1(0.0, 1.0).is_err());
    }

    #[test]
    fn f0_second_matches_finite_differences_for_randers() {
        let chart = build_section(&randers());
        for k in 0..=10 {
            let p = -0.5 + k as f64 / 10.0;
            let s = 1e-4;
            let fd = (chart.f0(p + s).unwrap() - 2.0 * chart.f0(p).unwrap() + chart.f0(p - s).unwrap()) / (s * s);
            let an = chart.f0_second(p).unwrap();
            assert!(fd > 0.0);
            assert_abs_diff_eq!(an, fd, epsilon = 1e-5 * an.abs().max(1.0));
            let fp = (chart.f0(p + s).unwrap() - chart.f0(p - s).unwrap()) / (2.0 * s);
            assert_abs_diff_eq!(chart.f0_prime(p).unwrap(), fp, epsilon = 1e-7);
        }
    }

    #[test]
    fn twist_bound_examples() {
        let chart = build_section(&FinslerNorm::euclidean());
        let grid: Vec<f64> = (0..=180).map(|k| -0.9 + k as f64 * 0.01).collect();
        let tb = twist_lower_bound(&chart, &grid).unwrap();
        assert!(tb.holds());
        assert!(tb.min_f0_second >= 1.0 - 1e-12);
        for &p in &grid {
            assert_abs_diff_eq!(chart.f0_second(p).unwrap(), (1.0 - p * p).powf(-1.5), epsilon = 1e-9);
        }
        assert!(matches!(twist_lower_bound(&chart, &[0.0, 1.0]), Err(Error::GridTouchesBoundary(_))));
    }

    #[test]
    fn flat_genfun_examples() {
        let h = flat_generating_function(&FinslerNorm::euclidean());
        assert_abs_diff_eq!(h.value(0.0, 1.0), 1.4142135624, epsilon = 1e-10);
        for x in [-2.0, 0.3, 7.5] {
            assert_eq!(h.value(x, x), 1.0);
        }
        let h1 = crate::genfun::Hyperbolic;
        for k in 0..50 {
            let x = k as f64 * 0.37 - 3.0;
            let xp = x + (k as f64 * 0.73).sin() * 4.0;
            assert_abs_diff_eq!(h.value(x, xp), h1.value(x, xp), epsilon = 1e-12);
            assert_abs_diff_eq!(h.d12(x, xp), h1.d12(x, xp), epsilon = 1e-12);
        }
    }

    #[test]
    fn validate_flags_broken_quartic() {
        assert!(FinslerNorm::quartic(1.0).validate(256).all_passed());
        assert!(FinslerNorm::euclidean().validate(256).all_passed());
        assert!(randers().validate(256).all_passed());
        let broken = FinslerNorm::quartic(-3.0).validate(256);
        let conv = broken.get("quadratic_convexity").unwrap();
        assert!(!conv.passed);
        assert!(conv.witness.is_some());
    }

    #[test]
    fn normalization_rescales_families() {
        let phi = FinslerNorm::ellipse(4.0, 1.0);
        assert_abs_diff_eq!(phi.value([1.0, 0.0]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(phi.value([0.0, 1.0]), 0.5, epsilon = 1e-15);
        let r = randers();
        assert_abs_diff_eq!(r.value([1.0, 1.0]), (2f64.sqrt() + 0.2) / 1.2, epsilon = 1e-15);
        assert_abs_diff_eq!(r.lambda(), 0.8 / 1.2, epsilon = 1e-15);
        assert!(!r.reversible());
    }
}
