//! Generating functions `h(x, x')` of cylinder twist maps.
//!
//! A generating function encodes a twist map through
//! `F(x, y) = (x', y')` iff `y = -h_x(x, x')` and `y' = h_{x'}(x, x')`.
//! Everything downstream (orbit reconstruction, action sums, minimal
//! configurations, barriers) only talks to the [`GeneratingFunction`] trait.

mod conditions;
mod report;

use std::sync::Arc;

pub use conditions::{check_conditions, SampleGrid};
pub use report::{ConditionReport, ConditionResult};

use crate::aubry::Configuration;
use crate::error::{Error, Result};

/// How the partial derivatives of a generating function are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference,
}

/// Evaluator for `h` and its partials up to second order.
///
/// `d1`/`d2` are the partials in the first and second argument,
/// `d11`, `d12`, `d22` the second partials.
pub trait GeneratingFunction: Send + Sync {
    fn value(&self, x: f64, xp: f64) -> f64;
    fn d1(&self, x: f64, xp: f64) -> f64;
    fn d2(&self, x: f64, xp: f64) -> f64;
    fn d11(&self, x: f64, xp: f64) -> f64;
    fn d12(&self, x: f64, xp: f64) -> f64;
    fn d22(&self, x: f64, xp: f64) -> f64;

    /// Known constant for the second-partial bound, if any.
    fn theta(&self) -> Option<f64> {
        None
    }

    fn derivative_mode(&self) -> DerivativeMode {
        DerivativeMode::Analytic
    }

    fn label(&self) -> String;
}

pub type SharedGenFun = Arc<dyn GeneratingFunction>;

/// `h0(x, x') = (x' - x)^2 / 2`, generating the shear `(x, y) -> (x + y, y)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Quadratic;

impl GeneratingFunction for Quadratic {
    fn value(&self, x: f64, xp: f64) -> f64 {
        let d = xp - x;
        0.5 * d * d
    }
    fn d1(&self, x: f64, xp: f64) -> f64 {
        x - xp
    }
    fn d2(&self, x: f64, xp: f64) -> f64 {
        xp - x
    }
    fn d11(&self, _: f64, _: f64) -> f64 {
        1.0
    }
    fn d12(&self, _: f64, _: f64) -> f64 {
        -1.0
    }
    fn d22(&self, _: f64, _: f64) -> f64 {
        1.0
    }
    fn theta(&self) -> Option<f64> {
        Some(1.0)
    }
    fn label(&self) -> String {
        "h0".into()
    }
}

/// `h1(x, x') = sqrt((x' - x)^2 + 1)`, generating
/// `(x, y) -> (x + y / sqrt(1 - y^2), y)` on the band `(-1, 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Hyperbolic;

impl GeneratingFunction for Hyperbolic {
    fn value(&self, x: f64, xp: f64) -> f64 {
        (xp - x).hypot(1.0)
    }
    fn d1(&self, x: f64, xp: f64) -> f64 {
        let d = xp - x;
        -d / d.hypot(1.0)
    }
    fn d2(&self, x: f64, xp: f64) -> f64 {
        let d = xp - x;
        d / d.hypot(1.0)
    }
    fn d11(&self, x: f64, xp: f64) -> f64 {
        let s = (xp - x).hypot(1.0);
        1.0 / (s * s * s)
    }
    fn d12(&self, x: f64, xp: f64) -> f64 {
        -self.d11(x, xp)
    }
    fn d22(&self, x: f64, xp: f64) -> f64 {
        self.d11(x, xp)
    }
    fn theta(&self) -> Option<f64> {
        Some(1.0)
    }
    fn label(&self) -> String {
        "h1".into()
    }
}

/// `(x' - x)^3`: periodic but not a twist generating function. Used as a
/// negative control for the condition battery.
#[derive(Debug, Clone, Copy, Default)]
pub struct Cubic;

impl GeneratingFunction for Cubic {
    fn value(&self, x: f64, xp: f64) -> f64 {
        (xp - x).powi(3)
    }
    fn d1(&self, x: f64, xp: f64) -> f64 {
        -3.0 * (xp - x).powi(2)
    }
    fn d2(&self, x: f64, xp: f64) -> f64 {
        3.0 * (xp - x).powi(2)
    }
    fn d11(&self, x: f64, xp: f64) -> f64 {
        6.0 * (xp - x)
    }
    fn d12(&self, x: f64, xp: f64) -> f64 {
        -6.0 * (xp - x)
    }
    fn d22(&self, x: f64, xp: f64) -> f64 {
        6.0 * (xp - x)
    }
    fn label(&self) -> String {
        "cubic".into()
    }
}

/// Generating function given only by its values; partials come from central
/// differences with one Richardson extrapolation step.
pub struct FiniteDifference<F> {
    f: F,
    step: f64,
    theta: Option<f64>,
    label: String,
}

impl<F> FiniteDifference<F>
where
    F: Fn(f64, f64) -> f64 + Send + Sync,
{
    pub const DEFAULT_STEP: f64 = 1e-4;

    pub fn new(label: impl Into<String>, f: F) -> Self {
        Self { f, step: Self::DEFAULT_STEP, theta: None, label: label.into() }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = Some(theta);
        self
    }

    fn richardson(&self, g: impl Fn(f64) -> f64) -> f64 {
        let coarse = g(self.step);
        let fine = g(0.5 * self.step);
        (4.0 * fine - coarse) / 3.0
    }
}

impl<F> GeneratingFunction for FiniteDifference<F>
where
    F: Fn(f64, f64) -> f64 + Send + Sync,
{
    fn value(&self, x: f64, xp: f64) -> f64 {
        (self.f)(x, xp)
    }
    fn d1(&self, x: f64, xp: f64) -> f64 {
        self.richardson(|s| ((self.f)(x + s, xp) - (self.f)(x - s, xp)) / (2.0 * s))
    }
    fn d2(&self, x: f64, xp: f64) -> f64 {
        self.richardson(|s| ((self.f)(x, xp + s) - (self.f)(x, xp - s)) / (2.0 * s))
    }
    fn d11(&self, x: f64, xp: f64) -> f64 {
        let c = (self.f)(x, xp);
        self.richardson(|s| ((self.f)(x + s, xp) - 2.0 * c + (self.f)(x - s, xp)) / (s * s))
    }
    fn d12(&self, x: f64, xp: f64) -> f64 {
        self.richardson(|s| {
            ((self.f)(x + s, xp + s) - (self.f)(x + s, xp - s) - (self.f)(x - s, xp + s)
                + (self.f)(x - s, xp - s))
                / (4.0 * s * s)
        })
    }
    fn d22(&self, x: f64, xp: f64) -> f64 {
        let c = (self.f)(x, xp);
        self.richardson(|s| ((self.f)(x, xp + s) - 2.0 * c + (self.f)(x, xp - s)) / (s * s))
    }
    fn theta(&self) -> Option<f64> {
        self.theta
    }
    fn derivative_mode(&self) -> DerivativeMode {
        DerivativeMode::FiniteDifference
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

pub fn builtin_h0() -> SharedGenFun {
    Arc::new(Quadratic)
}

pub fn builtin_h1() -> SharedGenFun {
    Arc::new(Hyperbolic)
}

/// Action sum `h(x_j, x_{j+1}) + ... + h(x_{k-1}, x_k)` of a finite segment.
pub fn action_of(h: &dyn GeneratingFunction, entries: &[f64]) -> Result<f64> {
    if entries.len() < 2 {
        return Err(Error::SegmentTooShort(entries.len()));
    }
    Ok(entries.windows(2).map(|w| h.value(w[0], w[1])).sum())
}

/// Action of the stored window of a configuration.
pub fn action(h: &dyn GeneratingFunction, segment: &Configuration) -> Result<f64> {
    action_of(h, segment.entries())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn h0_values_and_partials() {
        let h = Quadratic;
        assert_eq!(h.value(0.0, 1.0), 0.5);
        assert_eq!(h.value(0.7, 0.7), 0.0);
        assert_eq!(h.d1(0.0, 1.0), -1.0);
        assert_eq!(h.d2(0.0, 1.0), 1.0);
    }

    #[test]
    fn h1_values_and_curvature() {
        let h = Hyperbolic;
        assert_eq!(h.value(0.0, 0.0), 1.0);
        assert_abs_diff_eq!(h.value(0.0, 1.0), 2f64.sqrt(), epsilon = 1e-15);
        for &d in &[-3.0, -0.4, 0.0, 0.9, 5.0] {
            let expected = (1.0f64 + d * d).powf(-1.5);
            assert_abs_diff_eq!(h.d11(0.2, 0.2 + d), expected, epsilon = 1e-15);
            assert!(h.d11(0.2, 0.2 + d) <= 1.0);
        }
    }

    #[test]
    fn finite_difference_matches_analytic_h1() {
        let fd = FiniteDifference::new("h1-fd", |x: f64, xp: f64| (xp - x).hypot(1.0));
        let h = Hyperbolic;
        for &(x, xp) in &[(0.0, 0.3), (0.4, -1.2), (2.0, 2.5)] {
            assert_abs_diff_eq!(fd.d1(x, xp), h.d1(x, xp), epsilon = 1e-10);
            assert_abs_diff_eq!(fd.d2(x, xp), h.d2(x, xp), epsilon = 1e-10);
            // second differences at step 5e-5 carry about 1e-6 of round-off
            assert_abs_diff_eq!(fd.d11(x, xp), h.d11(x, xp), epsilon = 2e-6);
            assert_abs_diff_eq!(fd.d12(x, xp), h.d12(x, xp), epsilon = 2e-6);
            assert_abs_diff_eq!(fd.d22(x, xp), h.d22(x, xp), epsilon = 2e-6);
        }
        assert_eq!(fd.derivative_mode(), DerivativeMode::FiniteDifference);
    }

    #[test]
    fn action_examples() {
        let h0 = Quadratic;
        assert_abs_diff_eq!(action_of(&h0, &[0.0, 0.5, 1.0]).unwrap(), 0.25, epsilon = 1e-15);
        assert_eq!(action_of(&h0, &[0.3, 0.3]).unwrap(), 0.0);
        assert_abs_diff_eq!(action_of(&Hyperbolic, &[0.0, 1.0]).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(action_of(&h0, &[1.0]), Err(Error::SegmentTooShort(1)));
    }

    #[test]
    fn action_is_additive_over_shared_endpoint() {
        let h = Hyperbolic;
        let xs = [0.0, 0.4, 1.1, 1.3, 2.9];
        let whole = action_of(&h, &xs).unwrap();
        let split = action_of(&h, &xs[..3]).unwrap() + action_of(&h, &xs[2..]).unwrap();
        assert_abs_diff_eq!(whole, split, epsilon = 1e-14);
    }
}
