use super::{ConditionReport, ConditionResult, GeneratingFunction};
use crate::solve::golden_min;

/// Sampling pattern for the condition battery: `x` runs over one unit cell
/// and `x' - x` over `[-displacement, displacement]`, both at `per_unit`
/// points per unit length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub per_unit: usize,
    pub displacement: f64,
}

impl Default for SampleGrid {
    fn default() -> Self {
        Self { per_unit: 32, displacement: 2.0 }
    }
}

impl SampleGrid {
    pub const MIN_PER_UNIT: usize = 32;

    fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.per_unit.max(Self::MIN_PER_UNIT);
        (0..n).map(move |i| i as f64 / n as f64)
    }

    fn offsets(&self) -> Vec<f64> {
        let n = self.per_unit.max(Self::MIN_PER_UNIT) as f64;
        let m = (self.displacement * n).round() as i64;
        (-m..=m).map(|k| k as f64 / n).collect()
    }

    fn points(&self) -> Vec<(f64, f64)> {
        let offsets = self.offsets();
        self.xs().flat_map(|x| offsets.iter().map(move |&d| (x, x + d))).collect()
    }
}

const PERIODICITY_TOL: f64 = 1e-10;

/// Numerical battery for (H1), (H2), (H5) and (H6θ).
///
/// (H2) is probed at the finite displacement `xi_max`: it passes when
/// `h(x, x ± xi_max) >= h(x, x) + 1` at every sampled `x`. (H5) is checked
/// through `h_{xx'} < 0` together with the cross-difference inequality on
/// sampled boxes, with `rho` the smallest `-h_{xx'}` seen on the box.
pub fn check_conditions(h: &dyn GeneratingFunction, grid: &SampleGrid, xi_max: f64) -> ConditionReport {
    let mut report = ConditionReport::new(h.label());
    let points = grid.points();

    // (H1)
    let mut worst = 0.0f64;
    let mut witness = None;
    for &(x, xp) in &points {
        let base = h.value(x, xp);
        for k in [1.0, -1.0, 3.0] {
            let defect = (h.value(x + k, xp + k) - base).abs();
            if defect > worst {
                worst = defect;
            }
            if defect > PERIODICITY_TOL * (1.0 + base.abs()) && witness.is_none() {
                witness = Some((x, xp));
            }
        }
    }
    report.push(ConditionResult::from_witness("H1", witness).with("max_defect", worst));

    // (H2)
    let mut min_rise = f64::INFINITY;
    let mut witness = None;
    for x in grid.xs() {
        let base = h.value(x, x);
        for xp in [x + xi_max, x - xi_max] {
            let rise = h.value(x, xp) - base;
            if rise < min_rise {
                min_rise = rise;
            }
            if !(rise >= 1.0) && witness.is_none() {
                witness = Some((x, xp));
            }
        }
    }
    report.push(
        ConditionResult::from_witness("H2", witness)
            .with("xi_max", xi_max)
            .with("min_rise", min_rise),
    );

    // (H5): twist sign, then cross differences.
    let mut min_twist = f64::INFINITY;
    let mut witness = None;
    for &(x, xp) in &points {
        let t = -h.d12(x, xp);
        if t < min_twist {
            min_twist = t;
        }
        if !(t > 0.0) && witness.is_none() {
            witness = Some((x, xp));
        }
    }
    report.push(ConditionResult::from_witness("H5.twist", witness).with("min_neg_hxx", min_twist));

    let cell = 1.0 / grid.per_unit.max(SampleGrid::MIN_PER_UNIT) as f64;
    let mut witness = None;
    let mut min_slack = f64::INFINITY;
    for &(x, xp) in points.iter().step_by(7) {
        for side in [4.0 * cell, 1.0] {
            let (xi, xip) = (x + side, xp + side);
            let cross = h.value(xi, xp) + h.value(x, xip) - h.value(x, xp) - h.value(xi, xip);
            let rho = box_min_twist(h, x, xi, xp, xip);
            let slack = cross - rho * side * side;
            if slack < min_slack {
                min_slack = slack;
            }
            // rounding of four O(1) values
            let tol = 1e-12 * (1.0 + h.value(x, xp).abs());
            if (!(rho > 0.0) || slack < -tol) && witness.is_none() {
                witness = Some((x, xp));
            }
        }
    }
    report.push(ConditionResult::from_witness("H5.cross", witness).with("min_slack", min_slack));

    // (H6θ)
    let mut theta_est = f64::NEG_INFINITY;
    let mut arg = (0.0, 0.0);
    for &(x, xp) in &points {
        let m = h.d11(x, xp).max(h.d22(x, xp));
        if m > theta_est {
            theta_est = m;
            arg = (x, xp);
        }
    }
    let admissible = theta_est.max(f64::MIN_POSITIVE);
    let result = match h.theta() {
        Some(theta) if theta + 1e-12 < theta_est => ConditionResult::fail("H6", arg).with("theta", theta),
        Some(theta) => ConditionResult::pass("H6").with("theta", theta),
        None if theta_est.is_finite() => ConditionResult::pass("H6"),
        None => ConditionResult::fail("H6", arg),
    };
    report.push(result.with("theta_min", admissible));
    report
}

/// `min(-h_{xx'})` on the box: a grid of spacing at most 1/16, then
/// alternating golden refinements around the smallest node.
fn box_min_twist(h: &dyn GeneratingFunction, x: f64, xi: f64, xp: f64, xip: f64) -> f64 {
    let n = ((16.0 * (xi - x).abs().max((xip - xp).abs())).ceil() as usize).max(4);
    let f = |a: f64, b: f64| -h.d12(a, b);
    let (mut a, mut b, mut rho) = (x, xp, f64::INFINITY);
    for i in 0..=n {
        for j in 0..=n {
            let s = x + (xi - x) * i as f64 / n as f64;
            let t = xp + (xip - xp) * j as f64 / n as f64;
            let v = f(s, t);
            if v < rho {
                (a, b, rho) = (s, t, v);
            }
        }
    }
    let (ha, hb) = ((xi - x) / n as f64, (xip - xp) / n as f64);
    let clamp = |v: f64, lo: f64, hi: f64| v.clamp(lo.min(hi), lo.max(hi));
    for _ in 0..3 {
        let (lo, hi) = (clamp(a - ha, x, xi), clamp(a + ha, x, xi));
        let (s, v) = golden_min(|s| f(s, b), lo.min(hi), lo.max(hi), 1e-12);
        if v < rho {
            (a, rho) = (s, v);
        }
        let (lo, hi) = (clamp(b - hb, xp, xip), clamp(b + hb, xp, xip));
        let (t, v) = golden_min(|t| f(a, t), lo.min(hi), lo.max(hi), 1e-12);
        if v < rho {
            (b, rho) = (t, v);
        }
    }
    rho
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun::{Cubic, Hyperbolic, Quadratic};

    #[test]
    fn h0_passes_with_theta_one() {
        let rep = check_conditions(&Quadratic, &SampleGrid::default(), 10.0);
        assert!(rep.all_passed(), "{}", rep.to_text());
        assert_eq!(rep.get("H6").unwrap().measured("theta_min"), Some(1.0));
    }

    #[test]
    fn h0_unit_box_cross_difference_equals_one() {
        let h = Quadratic;
        let cross = h.value(1.0, 0.0) + h.value(0.0, 1.0) - h.value(0.0, 0.0) - h.value(1.0, 1.0);
        assert_eq!(cross, 1.0);
    }

    #[test]
    fn h1_passes_with_theta_one() {
        let rep = check_conditions(&Hyperbolic, &SampleGrid::default(), 10.0);
        assert!(rep.all_passed(), "{}", rep.to_text());
        let theta = rep.get("H6").unwrap().measured("theta_min").unwrap();
        assert!((theta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_fails_twist_with_witness() {
        let rep = check_conditions(&Cubic, &SampleGrid::default(), 10.0);
        let twist = rep.get("H5.twist").unwrap();
        assert!(!twist.passed);
        let (x, xp) = twist.witness.unwrap();
        // h_{xx'} = -6(x' - x) is non-negative exactly when x' <= x
        assert!(xp - x <= 0.0);
        assert!(!rep.all_passed());
    }

    #[test]
    fn coercivity_fails_for_bounded_h() {
        let rep = check_conditions(&crate::genfun::FiniteDifference::new("bounded", |x: f64, xp: f64| {
            (xp - x).atan()
        }), &SampleGrid::default(), 10.0);
        assert!(!rep.passed("H2"));
        assert!(rep.get("H2").unwrap().witness.is_some());
    }
}
