//! Cylinder twist maps: explicit lifts, maps reconstructed from generating
//! functions, orbits and rotation numbers.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::genfun::{ConditionReport, ConditionResult, GeneratingFunction, SharedGenFun};
use crate::norms::SectionChart;
use crate::solve::{mod1, newton_bisect};

type LiftFn = dyn Fn(f64, f64) -> Result<(f64, f64)> + Send + Sync;

#[derive(Clone)]
pub enum MapSource {
    Explicit { label: String, lift: Arc<LiftFn> },
    GenFun(SharedGenFun),
}

/// A lift `F(x, y)` of a cylinder map on `R x (a, b)`.
#[derive(Clone)]
pub struct TwistMap {
    band: (f64, f64),
    source: MapSource,
}

impl std::fmt::Debug for TwistMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TwistMap").field("label", &self.label()).field("band", &self.band).finish()
    }
}

/// Largest half-width tried when bracketing `x'`.
const BRACKET_CAP: f64 = 65536.0;

/// Solves `-h_x(x, x') = y` for `x'`. The left side increases in `x'`
/// because `h_{xx'} < 0`.
pub fn solve_next(h: &dyn GeneratingFunction, x: f64, y: f64) -> Result<f64> {
    let g = |xp: f64| (-h.d1(x, xp) - y, -h.d12(x, xp));
    let mut r = 1.0;
    loop {
        let (lo, hi) = (x - r, x + r);
        if g(lo).0 <= 0.0 && g(hi).0 >= 0.0 {
            return newton_bisect(g, lo, hi, 1e-15, 300).ok_or(Error::OutsideBand { x, y });
        }
        if r >= BRACKET_CAP {
            return Err(Error::OutsideBand { x, y });
        }
        r *= 2.0;
    }
}

impl TwistMap {
    pub fn explicit(
        label: impl Into<String>,
        band: (f64, f64),
        lift: impl Fn(f64, f64) -> Result<(f64, f64)> + Send + Sync + 'static,
    ) -> Self {
        Self { band, source: MapSource::Explicit { label: label.into(), lift: Arc::new(lift) } }
    }

    /// `(x, y) -> (x + y, y)` on the whole cylinder.
    pub fn shear() -> Self {
        Self::explicit("shear", (f64::NEG_INFINITY, f64::INFINITY), |x, y| Ok((x + y, y)))
    }

    /// `(x, y) -> (x + y / sqrt(1 - y^2), y)` on `(-1, 1)`.
    pub fn hyperbolic_shear() -> Self {
        Self::explicit("hyperbolic-shear", (-1.0, 1.0), |x, y| {
            if y.abs() >= 1.0 {
                return Err(Error::OutsideBand { x, y });
            }
            Ok((x + y / (1.0 - y * y).sqrt(), y))
        })
    }

    /// The return map `R1` of a flat Finsler torus on `(-Λ, 1)`.
    pub fn from_section(chart: SectionChart) -> Self {
        let band = chart.domain();
        Self::explicit(format!("R1[{}]", chart.norm().label()), band, move |x, y| chart.poincare_r1_lift(x, y))
    }

    pub fn band(&self) -> (f64, f64) {
        self.band
    }

    pub fn source(&self) -> &MapSource {
        &self.source
    }

    pub fn generating_function(&self) -> Option<&SharedGenFun> {
        match &self.source {
            MapSource::GenFun(h) => Some(h),
            MapSource::Explicit { .. } => None,
        }
    }

    pub fn label(&self) -> String {
        match &self.source {
            MapSource::Explicit { label, .. } => label.clone(),
            MapSource::GenFun(h) => format!("F[{}]", h.label()),
        }
    }

    pub fn in_band(&self, y: f64) -> bool {
        y > self.band.0 && y < self.band.1
    }

    pub fn lift(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        if !self.in_band(y) {
            return Err(Error::OutsideBand { x, y });
        }
        match &self.source {
            MapSource::Explicit { lift, .. } => lift(x, y),
            MapSource::GenFun(h) => {
                let xp = solve_next(h.as_ref(), x, y)?;
                Ok((xp, h.d2(x, xp)))
            }
        }
    }

    /// The cylinder map: the lift with `x'` reduced mod 1.
    pub fn apply(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let (xp, yp) = self.lift(x, y)?;
        Ok((mod1(xp), yp))
    }
}

/// Twist map of a generating function on the band `(a, b)`.
pub fn map_from_genfun(h: SharedGenFun, band: (f64, f64)) -> TwistMap {
    TwistMap { band, source: MapSource::GenFun(h) }
}

/// Sampling for [`check_ift`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IftGrid {
    pub nx: usize,
    pub ny: usize,
    /// Threshold for infinite twist at the ends.
    pub probe: f64,
    /// Stand-ins for infinite band ends.
    pub bounds: (f64, f64),
}

impl Default for IftGrid {
    fn default() -> Self {
        Self { nx: 16, ny: 32, probe: 1e3, bounds: (-10.0, 10.0) }
    }
}

const JACOBIAN_STEP: f64 = 1e-5;
const DET_TOL: f64 = 1e-8;

/// Central-difference Jacobian of the lift with one Richardson step.
pub fn jacobian(map: &TwistMap, x: f64, y: f64) -> Result<[[f64; 2]; 2]> {
    let diff = |dx: f64, dy: f64| -> Result<(f64, f64)> {
        let (a, b) = map.lift(x + dx, y + dy)?;
        let (c, d) = map.lift(x - dx, y - dy)?;
        let s = 2.0 * (dx + dy);
        Ok(((a - c) / s, (b - d) / s))
    };
    let rich = |dx: f64, dy: f64| -> Result<(f64, f64)> {
        let coarse = diff(dx, dy)?;
        let fine = diff(0.5 * dx, 0.5 * dy)?;
        Ok(((4.0 * fine.0 - coarse.0) / 3.0, (4.0 * fine.1 - coarse.1) / 3.0))
    };
    let (f1x, f2x) = rich(JACOBIAN_STEP, 0.0)?;
    let (f1y, f2y) = rich(0.0, JACOBIAN_STEP)?;
    Ok([[f1x, f1y], [f2x, f2y]])
}

/// Numerical battery for the IFT(a, b) conditions (i)-(iv).
///
/// (i) and (iii) are sampled on `[a + ε, b - ε]` with `ε = (b - a) / 100`,
/// (ii) on the strips of width `ε` at each end (the lower-end condition is
/// mirrored at the upper end), and (iv) at `y = a + δ` / `b - δ` for
/// `δ = 1e-4, 1e-5, ...` until the lift passes `∓probe`. Infinite ends are
/// replaced by `grid.bounds` and probed at `y = ∓probe · 2^k`.
pub fn check_ift(map: &TwistMap, grid: &IftGrid) -> ConditionReport {
    let mut report = ConditionReport::new(map.label());
    let (a, b) = map.band();
    let lo = if a.is_finite() { a } else { grid.bounds.0 };
    let hi = if b.is_finite() { b } else { grid.bounds.1 };
    let eps = (hi - lo) / 100.0;
    let nx = grid.nx.max(1);
    let ny = grid.ny.max(2);
    let xs: Vec<f64> = (0..nx).map(|i| i as f64 / nx as f64).collect();
    let inner: Vec<f64> = (0..ny).map(|j| lo + eps + (hi - lo - 2.0 * eps) * j as f64 / (ny - 1) as f64).collect();

    let mut worst_det = 0.0f64;
    let mut det_witness = None;
    let mut min_twist = f64::INFINITY;
    let mut twist_witness = None;
    for &x in &xs {
        for &y in &inner {
            match jacobian(map, x, y) {
                Ok(j) => {
                    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                    let dev = (det - 1.0).abs();
                    worst_det = worst_det.max(dev);
                    if !(dev <= DET_TOL) && det_witness.is_none() {
                        det_witness = Some((x, y));
                    }
                    min_twist = min_twist.min(j[0][1]);
                    if !(j[0][1] > 0.0) && twist_witness.is_none() {
                        twist_witness = Some((x, y));
                    }
                }
                Err(_) => {
                    det_witness.get_or_insert((x, y));
                    twist_witness.get_or_insert((x, y));
                }
            }
        }
    }
    report.push(ConditionResult::from_witness("IFT.i", det_witness).with("max_det_defect", worst_det));

    // (ii)
    let mid = 0.5 * (lo + hi);
    let mut witness = None;
    for &x in &xs {
        for j in 0..ny {
            let t = (j as f64 + 0.5) / ny as f64;
            for (y, lower) in [(lo + eps * t, true), (hi - eps * t, false)] {
                let ok = match map.lift(x, y) {
                    Ok((_, yp)) if lower => yp > lo && yp < mid,
                    Ok((_, yp)) => yp > mid && yp < hi,
                    Err(_) => false,
                };
                if !ok && witness.is_none() {
                    witness = Some((x, y));
                }
            }
        }
    }
    report.push(ConditionResult::from_witness("IFT.ii", witness).with("epsilon", eps));

    report.push(ConditionResult::from_witness("IFT.iii", twist_witness).with("min_dF1_dy", min_twist));

    // (iv)
    let probe = grid.probe;
    let end_check = |lower: bool| -> (Option<f64>, Option<(f64, f64)>) {
        let finite = if lower { a.is_finite() } else { b.is_finite() };
        let mut last_fail = None;
        for k in 0..24 {
            let y = match (finite, lower) {
                (true, true) => a + 10f64.powi(-4 - k),
                (true, false) => b - 10f64.powi(-4 - k),
                (false, true) => -probe * 2f64.powi(k),
                (false, false) => probe * 2f64.powi(k),
            };
            if finite && k > 8 {
                break;
            }
            let fail = xs.iter().find(|&&x| match map.lift(x, y) {
                Ok((x1, _)) if lower => !(x1 < -probe),
                Ok((x1, _)) => !(x1 > probe),
                Err(_) => true,
            });
            match fail {
                None => return (Some(y), None),
                Some(&x) => last_fail = Some((x, y)),
            }
        }
        (None, last_fail)
    };
    let (lower_y, lower_fail) = end_check(true);
    let (upper_y, upper_fail) = end_check(false);
    let mut res = ConditionResult::from_witness("IFT.iv", lower_fail.or(upper_fail)).with("probe", probe);
    if let Some(y) = lower_y {
        res = res.with("lower_y", y);
    }
    if let Some(y) = upper_y {
        res = res.with("upper_y", y);
    }
    report.push(res);
    report
}

/// A finite lifted orbit `(x_i, y_i)`, `i = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRecord {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl OrbitRecord {
    /// Number of steps `N`.
    pub fn len(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.xs.len() <= 1
    }

    pub fn initial(&self) -> (f64, f64) {
        (self.xs[0], self.ys[0])
    }

    pub fn x_mod1(&self) -> Vec<f64> {
        self.xs.iter().map(|&x| mod1(x)).collect()
    }

    /// CSV with columns `i,x_lift,x_mod1,y`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,x_lift,x_mod1,y\n");
        for (i, (x, y)) in self.xs.iter().zip(&self.ys).enumerate() {
            let _ = writeln!(out, "{i},{x:.17e},{:.17e},{y:.17e}", mod1(*x));
        }
        out
    }
}

pub fn iterate(map: &TwistMap, x0: f64, y0: f64, n: usize) -> Result<OrbitRecord> {
    if n == 0 {
        return Err(Error::InvalidArgument("orbit length must be at least 1".into()));
    }
    if !map.in_band(y0) {
        return Err(Error::OutsideBand { x: x0, y: y0 });
    }
    let mut xs = Vec::with_capacity(n + 1);
    let mut ys = Vec::with_capacity(n + 1);
    let (mut x, mut y) = (x0, y0);
    xs.push(x);
    ys.push(y);
    for step in 1..=n {
        let (x1, y1) = map.lift(x, y)?;
        if !map.in_band(y1) {
            return Err(Error::OrbitLeftBand { step, y: y1 });
        }
        x = x1;
        y = y1;
        xs.push(x);
        ys.push(y);
    }
    Ok(OrbitRecord { xs, ys })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationEstimate {
    pub estimate: f64,
    pub error_bound: f64,
}

/// `(x_N - x_0) / N`, with the largest drift discrepancy over the tail
/// windows of length `N/2`, `N/4`, `N/8` as error bound.
pub fn rotation_number(orbit: &OrbitRecord) -> Result<RotationEstimate> {
    let n = orbit.len();
    if n < 100 {
        return Err(Error::TooFewPoints { needed: 100, got: n });
    }
    let xs = &orbit.xs;
    let estimate = (xs[n] - xs[0]) / n as f64;
    let error_bound = [n / 2, n / 4, n / 8]
        .iter()
        .map(|&m| ((xs[n] - xs[n - m]) / m as f64 - estimate).abs())
        .fold(0.0, f64::max);
    Ok(RotationEstimate { estimate, error_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun::{builtin_h0, builtin_h1};

    #[test]
    fn h0_map_is_the_shear() {
        let m = map_from_genfun(builtin_h0(), (f64::NEG_INFINITY, f64::INFINITY));
        let (x, y) = m.lift(0.3, 0.5).unwrap();
        assert!((x - 0.8).abs() < 1e-15 && y == 0.5);
    }

    #[test]
    fn h1_orbit() {
        let m = map_from_genfun(builtin_h1(), (-1.0, 1.0));
        let o = iterate(&m, 0.0, 0.6, 2).unwrap();
        assert!((o.xs[1] - 0.75).abs() < 1e-14);
        assert!((o.xs[2] - 1.5).abs() < 1e-14);
        assert!(m.lift(0.0, 1.0).is_err());
    }

    #[test]
    fn ift_batteries() {
        let h1 = map_from_genfun(builtin_h1(), (-1.0, 1.0));
        let rep = check_ift(&h1, &IftGrid { probe: 1e2, ..Default::default() });
        assert!(rep.all_passed(), "{}", rep.to_text());
        let h0 = map_from_genfun(builtin_h0(), (f64::NEG_INFINITY, f64::INFINITY));
        let rep = check_ift(&h0, &IftGrid::default());
        assert!(rep.all_passed(), "{}", rep.to_text());
    }

    #[test]
    fn flipped_map_fails_twist() {
        let m = TwistMap::explicit("anti", (f64::NEG_INFINITY, f64::INFINITY), |x, y| Ok((x - y, y)));
        let rep = check_ift(&m, &IftGrid::default());
        assert!(!rep.passed("IFT.iii"));
        assert!(!rep.passed("IFT.iv"));
        assert!(rep.get("IFT.iii").unwrap().witness.is_some());
    }

    #[test]
    fn rotation_numbers() {
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let o = iterate(&TwistMap::shear(), 0.0, golden, 1000).unwrap();
        let r = rotation_number(&o).unwrap();
        assert!((r.estimate - golden).abs() < 1e-12 && r.error_bound <= 1e-12);
        let o = iterate(&TwistMap::shear(), 0.0, 0.4, 10).unwrap();
        assert!(rotation_number(&o).is_err());
    }
}
