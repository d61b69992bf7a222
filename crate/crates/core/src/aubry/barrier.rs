//! Peierls barriers at rational rotation symbols.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use super::chain::{Chain, ChainOptions};
use super::config::{check_reduced, Configuration, RotationSymbol};
use super::minimal::{minimal_periodic, pinned_periodic, Minimizer, PeriodicMinimizer, KKT_TOL};
use crate::error::{Error, Result};
use crate::genfun::GeneratingFunction;
use crate::solve::mod1;

/// One evaluation of a barrier at a phase `xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierSample {
    pub xi: f64,
    pub symbol: RotationSymbol,
    pub value: f64,
    /// Window half-width `W` for signed barriers, `q` for periodic ones.
    pub window: usize,
    /// Windows evaluated (signed) or sweeps spent (periodic).
    pub iterations: usize,
    pub converged: bool,
}

/// CSV with columns `xi,symbol,value,window,converged`.
pub fn barrier_csv(samples: &[BarrierSample]) -> String {
    let mut out = String::from("xi,symbol,value,window,converged\n");
    for s in samples {
        let _ = writeln!(out, "{:.17e},{},{:.17e},{},{}", s.xi, s.symbol, s.value, s.window, s.converged);
    }
    out
}

/// CSV with columns `i,x_i`.
pub fn configuration_csv(x: &Configuration) -> String {
    let mut out = String::from("i,x_i\n");
    for (i, v) in x.indices().zip(x.entries()) {
        let _ = writeln!(out, "{i},{v:.17e}");
    }
    out
}

/// Barrier at the rational symbol `p/q`: best periodic action through
/// `x_0 = xi` minus the free periodic minimum.
pub struct PeriodicBarrier<'a> {
    h: &'a dyn GeneratingFunction,
    minimizer: PeriodicMinimizer,
}

impl<'a> PeriodicBarrier<'a> {
    pub fn new(h: &'a dyn GeneratingFunction, p: i64, q: i64) -> Result<Self> {
        let minimizer = minimal_periodic(h, p, q)?;
        Ok(Self { h, minimizer })
    }

    pub fn minimizer(&self) -> &PeriodicMinimizer {
        &self.minimizer
    }

    /// Constrained minimizer with `x_0 = xi` (one period, `q + 1` entries).
    pub fn constrained(&self, xi: f64) -> Result<Minimizer> {
        pinned_periodic(self.h, self.minimizer.p(), self.minimizer.q(), xi)
    }

    pub fn sample(&self, xi: f64) -> Result<BarrierSample> {
        let m = self.constrained(xi)?;
        let (p, q) = (self.minimizer.p(), self.minimizer.q());
        Ok(BarrierSample {
            xi: mod1(xi),
            symbol: RotationSymbol::Rational { p, q },
            value: m.action - self.minimizer.action,
            window: q as usize,
            iterations: m.sweeps,
            converged: m.converged,
        })
    }
}

pub fn barrier_rational(h: &dyn GeneratingFunction, p: i64, q: i64, xi: f64) -> Result<BarrierSample> {
    PeriodicBarrier::new(h, p, q)?.sample(xi)
}

/// Side from which configurations approach `p/q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn symbol(self, p: i64, q: i64) -> RotationSymbol {
        match self {
            Sign::Plus => RotationSymbol::RationalPlus { p, q },
            Sign::Minus => RotationSymbol::RationalMinus { p, q },
        }
    }
}

/// Window-doubling schedule of [`SignedBarrier::sample`]. Two successive
/// values agree when they differ by at most `tol`, and by at most `rel` of
/// the larger one plus [`WindowSchedule::RESOLUTION`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSchedule {
    pub initial: usize,
    pub doublings: usize,
    pub tol: f64,
    pub rel: f64,
}

impl WindowSchedule {
    pub const AGREEMENT: f64 = 1e-6;
    pub const RELATIVE_AGREEMENT: f64 = 0.1;
    /// Action resolution of windows with `10^4` entries: free minima there
    /// move by about `1e-13` between equally valid starts.
    pub const RESOLUTION: f64 = 1e-13;

    pub fn starting_at(initial: usize) -> Self {
        Self { initial, doublings: 2, tol: Self::AGREEMENT, rel: Self::RELATIVE_AGREEMENT }
    }

    pub fn agree(&self, a: f64, b: f64) -> bool {
        let d = (a - b).abs();
        d <= self.tol && d <= self.rel * a.abs().max(b.abs()) + Self::RESOLUTION
    }

    pub fn windows(&self) -> impl Iterator<Item = usize> + '_ {
        (0..=self.doublings).map(move |k| self.initial << k)
    }
}

/// Result of one finite-window evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowValue {
    pub value: f64,
    /// Free window minimizer, indices `-W..=W`.
    pub unpinned: Configuration,
    /// Best pinned minimizer, or `None` when `xi` lies on a periodic minimizer.
    pub pinned: Option<Configuration>,
    pub pin_index: Option<i64>,
    pub residual: f64,
}

/// Finite-window barrier at `(p/q)+` or `(p/q)-`.
///
/// Configurations on `-W..=W` run from the periodic minimizer `x0` to its
/// upper neighbour translate `x+` (`+`), or back (`-`), with both ends
/// clamped. The renormalized action `sum [h(x_i, x_{i+1}) - h(x0_i, x0_{i+1})]`
/// is minimized with and without an entry pinned at `xi`. The pin may sit at
/// any index of the residue class admitted by `xi`; the indices next to the
/// crossing of the free minimizer are tried and the best one kept.
///
/// A phase on a periodic minimizer is reported as zero: translates of the
/// heteroclinic accumulate on the periodic orbit, so the barrier vanishes
/// there.
pub struct SignedBarrier<'a> {
    h: &'a dyn GeneratingFunction,
    sign: Sign,
    periodic: PeriodicBarrier<'a>,
    lower: Configuration,
    upper: Configuration,
    /// Free window minimizers and their residuals, by window.
    free: Mutex<BTreeMap<i64, Arc<(Vec<f64>, f64)>>>,
}

/// Periodic-barrier level below which `xi` counts as lying on a periodic
/// minimizer.
const ON_ORBIT_TOL: f64 = 1e-12;

/// Largest window whose free minimum also tries ramp starts.
const RAMP_WINDOWS: i64 = 512;

impl<'a> SignedBarrier<'a> {
    pub fn new(h: &'a dyn GeneratingFunction, p: i64, q: i64, sign: Sign) -> Result<Self> {
        check_reduced(p, q)?;
        let periodic = PeriodicBarrier::new(h, p, q)?;
        let lower = periodic.minimizer.config.clone();
        let upper = upper_neighbour(&lower);
        Ok(Self { h, sign, periodic, lower, upper, free: Mutex::new(BTreeMap::new()) })
    }

    pub fn periodic(&self) -> &PeriodicBarrier<'a> {
        &self.periodic
    }

    pub fn lower(&self) -> &Configuration {
        &self.lower
    }

    pub fn upper(&self) -> &Configuration {
        &self.upper
    }

    fn q(&self) -> i64 {
        self.periodic.minimizer.q()
    }

    fn p(&self) -> i64 {
        self.periodic.minimizer.p()
    }

    /// Integer frame of index `i`; `frame(i + q) = frame(i) + p`.
    fn frame(&self, i: i64) -> f64 {
        self.lower.at(i).expect("periodic").floor()
    }

    /// Clamped ends of index `i`, relative to its frame.
    fn ends(&self, i: i64) -> (f64, f64) {
        let f = self.frame(i);
        let lo = self.lower.at(i).expect("periodic") - f;
        let hi = self.upper.at(i).expect("periodic") - f;
        match self.sign {
            Sign::Plus => (lo, hi),
            Sign::Minus => (hi, lo),
        }
    }

    /// Window chain on `-w..=w` in frame coordinates.
    fn chain(&self, x: Vec<f64>, w: i64) -> Chain<'_> {
        Chain::segment(self.h, x).with_base((-w..=w).map(|i| self.frame(i)).collect())
    }

    fn solve(&self, x: Vec<f64>, w: i64, pin: Option<(usize, f64)>) -> (Vec<f64>, f64) {
        let mut chain = self.chain(x, w);
        if let Some((k, v)) = pin {
            chain = chain.pin(k, v);
        }
        let sol = chain.solve(ChainOptions { max_sweeps: 4000, ..Default::default() });
        (sol.x, sol.residual)
    }

    /// Lifted entries from frame coordinates.
    fn lifted(&self, x: &[f64], w: i64) -> Configuration {
        Configuration::new(-w, (-w..=w).zip(x).map(|(i, v)| self.frame(i) + v).collect())
    }

    /// Free window minimum, in frame coordinates. Starts: the minimizer of window `w / 2` with
    /// clamped tails appended (when that window is admissible), and for
    /// `w <= RAMP_WINDOWS` ramps centred at five transit positions. Each
    /// window depends only on smaller ones, so results do not depend on the
    /// order of requests.
    fn unpinned(&self, w: i64) -> Arc<(Vec<f64>, f64)> {
        let mut cache = self.free.lock().expect("free-minimizer cache");
        self.unpinned_locked(w, &mut cache)
    }

    fn unpinned_locked(&self, w: i64, cache: &mut BTreeMap<i64, Arc<(Vec<f64>, f64)>>) -> Arc<(Vec<f64>, f64)> {
        if let Some(hit) = cache.get(&w) {
            return hit.clone();
        }
        let mut starts: Vec<Vec<f64>> = Vec::new();
        if w / 2 >= 4 * self.q() {
            let half = self.unpinned_locked(w / 2, cache);
            let hw = w / 2;
            starts.push(
                (-w..=w)
                    .map(|i| match i {
                        i if i.abs() <= hw => half.0[(i + hw) as usize],
                        i if i < 0 => self.ends(i).0,
                        i => self.ends(i).1,
                    })
                    .collect(),
            );
        }
        if w <= RAMP_WINDOWS || starts.is_empty() {
            let half = (w as f64 / 2.0).max(1.0);
            for c in [0.0, -0.5, 0.5, -0.25, 0.25] {
                let centre = c * w as f64;
                starts.push(
                    (-w..=w)
                        .map(|i| {
                            let (a, b) = self.ends(i);
                            let s = ((i as f64 - centre + half) / (2.0 * half)).clamp(0.0, 1.0);
                            let s = if i == -w { 0.0 } else if i == w { 1.0 } else { s };
                            a + s * (b - a)
                        })
                        .collect(),
                );
            }
        }
        let mut best: Option<(Vec<f64>, f64)> = None;
        for x in starts {
            let (x, res) = self.solve(x, w, None);
            let better = match &best {
                None => true,
                Some(b) => self.chain(b.0.clone(), w).action_change(&b.0, &x) < 0.0,
            };
            if better {
                best = Some((x, res));
            }
        }
        let out = Arc::new(best.expect("at least one start"));
        cache.insert(w, out.clone());
        out
    }

    /// Free window minimizer on `-w..=w`.
    pub fn free_minimizer(&self, w: usize) -> Result<Configuration> {
        let q = self.q();
        if (w as i64) < 4 * q {
            return Err(Error::WindowTooSmall { window: w, q, min: 4 * q as usize });
        }
        let w = w as i64;
        Ok(self.lifted(&self.unpinned(w).0, w))
    }

    /// Phases `x_i mod 1` of the free window minimizer, without the
    /// rounding of lifted entries.
    pub fn free_phases(&self, w: usize) -> Result<Vec<f64>> {
        self.free_minimizer(w)?;
        Ok(self.unpinned(w as i64).0.iter().map(|&v| mod1(v)).collect())
    }

    /// Residue class `k` in `0..q` and lift `xi_k` with `x0_k < xi_k < x+_k`.
    fn admissible_class(&self, xi: f64) -> Option<(i64, f64)> {
        (0..self.q()).find_map(|k| {
            let lo = self.lower.at(k).unwrap();
            let hi = self.upper.at(k).unwrap();
            let lift = lo + mod1(xi - lo);
            (lift > lo && lift < hi).then_some((k, lift))
        })
    }

    /// Best configuration pinned at the lift of `xi` in class `k`, among the
    /// indices next to the crossing of `free` through the pinned level, with
    /// its action excess over `free` summed term by term.
    fn best_pinned(&self, free: &[f64], k: i64, lift: f64, w: i64) -> Option<(Vec<f64>, f64, f64, i64)> {
        let q = self.q();
        // the pinned level is the same in every frame of the class
        let level = lift - self.frame(k);
        let ms: Vec<i64> = ((-w - k) / q..=(w - k) / q).filter(|m| (k + m * q).abs() < w).collect();
        let side = |m: i64| free[(k + m * q + w) as usize] - level;
        let mut m_star = *ms.first()?;
        for pair in ms.windows(2) {
            if side(pair[0]).signum() != side(pair[1]).signum() {
                m_star = pair[0];
                break;
            }
            if side(pair[1]).abs() < side(m_star).abs() {
                m_star = pair[1];
            }
        }
        let chain = self.chain(free.to_vec(), w);
        let mut best: Option<(Vec<f64>, f64, f64, i64)> = None;
        for m in m_star - 2..=m_star + 3 {
            let i = k + m * q;
            if i.abs() >= w {
                continue;
            }
            let mut x = free.to_vec();
            x[(i + w) as usize] = level;
            let (x, res) = self.solve(x, w, Some(((i + w) as usize, level)));
            let excess = chain.action_change(free, &x);
            if best.as_ref().map_or(true, |b| excess < b.1) {
                best = Some((x, excess, res, i));
            }
        }
        best
    }

    pub fn window_value(&self, xi: f64, w: usize) -> Result<WindowValue> {
        let q = self.q();
        if (w as i64) < 4 * q {
            return Err(Error::WindowTooSmall { window: w, q, min: 4 * q as usize });
        }
        let w = w as i64;
        let cached = self.unpinned(w);
        let (mut free_x, mut free_res) = (cached.0.clone(), cached.1);
        if self.periodic.sample(xi)?.value <= ON_ORBIT_TOL {
            let unpinned = self.lifted(&free_x, w);
            return Ok(WindowValue { value: 0.0, unpinned, pinned: None, pin_index: None, residual: free_res });
        }
        let (k, lift) = self.admissible_class(xi).ok_or_else(|| {
            Error::Certification(format!("phase {xi} lies on the periodic orbit but has positive periodic barrier"))
        })?;
        let too_small = Error::WindowTooSmall { window: w as usize, q, min: 4 * q as usize };
        let mut pinned = self.best_pinned(&free_x, k, lift, w).ok_or(too_small.clone())?;
        // The transit of a long window is nearly free to slide, so the free
        // solve can stop short of the minimum; relaxing the pinned
        // configuration without its pin gives a second free candidate.
        for _ in 0..3 {
            let (relaxed, res) = self.solve(pinned.0.clone(), w, None);
            if !(self.chain(free_x.clone(), w).action_change(&free_x, &relaxed) < 0.0) {
                break;
            }
            free_x = relaxed;
            free_res = res;
            pinned = self.best_pinned(&free_x, k, lift, w).ok_or(too_small.clone())?;
        }
        let (pin_x, excess, pin_res, pin_i) = pinned;
        Ok(WindowValue {
            value: excess.max(0.0),
            unpinned: self.lifted(&free_x, w),
            pinned: Some(self.lifted(&pin_x, w)),
            pin_index: Some(pin_i),
            residual: free_res.max(pin_res),
        })
    }

    /// Window doubling until two successive values agree.
    pub fn sample(&self, xi: f64, schedule: &WindowSchedule) -> Result<BarrierSample> {
        let mut prev: Option<f64> = None;
        let mut last = (0.0, schedule.initial, false);
        let mut count = 0;
        for w in schedule.windows() {
            let v = self.window_value(xi, w)?;
            count += 1;
            let converged = prev.is_some_and(|p| schedule.agree(p, v.value)) && v.residual <= KKT_TOL;
            last = (v.value, w, converged);
            if converged {
                break;
            }
            prev = Some(v.value);
        }
        Ok(BarrierSample {
            xi: mod1(xi),
            symbol: self.sign.symbol(self.p(), self.q()),
            value: last.0,
            window: last.1,
            iterations: count,
            converged: last.2,
        })
    }
}

/// Translate of a periodic minimizer whose `x_0` is the next orbit point
/// above `x_0`.
fn upper_neighbour(x: &Configuration) -> Configuration {
    let period = x.period().expect("periodic");
    let x0 = x.at(0).unwrap();
    let (mut best_a, mut best_v) = (0, x0 + 1.0);
    for a in 1..period.q {
        let xa = x.at(a).unwrap();
        let v = x0 + mod1(xa - x0);
        if v > x0 && v < best_v {
            best_v = v;
            best_a = a;
        }
    }
    let b = (x.at(best_a).unwrap() - best_v).round() as i64;
    let one: Vec<f64> = (0..period.q).map(|i| x.at(i + best_a).unwrap() - b as f64).collect();
    Configuration::periodic(period.p, period.q, one).expect("same period")
}

pub fn barrier_signed(
    h: &dyn GeneratingFunction,
    p: i64,
    q: i64,
    sign: Sign,
    xi: f64,
    window: usize,
) -> Result<BarrierSample> {
    if (window as i64) < 4 * q {
        return Err(Error::WindowTooSmall { window, q, min: 4 * q.max(0) as usize });
    }
    SignedBarrier::new(h, p, q, sign)?.sample(xi, &WindowSchedule::starting_at(window))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun::{Hyperbolic, Quadratic};

    #[test]
    fn integrable_rational_barrier_vanishes() {
        for xi in [0.0, 0.13, 0.37, 0.5, 0.91] {
            assert!(barrier_rational(&Quadratic, 1, 2, xi).unwrap().value.abs() < 1e-12);
            assert!(barrier_rational(&Quadratic, 0, 1, xi).unwrap().value.abs() < 1e-12);
            assert!(barrier_rational(&Hyperbolic, 2, 5, xi).unwrap().value.abs() < 1e-12);
        }
    }

    #[test]
    fn upper_neighbour_of_thirds() {
        let x = Configuration::periodic(1, 3, vec![0.0, 1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let u = upper_neighbour(&x);
        for i in -3..6 {
            assert!((u.at(i).unwrap() - x.at(i).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        }
        let x = Configuration::periodic(2, 5, vec![0.0, 0.4, 0.8, 1.2, 1.6]).unwrap();
        let u = upper_neighbour(&x);
        assert!((u.at(0).unwrap() - 0.2).abs() < 1e-15);
        assert!((u.at(1).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn window_agreement_is_absolute_and_relative() {
        let s = WindowSchedule::starting_at(16);
        assert!(s.agree(2.0e-12, 2.1e-12));
        assert!(s.agree(0.0, 0.9e-13));
        assert!(!s.agree(1.0e-12, 2.0e-12));
        assert!(!s.agree(1.0, 1.0 + 2e-6));
        assert_eq!(s.windows().collect::<Vec<_>>(), vec![16, 32, 64]);
    }

    #[test]
    fn integrable_signed_barrier_vanishes() {
        for sign in [Sign::Plus, Sign::Minus] {
            let s = barrier_signed(&Quadratic, 1, 2, sign, 0.3, 8).unwrap();
            assert_eq!(s.value, 0.0);
        }
        assert!(matches!(barrier_signed(&Quadratic, 1, 2, Sign::Plus, 0.3, 7), Err(Error::WindowTooSmall { .. })));
    }
}
