use super::chain::{Chain, ChainOptions};
use super::config::{check_reduced, Configuration};
use crate::error::{Error, Result};
use crate::genfun::GeneratingFunction;
use crate::solve::{golden_min, mod1};

/// Euler-Lagrange tolerance reported as "converged".
pub const KKT_TOL: f64 = 1e-10;

/// Warps `t + a sin(pi t) / pi` used as monotone initial interpolations.
const WARPS: [f64; 8] = [0.0, 0.3, -0.3, 0.6, -0.6, 0.9, -0.9, 0.15];

/// A minimizing configuration with its action and Euler-Lagrange residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimizer {
    pub config: Configuration,
    pub action: f64,
    pub residual: f64,
    pub sweeps: usize,
    pub converged: bool,
}

/// Minimizes `sum h(x_i, x_{i+1})` over the interior entries of a segment
/// with fixed endpoints. The best of eight monotone starts is returned even
/// when the residual stays above [`KKT_TOL`] (`converged` is then false).
pub fn minimize_segment(h: &dyn GeneratingFunction, x_left: f64, x_right: f64, n_interior: usize) -> Result<Minimizer> {
    if n_interior == 0 {
        return Err(Error::SegmentTooShort(2));
    }
    let n = n_interior + 1;
    let mut best: Option<Minimizer> = None;
    for a in WARPS {
        let x: Vec<f64> = (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                let g = t + a * (std::f64::consts::PI * t).sin() / std::f64::consts::PI;
                x_left + (x_right - x_left) * g
            })
            .collect();
        let mut x = x;
        x[n] = x_right;
        let chain = Chain::segment(h, x);
        let sol = chain.solve(ChainOptions::default());
        let action = chain.action(&sol.x);
        let cand = Minimizer {
            config: Configuration::new(0, sol.x),
            action,
            residual: sol.residual,
            sweeps: sol.sweeps,
            converged: sol.residual <= KKT_TOL,
        };
        best = match best {
            None => Some(cand),
            Some(b) => Some(better(b, cand)),
        };
    }
    Ok(best.expect("at least one start"))
}

fn better(a: Minimizer, b: Minimizer) -> Minimizer {
    match (a.converged, b.converged) {
        (true, false) => a,
        (false, true) => b,
        _ if b.action < a.action - 1e-14 * (1.0 + a.action.abs()) => b,
        _ => a,
    }
}

/// Action of the best periodic configuration with `x_0 = xi`, `x_q = xi + p`.
pub(crate) fn pinned_periodic(h: &dyn GeneratingFunction, p: i64, q: i64, xi: f64) -> Result<Minimizer> {
    if q == 1 {
        let config = Configuration::new(0, vec![xi, xi + p as f64]);
        return Ok(Minimizer { action: h.value(xi, xi + p as f64), config, residual: 0.0, sweeps: 0, converged: true });
    }
    minimize_segment(h, xi, xi + p as f64, (q - 1) as usize)
}

/// Global minimizer of the periodic action with rotation data `p/q`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicMinimizer {
    /// One period `x_0, ..., x_q` with `x_0` the smallest orbit point mod 1,
    /// taken in `[0, 1)`.
    pub config: Configuration,
    pub action: f64,
    /// Euler-Lagrange residual with all `q` entries free.
    pub residual: f64,
}

impl PeriodicMinimizer {
    pub fn p(&self) -> i64 {
        self.config.period().expect("periodic").p
    }

    pub fn q(&self) -> i64 {
        self.config.period().expect("periodic").q
    }

    /// Orbit points `x_i mod 1`, sorted.
    pub fn points_mod1(&self) -> Vec<f64> {
        let q = self.q() as usize;
        let mut pts: Vec<f64> = self.config.entries()[..q].iter().map(|&x| mod1(x)).collect();
        pts.sort_by(f64::total_cmp);
        pts
    }
}

const PHASES: usize = 16;

/// Minimizes `sum_{i<q} h(x_i, x_{i+1})` subject to `x_q = x_0 + p`.
///
/// The reduced function `F(xi)` (best action with `x_0 = xi`) is scanned at
/// 16 phases and refined by golden section; among equal minima the first
/// phase wins, and the result is re-indexed so that `x_0` is the smallest
/// orbit point mod 1.
pub fn minimal_periodic(h: &dyn GeneratingFunction, p: i64, q: i64) -> Result<PeriodicMinimizer> {
    check_reduced(p, q)?;
    let f = |xi: f64| pinned_periodic(h, p, q, xi).map(|m| m.action);
    let mut best_xi = 0.0;
    let mut best = f(0.0)?;
    for s in 1..PHASES {
        let xi = s as f64 / PHASES as f64;
        let v = f(xi)?;
        if v < best - 1e-13 * (1.0 + best.abs()) {
            best = v;
            best_xi = xi;
        }
    }
    let width = 1.0 / PHASES as f64;
    let (xr, vr) = golden_min(|xi| f(xi).unwrap_or(f64::INFINITY), best_xi - width, best_xi + width, 1e-10);
    if vr < best - 1e-13 * (1.0 + best.abs()) {
        best_xi = xr;
    }
    let m = pinned_periodic(h, p, q, best_xi)?;
    // release x_0 and relax the whole cycle
    let start = m.config.entries()[..q as usize].to_vec();
    let cycle = Chain::periodic(h, start, p);
    let sol = cycle.solve(ChainOptions::default());
    let e: &[f64] = if sol.converged && cycle.action(&sol.x) <= m.action + 1e-13 * (1.0 + m.action.abs()) {
        &sol.x
    } else {
        m.config.entries()
    };
    let q_us = q as usize;
    // rotate so that the smallest point mod 1 comes first
    let j = (0..q_us)
        .min_by(|&a, &b| mod1(e[a]).total_cmp(&mod1(e[b])).then(a.cmp(&b)))
        .expect("q >= 1");
    let shift = e[j].floor();
    let one_period: Vec<f64> = (0..q_us)
        .map(|i| {
            let k = j + i;
            if k < q_us {
                e[k] - shift
            } else {
                e[k - q_us] + p as f64 - shift
            }
        })
        .collect();
    let config = Configuration::periodic(p, q, one_period)?;
    let residual = periodic_residual(h, &config);
    let action = crate::genfun::action(h, &config)?;
    Ok(PeriodicMinimizer { config, action, residual })
}

/// Largest `|h_{x'}(x_{i-1}, x_i) + h_x(x_i, x_{i+1})|` over one period.
pub fn periodic_residual(h: &dyn GeneratingFunction, x: &Configuration) -> f64 {
    let q = x.period().map(|p| p.q).unwrap_or(x.len() as i64 - 1);
    (0..q)
        .map(|i| {
            let (a, b, c) = (x.at(i - 1), x.at(i), x.at(i + 1));
            match (a, b, c) {
                (Some(a), Some(b), Some(c)) => (h.d2(a, b) + h.d1(b, c)).abs(),
                _ => 0.0,
            }
        })
        .fold(0.0, f64::max)
}
