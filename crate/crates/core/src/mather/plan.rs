//! End-to-end destruction plan for one rational approximant of `ω`.

use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::bump::{u_bump, v_bump, w_bump, BumpSpec, SmoothBump};
use super::perturbed::{perturbed_genfun, product_cr_norm, PerturbedGenFun};
use crate::aubry::{convergents, minimal_periodic, nondensity_gap, ContinuedFraction, PeriodicMinimizer, Sign, SignedBarrier};
use crate::error::{Error, Result};
use crate::genfun::{GeneratingFunction, SharedGenFun};
use crate::solve::mod1;

pub const MANIFEST_VERSION: &str = "plan-v1";

/// How the rational approximant is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RationalChoice {
    /// `p_k / q_k`, zero-based.
    Convergent(usize),
    Fixed { p: i64, q: i64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanRequest {
    pub epsilon: f64,
    pub r: u32,
    pub omega: ContinuedFraction,
    pub rational: RationalChoice,
    /// Share of the `ε/2` budget given to `w`.
    pub amplitude_fraction: f64,
    /// Window half-width used to place `I`; the window at which the free
    /// heteroclinic of `h'` settles when absent.
    pub window: Option<usize>,
}

/// Cylinder box `K = x × y` outside which `h~ = h`, with the range of
/// successors `x'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportBox {
    pub x: (f64, f64),
    pub x_next: (f64, f64),
    pub y: (f64, f64),
}

/// Placement of `K` and of its image after centring `J` at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportBounds {
    pub x_radius: f64,
    pub x_radius_limit: f64,
    pub image_radius: f64,
    pub image_radius_limit: f64,
}

impl SupportBounds {
    pub fn x_ok(&self) -> bool {
        self.x_radius <= self.x_radius_limit + 1e-12
    }

    pub fn image_ok(&self) -> bool {
        self.image_radius <= self.image_radius_limit + 1e-12
    }
}

/// Grid-measured `C^{r+1}` sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub h_prime: f64,
    pub h_tilde: f64,
    pub tilde_minus_prime: f64,
    /// `‖h~ - h'‖ / (‖w‖ ‖v‖)`.
    pub inflation: f64,
}

#[derive(Clone)]
pub struct PerturbationPlan {
    pub base: SharedGenFun,
    pub omega: BigRational,
    pub sign: Sign,
    pub minimal: PeriodicMinimizer,
    pub spec: BumpSpec,
    pub i_interval: (f64, f64),
    pub amplitude_fraction: f64,
    pub window: usize,
    pub u: SmoothBump,
    pub v: SmoothBump,
    pub w: SmoothBump,
    pub h_prime: Arc<PerturbedGenFun>,
    pub h_tilde: Arc<PerturbedGenFun>,
    pub support: SupportBox,
    pub bounds: SupportBounds,
    pub norms: NormReport,
}

impl std::fmt::Debug for PerturbationPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PerturbationPlan")
            .field("base", &self.base.label())
            .field("p", &self.p())
            .field("q", &self.q())
            .field("sign", &self.sign)
            .field("j", &self.j())
            .field("i", &self.i_interval)
            .field("norms", &self.norms)
            .finish_non_exhaustive()
    }
}

impl PerturbationPlan {
    pub fn p(&self) -> i64 {
        self.spec.p
    }

    pub fn q(&self) -> i64 {
        self.spec.q
    }

    pub fn j(&self) -> (f64, f64) {
        self.spec.j
    }

    pub fn j_prime(&self) -> (f64, f64) {
        self.spec.j_prime()
    }

    pub fn omega_f64(&self) -> f64 {
        self.omega.to_f64().unwrap_or(f64::NAN)
    }

    pub fn h_prime_shared(&self) -> SharedGenFun {
        self.h_prime.clone()
    }

    pub fn h_tilde_shared(&self) -> SharedGenFun {
        self.h_tilde.clone()
    }

    pub fn budget_ok(&self) -> bool {
        self.norms.h_tilde <= self.spec.epsilon
    }

    /// Structured `key: value` manifest.
    pub fn manifest(&self) -> String {
        let mut m = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(m, "{k}: {v}");
        };
        kv("format", MANIFEST_VERSION.into());
        kv("base", self.base.label());
        kv("omega", format!("{:.17e}", self.omega_f64()));
        kv("p", self.p().to_string());
        kv("q", self.q().to_string());
        kv("sign", format!("{}", self.sign.symbol(self.p(), self.q())));
        kv("epsilon", format!("{:e}", self.spec.epsilon));
        kv("r", self.spec.r.to_string());
        kv("c0", format!("{:.17e}", self.spec.c0));
        kv("c1", format!("{:.17e}", self.spec.c1));
        kv("c2", format!("{:.17e}", self.spec.c2));
        kv("minimal_action", format!("{:.17e}", self.minimal.action));
        kv("minimal_residual", format!("{:e}", self.minimal.residual));
        let pts: Vec<String> = self.minimal.config.entries()[..self.q() as usize].iter().map(|x| format!("{x:.17e}")).collect();
        kv("minimal_orbit", pts.join(" "));
        kv("J", format!("{:.17e} {:.17e}", self.j().0, self.j().1));
        kv("J_prime", format!("{:.17e} {:.17e}", self.j_prime().0, self.j_prime().1));
        kv("I", format!("{:.17e} {:.17e}", self.i_interval.0, self.i_interval.1));
        kv("window", self.window.to_string());
        kv("amplitude_fraction", format!("{:e}", self.amplitude_fraction));
        for b in [&self.u, &self.v, &self.w] {
            let (a, c) = b.support();
            kv(&format!("{}.support", b.label), format!("{a:.17e} {c:.17e}"));
            kv(&format!("{}.amplitude", b.label), format!("{:.17e}", b.amplitude));
            kv(&format!("{}.peak", b.label), format!("{:.17e}", b.peak()));
        }
        kv("norm.u", format!("{:.17e}", self.norms.u));
        kv("norm.v", format!("{:.17e}", self.norms.v));
        kv("norm.w", format!("{:.17e}", self.norms.w));
        kv("norm.h_prime_minus_h", format!("{:.17e}", self.norms.h_prime));
        kv("norm.h_tilde_minus_h", format!("{:.17e}", self.norms.h_tilde));
        kv("norm.h_tilde_minus_h_prime", format!("{:.17e}", self.norms.tilde_minus_prime));
        kv("norm.inflation", format!("{:.17e}", self.norms.inflation));
        let k = &self.support;
        kv("K.x", format!("{:.17e} {:.17e}", k.x.0, k.x.1));
        kv("K.y", format!("{:.17e} {:.17e}", k.y.0, k.y.1));
        kv("K.x_next", format!("{:.17e} {:.17e}", k.x_next.0, k.x_next.1));
        let b = &self.bounds;
        kv("K.x_radius", format!("{:.17e}", b.x_radius));
        kv("K.x_radius_limit", format!("{:.17e}", b.x_radius_limit));
        kv("K.x_ok", b.x_ok().to_string());
        kv("K.image_radius", format!("{:.17e}", b.image_radius));
        kv("K.image_radius_limit", format!("{:.17e}", b.image_radius_limit));
        kv("K.image_ok", b.image_ok().to_string());
        m
    }

    /// CSV `t,u,v,w` sampling the bumps over the union of their supports.
    pub fn bump_table(&self, samples: usize) -> String {
        let lo = [&self.u, &self.v, &self.w].iter().map(|b| b.support().0).fold(f64::INFINITY, f64::min);
        let hi = [&self.u, &self.v, &self.w].iter().map(|b| b.support().1).fold(f64::NEG_INFINITY, f64::max);
        let n = samples.max(2);
        let mut out = String::from("t,u,v,w\n");
        for i in 0..=n {
            let t = lo + (hi - lo) * i as f64 / n as f64;
            let _ = writeln!(out, "{t:.17e},{:.17e},{:.17e},{:.17e}", self.u.value(t), self.v.value(t), self.w.value(t));
        }
        out
    }
}

fn pick_rational(req: &PlanRequest) -> Result<(i64, i64)> {
    match req.rational {
        RationalChoice::Fixed { p, q } => Ok((p, q)),
        RationalChoice::Convergent(k) => {
            let c = convergents(&req.omega, k + 1)?;
            c[k].to_i64().ok_or_else(|| Error::InvalidArgument(format!("convergent {k} does not fit in i64")))
        }
    }
}

/// Widest gap of the orbit, as a lifted interval with left end in `[0, 1)`.
fn gap_interval(minimal: &PeriodicMinimizer) -> Result<(f64, f64)> {
    let pts = minimal.points_mod1();
    let q = pts.len();
    if q == 1 {
        return Ok((pts[0], pts[0] + 1.0));
    }
    let (_, j) = nondensity_gap(&pts)?;
    Ok(j)
}

/// Plateau of `v`: the successors `(x_{j+1}, x_{k+1} + m)` of the gap ends.
fn plateau(minimal: &PeriodicMinimizer, j: (f64, f64)) -> (f64, f64) {
    let c = &minimal.config;
    let q = minimal.q();
    let successor = |end: f64| {
        let (i, shift) = (0..q)
            .map(|i| {
                let x = c.at(i).unwrap();
                let shift = (x - end).round();
                (i, shift, (x - shift - end).abs())
            })
            .min_by(|a, b| a.2.total_cmp(&b.2))
            .map(|(i, s, _)| (i, s))
            .unwrap();
        c.at(i + 1).unwrap() - shift
    };
    (successor(j.0), successor(j.1))
}

/// Points of the free window minimizer inside `J'`, with the ends of `J'`,
/// sorted.
fn cuts(sb: &SignedBarrier, window: usize, jp: (f64, f64)) -> Result<Vec<f64>> {
    let mut cuts: Vec<f64> =
        sb.free_phases(window)?.iter().map(|&x| jp.0 + mod1(x - jp.0)).filter(|&t| t > jp.0 && t < jp.1).collect();
    cuts.push(jp.0);
    cuts.push(jp.1);
    cuts.sort_by(f64::total_cmp);
    Ok(cuts)
}

fn widest_gap(cuts: &[f64]) -> (f64, f64) {
    let (mut best, mut len) = ((cuts[0], cuts[0]), -1.0);
    for w in cuts.windows(2) {
        if w[1] - w[0] > len + 1e-15 {
            len = w[1] - w[0];
            best = (w[0], w[1]);
        }
    }
    best
}

/// Largest window tried when looking for a settled heteroclinic, per unit of `q`.
const MAX_WINDOW_PER_Q: usize = 16384;

/// Window at which the free minimizer of `h'` has settled inside `J'`:
/// doubling from `8q` until a window and its half put the same number of
/// points in `J'`, none of them moved by more than 1% of the widest gap.
fn settled_window(sb: &SignedBarrier, q: i64, jp: (f64, f64)) -> Result<usize> {
    let mut w = 8 * q as usize;
    let mut prev = cuts(sb, w, jp)?;
    while w < MAX_WINDOW_PER_Q * q as usize {
        let next = cuts(sb, 2 * w, jp)?;
        w *= 2;
        let (a, b) = widest_gap(&prev);
        let moved = if next.len() == prev.len() {
            next.iter().zip(&prev).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        if moved <= 0.01 * (b - a) {
            break;
        }
        prev = next;
    }
    Ok(w)
}

/// `I` with the window it was read from: the widest sub-interval of `J'`
/// free of the orbit and of the free window minimizer of `h'`, trimmed by 5%
/// at each end. Without a requested window the settled one is used.
fn select_i(
    h_prime: &dyn GeneratingFunction,
    p: i64,
    q: i64,
    sign: Sign,
    window: Option<usize>,
    jp: (f64, f64),
) -> Result<((f64, f64), usize)> {
    let sb = SignedBarrier::new(h_prime, p, q, sign)?;
    let window = match window {
        Some(w) => w,
        None => settled_window(&sb, q, jp)?,
    };
    let best = widest_gap(&cuts(&sb, window, jp)?);
    let m = 0.05 * (best.1 - best.0);
    Ok(((best.0 + m, best.1 - m), window))
}

fn support_box(h: &dyn GeneratingFunction, ht: &dyn GeneratingFunction, j: (f64, f64), v: &SmoothBump) -> SupportBox {
    let xn = v.support();
    let n = 40;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for a in 0..=n {
        let x = j.0 + (j.1 - j.0) * a as f64 / n as f64;
        for b in 0..=n {
            let xp = xn.0 + (xn.1 - xn.0) * b as f64 / n as f64;
            for y in [-h.d1(x, xp), -ht.d1(x, xp)] {
                lo = lo.min(y);
                hi = hi.max(y);
            }
        }
    }
    SupportBox { x: j, x_next: xn, y: (lo, hi) }
}

pub fn plan(h: SharedGenFun, req: &PlanRequest) -> Result<PerturbationPlan> {
    let (p, q) = pick_rational(req)?;
    if q < 2 {
        return Err(Error::InvalidArgument(format!("the approximant {p}/{q} needs q >= 2")));
    }
    let omega = req.omega.value();
    let pq = BigRational::new(BigInt::from(p), BigInt::from(q));
    let sign = if omega > pq {
        Sign::Plus
    } else if omega < pq {
        Sign::Minus
    } else {
        return Err(Error::InvalidArgument(format!("omega equals the approximant {p}/{q}")));
    };
    let minimal = minimal_periodic(h.as_ref(), p, q)?;
    let j = gap_interval(&minimal)?;
    let spec = BumpSpec::new(req.epsilon, req.r, p, q, j)?;
    let u = u_bump(&spec)?;
    let (left, right) = plateau(&minimal, j);
    let v = v_bump(req.r, q, left, right)?;
    let zero_w = SmoothBump { label: "w".into(), shape: u.shape, amplitude: 0.0 };
    let (h_prime, _) = perturbed_genfun(h.clone(), &u, &v, &zero_w, req.epsilon)?;
    let (i_interval, window) = select_i(&h_prime, p, q, sign, req.window, spec.j_prime())?;
    let w = w_bump(&spec, i_interval, req.amplitude_fraction)?;
    let (h_prime, h_tilde) = perturbed_genfun(h.clone(), &u, &v, &w, req.epsilon)?;

    let order = spec.order();
    let nu = u.cr_norm(order);
    let nv = v.cr_norm(order);
    let nw = w.cr_norm(order);
    let tilde_minus_prime = product_cr_norm(&[&w], &v, order);
    let norms = NormReport {
        u: nu,
        v: nv,
        w: nw,
        h_prime: product_cr_norm(&[&u], &v, order),
        h_tilde: product_cr_norm(&[&u, &w], &v, order),
        tilde_minus_prime,
        inflation: if nw * nv > 0.0 { tilde_minus_prime / (nw * nv) } else { 0.0 },
    };
    let support = support_box(h.as_ref(), &h_tilde, j, &v);
    let centre = 0.5 * (j.0 + j.1);
    let omega_f = omega.to_f64().unwrap_or(f64::NAN);
    let bounds = SupportBounds {
        x_radius: 0.5 * (j.1 - j.0),
        x_radius_limit: 0.5 / q as f64,
        image_radius: (support.x_next.0 - centre).abs().max((support.x_next.1 - centre).abs()),
        image_radius_limit: omega_f.abs() + 3.0 / q as f64,
    };
    Ok(PerturbationPlan {
        base: h,
        omega,
        sign,
        minimal,
        spec,
        i_interval,
        amplitude_fraction: req.amplitude_fraction,
        window,
        u,
        v,
        w,
        h_prime: Arc::new(h_prime),
        h_tilde: Arc::new(h_tilde),
        support,
        bounds,
        norms,
    })
}

/// Plan from the `convergent_index`-th convergent of `omega`, with the full
/// `ε/2` budget for `w`.
pub fn plan_destruction(
    h: SharedGenFun,
    omega: &ContinuedFraction,
    epsilon: f64,
    r: u32,
    convergent_index: usize,
) -> Result<PerturbationPlan> {
    plan(
        h,
        &PlanRequest {
            epsilon,
            r,
            omega: omega.clone(),
            rational: RationalChoice::Convergent(convergent_index),
            amplitude_fraction: 1.0,
            window: None,
        },
    )
}
