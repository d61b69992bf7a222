//! The bumps `u`, `v`, `w` of the perturbation and their certificates.

use super::psi::{c0, c1, c2, psi, psi_derivative};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BumpShape {
    /// `Ψ` rescaled to the support `[lo, hi]`.
    Single { lo: f64, hi: f64 },
    /// Constant `Ψ(0)` on `[left, right)`, joined to zero by the halves of
    /// `Ψ((t - left) / ramp)` and `Ψ((t - right) / ramp)`.
    Plateau { left: f64, right: f64, ramp: f64 },
}

/// `amplitude · shape(t)`, with derivatives from the `Ψ` recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothBump {
    pub label: String,
    pub shape: BumpShape,
    pub amplitude: f64,
}

impl SmoothBump {
    pub fn support(&self) -> (f64, f64) {
        match self.shape {
            BumpShape::Single { lo, hi } => (lo, hi),
            BumpShape::Plateau { left, right, ramp } => (left - ramp, right + ramp),
        }
    }

    pub fn support_len(&self) -> f64 {
        let (a, b) = self.support();
        b - a
    }

    pub fn peak(&self) -> f64 {
        self.amplitude * psi(0.0)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivative(t, 0)
    }

    pub fn derivative(&self, t: f64, k: usize) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        match self.shape {
            BumpShape::Single { lo, hi } => {
                let w = hi - lo;
                let s = (2.0 * t - lo - hi) / w;
                self.amplitude * (2.0 / w).powi(k as i32) * psi_derivative(s, k)
            }
            BumpShape::Plateau { left, right, ramp } => {
                let scale = (1.0 / ramp).powi(k as i32);
                if t >= left && t < right {
                    if k == 0 {
                        self.amplitude * psi(0.0)
                    } else {
                        0.0
                    }
                } else if t < left {
                    self.amplitude * scale * psi_derivative((t - left) / ramp, k)
                } else {
                    self.amplitude * scale * psi_derivative((t - right) / ramp, k)
                }
            }
        }
    }

    /// Sample points covering the support at spacing `<= min(1e-3, len / 2000)`.
    pub fn grid(&self) -> Vec<f64> {
        let (a, b) = self.support();
        let len = b - a;
        let n = ((len / 1e-3).ceil() as usize).max(2000);
        (0..=n).map(|i| a + len * i as f64 / n as f64).collect()
    }

    /// Largest `|f^(k)|` on [`grid`](Self::grid), for each `k <= order`.
    pub fn derivative_maxima(&self, order: usize) -> Vec<f64> {
        let grid = self.grid();
        (0..=order)
            .map(|k| grid.iter().map(|&t| self.derivative(t, k).abs()).fold(0.0, f64::max))
            .collect()
    }

    /// Grid-measured `C^order` norm (largest derivative of order `<= order`).
    pub fn cr_norm(&self, order: usize) -> f64 {
        self.derivative_maxima(order).into_iter().fold(0.0, f64::max)
    }
}

/// Parameters of the construction for one target `p/q` and gap `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpSpec {
    pub epsilon: f64,
    pub r: u32,
    pub p: i64,
    pub q: i64,
    pub j: (f64, f64),
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl BumpSpec {
    pub fn new(epsilon: f64, r: u32, p: i64, q: i64, j: (f64, f64)) -> Result<Self> {
        crate::aubry::check_reduced(p, q)?;
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be non-negative, got {epsilon}")));
        }
        let len = j.1 - j.0;
        if len < 1.0 / q as f64 - 1e-12 {
            return Err(Error::NoAdmissibleGap { min: 1.0 / q as f64, found: len });
        }
        Ok(Self { epsilon, r, p, q, j, c0: c0(r)?, c1: c1(r)?, c2: c2(r)? })
    }

    /// Middle third `J'` of `J`.
    pub fn j_prime(&self) -> (f64, f64) {
        middle_third(self.j)
    }

    pub fn order(&self) -> usize {
        self.r as usize + 1
    }

    /// `C1 ε / q^{r+1}`, the lower bound of `u` on `J'`.
    pub fn u_lower_bound(&self) -> f64 {
        self.c1 * self.epsilon / (self.q as f64).powi(self.r as i32 + 1)
    }

    fn amplitude(&self, q_eff: f64) -> f64 {
        self.epsilon / (2f64.powi(self.r as i32 + 2) * q_eff.powi(self.r as i32 + 1) * self.c0)
    }
}

pub fn middle_third(i: (f64, f64)) -> (f64, f64) {
    let d = (i.1 - i.0) / 3.0;
    (i.0 + d, i.1 - d)
}

/// Measured properties of a `u`-style bump.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpCertificate {
    pub support_ok: bool,
    pub norm: f64,
    pub norm_bound: f64,
    pub min_on_middle: f64,
    pub lower_bound: f64,
}

impl BumpCertificate {
    pub const NORM_SLACK: f64 = 1e-8;
    pub const LOWER_SLACK: f64 = 1e-12;

    pub fn norm_ok(&self) -> bool {
        self.norm <= self.norm_bound + Self::NORM_SLACK
    }

    pub fn lower_ok(&self) -> bool {
        self.min_on_middle >= self.lower_bound - Self::LOWER_SLACK
    }

    pub fn passed(&self) -> bool {
        self.support_ok && self.norm_ok() && self.lower_ok()
    }

    fn into_result(self, bump: SmoothBump) -> Result<SmoothBump> {
        let mut failures = Vec::new();
        if !self.support_ok {
            failures.push(format!("(a) support {:?} leaves the interval", bump.support()));
        }
        if !self.norm_ok() {
            failures.push(format!("(b) norm {:e} exceeds {:e} by {:e}", self.norm, self.norm_bound, self.norm - self.norm_bound));
        }
        if !self.lower_ok() {
            failures.push(format!(
                "(c) minimum {:e} on the middle third is below {:e} by {:e}",
                self.min_on_middle,
                self.lower_bound,
                self.lower_bound - self.min_on_middle
            ));
        }
        if failures.is_empty() {
            Ok(bump)
        } else {
            Err(Error::Certification(format!("{}: {}", bump.label, failures.join("; "))))
        }
    }
}

/// Certifies support inside `interval`, the `C^order` norm against
/// `norm_bound`, and the minimum over the closed middle third against
/// `lower_bound`.
pub fn certify_single(bump: &SmoothBump, interval: (f64, f64), order: usize, norm_bound: f64, lower_bound: f64) -> BumpCertificate {
    let (a, b) = bump.support();
    let (m0, m1) = middle_third(interval);
    let n = 600;
    let min_on_middle = (0..=n)
        .map(|i| bump.value(m0 + (m1 - m0) * i as f64 / n as f64))
        .fold(f64::INFINITY, f64::min);
    BumpCertificate {
        support_ok: a >= interval.0 && b <= interval.1,
        norm: bump.cr_norm(order),
        norm_bound,
        min_on_middle,
        lower_bound,
    }
}

fn u_like(spec: &BumpSpec, label: &str, interval: (f64, f64), fraction: f64) -> SmoothBump {
    let q_eff = (spec.q as f64).max(1.0 / (interval.1 - interval.0));
    SmoothBump {
        label: label.into(),
        shape: BumpShape::Single { lo: interval.0, hi: interval.1 },
        amplitude: fraction * spec.amplitude(q_eff),
    }
}

/// `u`: `Ψ` scaled to fill `J̄`, amplitude `ε / (2^{r+2} q^{r+1} C0)`.
pub fn u_bump(spec: &BumpSpec) -> Result<SmoothBump> {
    let bump = u_like(spec, "u", spec.j, 1.0);
    certify_u(spec, &bump).into_result(bump)
}

pub fn certify_u(spec: &BumpSpec, u: &SmoothBump) -> BumpCertificate {
    certify_single(u, spec.j, spec.order(), spec.epsilon / 2.0, spec.u_lower_bound())
}

/// `v`: plateau `C2 q^{-r-1} Ψ(0)` on `[left, right)` with ramps of width
/// `1/(2q)` on both sides.
pub fn v_bump(r: u32, q: i64, left: f64, right: f64) -> Result<SmoothBump> {
    if q <= 0 {
        return Err(Error::NonPositiveDenominator(q));
    }
    let max = 2.0 / q as f64;
    if !(right >= left) || right - left > max + 1e-12 {
        return Err(Error::SupportTooLong { len: right - left, max });
    }
    let bump = SmoothBump {
        label: "v".into(),
        shape: BumpShape::Plateau { left, right, ramp: 0.5 / q as f64 },
        amplitude: c2(r)? * (q as f64).powi(-(r as i32) - 1),
    };
    let norm = bump.cr_norm(r as usize + 1);
    if norm > 1.0 + 1e-6 {
        return Err(Error::Certification(format!("v: norm {norm:e} exceeds 1")));
    }
    Ok(bump)
}

/// `w`: a `u`-style bump on `I ⊆ J'` with `C^{r+1}` budget
/// `amplitude_fraction · ε / 2`, using `max(q, 1/|I|)` in place of `q`.
pub fn w_bump(spec: &BumpSpec, i: (f64, f64), amplitude_fraction: f64) -> Result<SmoothBump> {
    let jp = spec.j_prime();
    if !(i.0 < i.1) || i.0 < jp.0 - 1e-12 || i.1 > jp.1 + 1e-12 {
        return Err(Error::InvalidArgument(format!("I = {i:?} is not inside J' = {jp:?}")));
    }
    if !(amplitude_fraction > 0.0 && amplitude_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("amplitude fraction {amplitude_fraction} outside (0, 1]")));
    }
    let bump = u_like(spec, "w", i, amplitude_fraction);
    certify_w(spec, &bump, i, amplitude_fraction).into_result(bump)
}

pub fn certify_w(spec: &BumpSpec, w: &SmoothBump, i: (f64, f64), amplitude_fraction: f64) -> BumpCertificate {
    // strictly positive on the middle third of I whenever ε > 0
    let lower = w.amplitude * psi(1.0 / 3.0);
    certify_single(w, i, spec.order(), amplitude_fraction * spec.epsilon / 2.0, lower)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> BumpSpec {
        BumpSpec::new(0.1, 1, 1, 2, (-0.25, 0.25)).unwrap()
    }

    #[test]
    fn u_examples() {
        let s = spec();
        let u = u_bump(&s).unwrap();
        let peak = 0.1 / (8.0 * 4.0 * s.c0) * (-1f64).exp();
        assert!((u.value(0.0) - peak).abs() < 1e-18);
        assert_eq!(u.value(0.25), 0.0);
        assert_eq!(u.value(-0.25), 0.0);
        let lb = s.c1 * 0.1 / 4.0;
        for i in 0..=100 {
            let t = -1.0 / 12.0 + i as f64 / 600.0;
            assert!(u.value(t) >= lb - 1e-12);
        }
    }

    #[test]
    fn v_examples() {
        let v = v_bump(1, 2, 0.5, 1.0).unwrap();
        let plateau = c2(1).unwrap() / 4.0 * (-1f64).exp();
        assert!((v.value(0.75) - plateau).abs() < 1e-18);
        assert_eq!(v.value(0.5), plateau);
        assert!((v.value(0.5 - 1e-12) - plateau).abs() < 1e-12);
        assert_eq!(v.value(1.26), 0.0);
        assert_eq!(v.value(0.24), 0.0);
        assert!(v_bump(1, 2, 0.0, 1.5).is_err());
    }

    #[test]
    fn w_rejects_intervals_outside_j_prime() {
        let s = spec();
        assert!(w_bump(&s, (-0.2, 0.0), 1.0).is_err());
        let w = w_bump(&s, (-0.05, 0.05), 0.5).unwrap();
        assert_eq!(w.value(0.06), 0.0);
        assert!(w.value(0.0) > 0.0);
    }

    #[test]
    fn narrow_j_is_rejected() {
        assert!(matches!(BumpSpec::new(0.1, 1, 1, 2, (0.0, 0.4)), Err(Error::NoAdmissibleGap { .. })));
    }
}
