use super::bump::SmoothBump;
use crate::error::{Error, Result};
use crate::genfun::{DerivativeMode, GeneratingFunction, SharedGenFun};

/// One term `sum_i a(x + i) b(x' + i)` of a perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductTerm {
    pub a: SmoothBump,
    pub b: SmoothBump,
}

impl ProductTerm {
    /// `∂^i_x ∂^j_{x'}` of the translate sum. At most one translate of `a`
    /// meets any `x`, so the sum is a single product.
    pub fn partial(&self, x: f64, xp: f64, i: usize, j: usize) -> f64 {
        let (lo, hi) = self.a.support();
        let k = (lo - x).ceil();
        let s = x + k;
        if s > hi {
            return 0.0;
        }
        let fa = self.a.derivative(s, i);
        if fa == 0.0 {
            return 0.0;
        }
        fa * self.b.derivative(xp + k, j)
    }
}

/// `h + sum_terms sum_i a(x + i) b(x' + i)`.
#[derive(Clone)]
pub struct PerturbedGenFun {
    base: SharedGenFun,
    terms: Vec<ProductTerm>,
    label: String,
    theta: Option<f64>,
}

impl std::fmt::Debug for PerturbedGenFun {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PerturbedGenFun").field("label", &self.label).field("terms", &self.terms).finish()
    }
}

/// Supports of length up to one are accepted: the bumps vanish at their
/// endpoints, so two translates never contribute at the same point.
const MAX_SUPPORT: f64 = 1.0 + 1e-12;

impl PerturbedGenFun {
    /// `budget` bounds the second partials of the perturbation and is added
    /// to the base `θ`.
    pub fn new(base: SharedGenFun, terms: Vec<ProductTerm>, label: impl Into<String>, budget: f64) -> Result<Self> {
        for t in &terms {
            for b in [&t.a, &t.b] {
                if b.support_len() > MAX_SUPPORT {
                    return Err(Error::OverlappingTranslates(b.support_len()));
                }
            }
        }
        let theta = base.theta().map(|t| t + budget);
        Ok(Self { base, terms, label: label.into(), theta })
    }

    pub fn base(&self) -> &SharedGenFun {
        &self.base
    }

    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    /// `∂^i_x ∂^j_{x'}` of the perturbation alone.
    pub fn perturbation_partial(&self, x: f64, xp: f64, i: usize, j: usize) -> f64 {
        self.terms.iter().map(|t| t.partial(x, xp, i, j)).sum()
    }
}

impl GeneratingFunction for PerturbedGenFun {
    fn value(&self, x: f64, xp: f64) -> f64 {
        self.base.value(x, xp) + self.perturbation_partial(x, xp, 0, 0)
    }
    fn d1(&self, x: f64, xp: f64) -> f64 {
        self.base.d1(x, xp) + self.perturbation_partial(x, xp, 1, 0)
    }
    fn d2(&self, x: f64, xp: f64) -> f64 {
        self.base.d2(x, xp) + self.perturbation_partial(x, xp, 0, 1)
    }
    fn d11(&self, x: f64, xp: f64) -> f64 {
        self.base.d11(x, xp) + self.perturbation_partial(x, xp, 2, 0)
    }
    fn d12(&self, x: f64, xp: f64) -> f64 {
        self.base.d12(x, xp) + self.perturbation_partial(x, xp, 1, 1)
    }
    fn d22(&self, x: f64, xp: f64) -> f64 {
        self.base.d22(x, xp) + self.perturbation_partial(x, xp, 0, 2)
    }
    fn theta(&self) -> Option<f64> {
        self.theta
    }
    fn derivative_mode(&self) -> DerivativeMode {
        self.base.derivative_mode()
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

/// `h' = h + Σ u(x+i) v(x'+i)` and `h~ = h' + Σ w(x+i) v(x'+i)`.
pub fn perturbed_genfun(
    h: SharedGenFun,
    u: &SmoothBump,
    v: &SmoothBump,
    w: &SmoothBump,
    budget: f64,
) -> Result<(PerturbedGenFun, PerturbedGenFun)> {
    let uv = ProductTerm { a: u.clone(), b: v.clone() };
    let wv = ProductTerm { a: w.clone(), b: v.clone() };
    let base = h.label();
    let h_prime = PerturbedGenFun::new(h.clone(), vec![uv.clone()], format!("h'[{base}]"), budget)?;
    let h_tilde = PerturbedGenFun::new(h, vec![uv, wv], format!("h~[{base}]"), budget)?;
    Ok((h_prime, h_tilde))
}

/// `C^order` norm of `Σ_i a(x+i) b(x'+i)` summed over terms sharing the
/// same `b`: the largest `|∂^i_x ∂^j_{x'}|`, `i + j <= order`, over the
/// product grid of the bump grids. A mixed partial at a grid point is
/// `(Σ a^(i))(s) · b^(j)(t)`, so its grid maximum is the product of the
/// tabulated one-dimensional maxima.
pub fn product_cr_norm(a: &[&SmoothBump], b: &SmoothBump, order: usize) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let mut grid: Vec<f64> = a.iter().flat_map(|f| f.grid()).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let a_max: Vec<f64> = (0..=order)
        .map(|k| {
            grid.iter()
                .map(|&s| a.iter().map(|f| f.derivative(s, k)).sum::<f64>().abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let b_max = b.derivative_maxima(order);
    let mut best = 0.0f64;
    for i in 0..=order {
        for j in 0..=order - i {
            best = best.max(a_max[i] * b_max[j]);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun::builtin_h0;
    use crate::mather::bump::{u_bump, v_bump, w_bump, BumpSpec};

    fn build() -> (PerturbedGenFun, PerturbedGenFun) {
        let spec = BumpSpec::new(0.1, 1, 1, 2, (0.0, 0.5)).unwrap();
        let u = u_bump(&spec).unwrap();
        let v = v_bump(1, 2, 0.5, 1.0).unwrap();
        let w = w_bump(&spec, (0.2, 0.3), 1.0).unwrap();
        perturbed_genfun(builtin_h0(), &u, &v, &w, 0.1).unwrap()
    }

    #[test]
    fn periodic_and_local() {
        let (hp, ht) = build();
        for &(x, xp) in &[(0.25, 0.75), (0.1, 0.9), (0.3, 1.1), (0.4, 0.6)] {
            for k in [-2.0, 1.0, 5.0] {
                assert!((ht.value(x + k, xp + k) - ht.value(x, xp)).abs() < 1e-14);
                assert!((hp.d12(x + k, xp + k) - hp.d12(x, xp)).abs() < 1e-12);
            }
        }
        // outside the product support nothing changes
        let h = builtin_h0();
        assert_eq!(ht.value(0.6, 0.9), h.value(0.6, 0.9));
        assert_eq!(ht.value(0.25, 0.1), h.value(0.25, 0.1));
        assert!(hp.value(0.25, 0.75) > 0.125);
    }

    #[test]
    fn partials_match_differences() {
        let (_, ht) = build();
        let e = 1e-6;
        for &(x, xp) in &[(0.22, 0.7), (0.27, 0.61), (0.1, 0.4)] {
            let fd1 = (ht.value(x + e, xp) - ht.value(x - e, xp)) / (2.0 * e);
            let fd2 = (ht.value(x, xp + e) - ht.value(x, xp - e)) / (2.0 * e);
            assert!((fd1 - ht.d1(x, xp)).abs() < 1e-8);
            assert!((fd2 - ht.d2(x, xp)).abs() < 1e-8);
            let fd12 = (ht.d1(x, xp + e) - ht.d1(x, xp - e)) / (2.0 * e);
            assert!((fd12 - ht.d12(x, xp)).abs() < 1e-6);
        }
    }

    #[test]
    fn long_supports_are_rejected() {
        let spec = BumpSpec::new(0.1, 1, 0, 1, (0.0, 1.2)).unwrap();
        let u = u_bump(&spec).unwrap();
        let v = v_bump(1, 2, 0.5, 1.0).unwrap();
        let t = ProductTerm { a: u, b: v };
        assert!(matches!(
            PerturbedGenFun::new(builtin_h0(), vec![t], "x", 0.1),
            Err(Error::OverlappingTranslates(_))
        ));
    }
}
