//! Minimization of chain actions `sum h(x_i, x_{i+1})` with pinned entries.
//!
//! Cyclic coordinate sweeps (each coordinate solved by safeguarded Newton)
//! bring the configuration into the basin; a tridiagonal Newton polish then
//! drives the Euler-Lagrange residual to round-off.

use crate::genfun::GeneratingFunction;
use crate::solve::newton_bisect;

#[derive(Debug, Clone, Copy)]
pub(crate) struct ChainOptions {
    pub tol: f64,
    pub max_sweeps: usize,
    pub max_newton: usize,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_sweeps: 2000, max_newton: 60 }
    }
}

pub(crate) struct Chain<'a> {
    pub h: &'a dyn GeneratingFunction,
    pub x: Vec<f64>,
    pub pinned: Vec<bool>,
    /// Periodic closure `x_n := x_0 + p`, `x_{-1} := x_{n-1} - p`.
    pub cyclic_shift: Option<f64>,
    /// Integer frames: entry `i` stands for `base[i] + x[i]`. Terms are
    /// evaluated in the frame of their left entry, which `h(x + 1, x' + 1) =
    /// h(x, x')` allows, so long chains keep full precision.
    pub base: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub(crate) struct ChainSolution {
    pub x: Vec<f64>,
    pub residual: f64,
    pub sweeps: usize,
    pub converged: bool,
}

impl<'a> Chain<'a> {
    pub fn segment(h: &'a dyn GeneratingFunction, x: Vec<f64>) -> Self {
        let n = x.len();
        let mut pinned = vec![false; n];
        pinned[0] = true;
        pinned[n - 1] = true;
        Self { h, x, pinned, cyclic_shift: None, base: None }
    }

    pub fn periodic(h: &'a dyn GeneratingFunction, x: Vec<f64>, p: i64) -> Self {
        let n = x.len();
        Self { h, x, pinned: vec![false; n], cyclic_shift: Some(p as f64), base: None }
    }

    pub fn pin(mut self, i: usize, value: f64) -> Self {
        self.x[i] = value;
        self.pinned[i] = true;
        self
    }

    pub fn with_base(mut self, base: Vec<f64>) -> Self {
        assert_eq!(base.len(), self.x.len());
        self.base = Some(base);
        self
    }

    /// `base[j] - base[i]`.
    fn frame(&self, i: usize, j: usize) -> f64 {
        self.base.as_ref().map_or(0.0, |b| b[j] - b[i])
    }

    fn left(&self, x: &[f64], i: usize) -> Option<f64> {
        if i > 0 {
            Some(x[i - 1] + self.frame(i, i - 1))
        } else {
            let n = x.len();
            self.cyclic_shift.map(|p| x[n - 1] + self.frame(i, n - 1) - p)
        }
    }

    fn right(&self, x: &[f64], i: usize) -> Option<f64> {
        if i + 1 < x.len() {
            Some(x[i + 1] + self.frame(i, i + 1))
        } else {
            self.cyclic_shift.map(|p| x[0] + self.frame(i, 0) + p)
        }
    }

    /// Terms `h(x_i, x_{i+1})` in the frame of `x_i`, the closing term last.
    fn terms<'b>(&'b self, x: &'b [f64]) -> impl Iterator<Item = f64> + 'b {
        let n = x.len();
        let last = if self.cyclic_shift.is_some() { n } else { n - 1 };
        (0..last).map(move |i| self.h.value(x[i], self.right(x, i).expect("closed chain")))
    }

    pub fn action(&self, x: &[f64]) -> f64 {
        self.terms(x).sum()
    }

    /// `action(y) - action(x)`, summed term by term.
    pub fn action_change(&self, x: &[f64], y: &[f64]) -> f64 {
        self.terms(y).zip(self.terms(x)).map(|(b, a)| b - a).sum()
    }

    fn gradient_at(&self, x: &[f64], i: usize) -> f64 {
        let mut g = 0.0;
        if let Some(l) = self.left(x, i) {
            g += self.h.d2(l, x[i]);
        }
        if let Some(r) = self.right(x, i) {
            g += self.h.d1(x[i], r);
        }
        g
    }

    pub fn residual(&self, x: &[f64]) -> f64 {
        (0..x.len())
            .filter(|&i| !self.pinned[i])
            .map(|i| self.gradient_at(x, i).abs())
            .fold(0.0, f64::max)
    }

    /// One cyclic pass of exact coordinate minimization.
    fn sweep(&self, x: &mut [f64]) {
        for i in 0..x.len() {
            if self.pinned[i] {
                continue;
            }
            let l = self.left(x, i);
            let r = self.right(x, i);
            let h = self.h;
            let f = |t: f64| {
                let mut g = 0.0;
                let mut d = 0.0;
                if let Some(l) = l {
                    g += h.d2(l, t);
                    d += h.d22(l, t);
                }
                if let Some(r) = r {
                    g += h.d1(t, r);
                    d += h.d11(t, r);
                }
                (g, d)
            };
            let t0 = x[i];
            let (g0, _) = f(t0);
            if g0 == 0.0 {
                continue;
            }
            // expand towards the descent side until the derivative changes sign
            let dir = -g0.signum();
            let mut step = 1e-3;
            let mut bracket = None;
            for _ in 0..60 {
                let t1 = t0 + dir * step;
                if f(t1).0.signum() != g0.signum() {
                    bracket = Some(if dir > 0.0 { (t0, t1) } else { (t1, t0) });
                    break;
                }
                step *= 2.0;
            }
            if let Some((a, b)) = bracket {
                if let Some(t) = newton_bisect(f, a, b, 1e-15, 200) {
                    x[i] = t;
                }
            }
        }
    }

    /// Newton step on the free variables with the Hessian shifted by `mu`
    /// when it is not positive definite; `None` for an unpinned cycle.
    fn newton_direction(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut mu = 0.0;
        for _ in 0..80 {
            if let Some(d) = self.shifted_newton_direction(x, mu) {
                return Some(d);
            }
            mu = if mu == 0.0 { 1e-12 } else { mu * 4.0 };
        }
        None
    }

    /// Tridiagonal solve of `(H + mu I) d = -g`; `None` if that matrix is
    /// not positive definite or the chain is an unpinned cycle.
    fn shifted_newton_direction(&self, x: &[f64], mu: f64) -> Option<Vec<f64>> {
        let n = x.len();
        if self.cyclic_shift.is_some() && !self.pinned.iter().any(|&p| p) {
            return None;
        }
        // Rotate a cyclic chain so that a pinned entry comes first; the
        // pinned row then cuts the cycle.
        let start = if self.cyclic_shift.is_some() { self.pinned.iter().position(|&p| p)? } else { 0 };
        let idx = |k: usize| (start + k) % n;
        let mut diag = vec![1.0; n];
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for k in 0..n {
            let i = idx(k);
            if self.pinned[i] {
                continue;
            }
            let l = self.left(x, i);
            let r = self.right(x, i);
            let mut d = 0.0;
            if let Some(l) = l {
                d += self.h.d22(l, x[i]);
            }
            if let Some(r) = r {
                d += self.h.d11(x[i], r);
            }
            diag[k] = d + mu;
            rhs[k] = -self.gradient_at(x, i);
            if k > 0 && !self.pinned[idx(k - 1)] {
                lower[k] = self.h.d12(l?, x[i]);
            }
            if k + 1 < n && !self.pinned[idx(k + 1)] {
                upper[k] = self.h.d12(x[i], r?);
            }
        }
        // Thomas algorithm; a non-positive pivot means the Hessian is not PD.
        let mut c = vec![0.0; n];
        let mut dvec = vec![0.0; n];
        let mut pivot = diag[0];
        if !(pivot > 0.0) {
            return None;
        }
        c[0] = upper[0] / pivot;
        dvec[0] = rhs[0] / pivot;
        for k in 1..n {
            pivot = diag[k] - lower[k] * c[k - 1];
            if !(pivot > 0.0) {
                return None;
            }
            c[k] = upper[k] / pivot;
            dvec[k] = (rhs[k] - lower[k] * dvec[k - 1]) / pivot;
        }
        let mut sol = vec![0.0; n];
        sol[n - 1] = dvec[n - 1];
        for k in (0..n - 1).rev() {
            sol[k] = dvec[k] - c[k] * sol[k + 1];
        }
        let mut out = vec![0.0; n];
        for k in 0..n {
            out[idx(k)] = sol[k];
        }
        Some(out)
    }

    pub fn solve(&self, opts: ChainOptions) -> ChainSolution {
        let mut x = self.x.clone();
        let mut sweeps = 0;
        let mut res = self.residual(&x);
        let mut newton_failures = 0;
        // differences of entries of size |x| carry rounding of order ulp(|x|)
        let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let tol = opts.tol.max(8.0 * f64::EPSILON * scale);
        while res > tol && sweeps < opts.max_sweeps {
            let mut improved = false;
            if newton_failures < 3 {
                for _ in 0..opts.max_newton {
                    let Some(dir) = self.newton_direction(&x) else { break };
                    let slope: f64 = (0..x.len()).filter(|&i| !self.pinned[i]).map(|i| self.gradient_at(&x, i) * dir[i]).sum();
                    let mut alpha = 1.0;
                    let mut accepted = false;
                    for _ in 0..60 {
                        let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + alpha * d).collect();
                        let delta = self.action_change(&x, &trial);
                        let r1 = self.residual(&trial);
                        // Armijo decrease, or a residual gain within round-off of the action
                        let armijo = slope < 0.0 && delta <= 1e-4 * alpha * slope;
                        if armijo || (delta <= 1e-15 * x.len() as f64 && r1 < res) {
                            x = trial;
                            res = r1;
                            accepted = true;
                            break;
                        }
                        alpha *= 0.5;
                    }
                    if !accepted {
                        break;
                    }
                    improved = true;
                    if res <= tol {
                        break;
                    }
                }
            }
            if res <= tol {
                break;
            }
            if !improved {
                newton_failures += 1;
            }
            for _ in 0..10 {
                self.sweep(&mut x);
                sweeps += 1;
            }
            let new_res = self.residual(&x);
            if newton_failures >= 3 && !(new_res < res) && sweeps > 200 {
                res = new_res;
                break;
            }
            res = new_res;
        }
        ChainSolution { converged: res <= tol, residual: res, sweeps, x }
    }
}
