#![allow(dead_code)]

use std::f64::consts::PI;

use twistcore::genfun::GeneratingFunction;

/// `(x' - x)^2 / 2 - k/(4 pi^2) cos(2 pi x)`: the standard-map generating
/// function, integrable at `k = 0`.
#[derive(Debug, Clone, Copy)]
pub struct StandardMap {
    pub k: f64,
}

impl StandardMap {
    fn v1(&self, x: f64) -> f64 {
        self.k / (2.0 * PI) * (2.0 * PI * x).sin()
    }
}

impl GeneratingFunction for StandardMap {
    fn value(&self, x: f64, xp: f64) -> f64 {
        0.5 * (xp - x) * (xp - x) - self.k / (4.0 * PI * PI) * (2.0 * PI * x).cos()
    }
    fn d1(&self, x: f64, xp: f64) -> f64 {
        -(xp - x) + self.v1(x)
    }
    fn d2(&self, x: f64, xp: f64) -> f64 {
        xp - x
    }
    fn d11(&self, x: f64, _xp: f64) -> f64 {
        1.0 + self.k * (2.0 * PI * x).cos()
    }
    fn d12(&self, _x: f64, _xp: f64) -> f64 {
        -1.0
    }
    fn d22(&self, _x: f64, _xp: f64) -> f64 {
        1.0
    }
    fn theta(&self) -> Option<f64> {
        Some(1.0 + self.k.abs())
    }
    fn label(&self) -> String {
        format!("standard[k={}]", self.k)
    }
}

/// Periodic action `sum_{i<q} h(x_i, x_{i+1})` with `x_q = x_0 + p`, from
/// `x_0` and the steps `d_i = x_{i+1} - x_i`, `i < q - 1`.
fn periodic_action(h: &dyn GeneratingFunction, p: i64, x0: f64, steps: &[f64]) -> f64 {
    let mut x = x0;
    let mut a = 0.0;
    for &d in steps {
        a += h.value(x, x + d);
        x += d;
    }
    a + h.value(x, x0 + p as f64)
}

/// Exhaustive search of the periodic action over `x_0` in `[0, 1)` and the
/// `q - 1` free steps in `[p/q - 1, p/q + 1]`, at `n` points per axis, then
/// repeated zooms (factor 4) around the best `keep` cells until the spacing
/// drops below `1e-7`.
pub fn grid_search_periodic(h: &dyn GeneratingFunction, p: i64, q: i64, n: usize, keep: usize) -> f64 {
    let dims = q as usize;
    let centre: Vec<f64> = std::iter::once(0.5).chain(std::iter::repeat(p as f64 / q as f64).take(dims - 1)).collect();
    let half: Vec<f64> = std::iter::once(0.5).chain(std::iter::repeat(1.0).take(dims - 1)).collect();
    let mut boxes = vec![(centre, half)];
    let mut best = f64::INFINITY;
    loop {
        let mut cands: Vec<(f64, Vec<f64>)> = Vec::new();
        let mut spacing = 0.0f64;
        for (c, hw) in &boxes {
            let axes: Vec<Vec<f64>> = (0..dims)
                .map(|d| (0..=n).map(|i| c[d] - hw[d] + 2.0 * hw[d] * i as f64 / n as f64).collect())
                .collect();
            spacing = spacing.max(2.0 * hw.iter().cloned().fold(0.0, f64::max) / n as f64);
            let total = (n + 1).pow(dims as u32);
            for idx in 0..total {
                let mut r = idx;
                let pt: Vec<f64> = (0..dims)
                    .map(|d| {
                        let i = r % (n + 1);
                        r /= n + 1;
                        axes[d][i]
                    })
                    .collect();
                let a = periodic_action(h, p, pt[0], &pt[1..]);
                cands.push((a, pt));
            }
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0));
        best = best.min(cands[0].0);
        if spacing < 1e-7 {
            return best;
        }
        let cell = |hw: f64| 2.0 * hw / n as f64;
        let hw0 = boxes[0].1.clone();
        boxes = cands
            .into_iter()
            .take(keep)
            .map(|(_, pt)| (pt, hw0.iter().map(|&w| 2.0 * cell(w)).collect()))
            .collect();
    }
}
