mod common;

use std::sync::Arc;

use common::StandardMap;
use num_bigint::BigInt;
use num_traits::One;
use proptest::prelude::*;
use twistcore::aubry::{
    barrier_rational, convergents, crossing_count, minimal_periodic, minimize_segment, rotation_symbol_of,
    Configuration, ContinuedFraction, RotationSymbol,
};
use twistcore::genfun::{GeneratingFunction, Quadratic};
use twistcore::mather::{certify_u, perturbed_genfun, u_bump, v_bump, w_bump, BumpSpec};
use twistcore::twist::{iterate, map_from_genfun, solve_next};

const RATIONALS: [(i64, i64); 6] = [(0, 1), (1, 2), (1, 3), (2, 3), (1, 4), (2, 5)];

fn rational() -> impl Strategy<Value = (i64, i64)> {
    prop::sample::select(RATIONALS.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn barrier_is_nonnegative(k in 0.0f64..0.9, (p, q) in rational(), xi in 0.0f64..1.0) {
        let h = StandardMap { k };
        let s = barrier_rational(&h, p, q, xi).unwrap();
        prop_assert!(s.value >= -1e-12, "{}", s.value);
    }

    #[test]
    fn barrier_is_one_periodic_in_xi(k in 0.0f64..0.9, (p, q) in rational(), xi in 0.0f64..1.0, n in -3i64..3) {
        let h = StandardMap { k };
        let a = barrier_rational(&h, p, q, xi).unwrap().value;
        let b = barrier_rational(&h, p, q, xi + n as f64).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
    }

    /// Raising both ends of a segment raises every entry of its minimizer.
    #[test]
    fn segment_minimizers_depend_monotonically_on_ends(
        k in 0.0f64..0.9,
        a in -0.5f64..0.5,
        len in 0.5f64..2.5,
        da in 0.0f64..0.3,
        db in 0.0f64..0.3,
        n in 1usize..6,
    ) {
        let h = StandardMap { k };
        let lo = minimize_segment(&h, a, a + len, n).unwrap();
        let hi = minimize_segment(&h, a + da, a + len + db, n).unwrap();
        for (x, y) in lo.config.entries().iter().zip(hi.config.entries()) {
            prop_assert!(y >= &(x - 1e-9), "{x} > {y}");
        }
    }

    /// Minimal periodic configurations of different rotation numbers cross
    /// at most once.
    #[test]
    fn different_rotation_numbers_cross_at_most_once(k in 0.0f64..0.9, i in 0usize..6, j in 0usize..6, shift in -3i64..3) {
        prop_assume!(i != j);
        let h = StandardMap { k };
        let (p1, q1) = RATIONALS[i];
        let (p2, q2) = RATIONALS[j];
        let x = minimal_periodic(&h, p1, q1).unwrap().config;
        let y = minimal_periodic(&h, p2, q2).unwrap().config.translate(0, shift);
        let (from, to) = (-40, 40);
        let n = crossing_count(&x.window(from, to).unwrap(), &y.window(from, to).unwrap()).unwrap();
        prop_assert!(n <= 1, "{n} crossings");
    }

    /// Integer translates of a minimal periodic configuration never cross it.
    #[test]
    fn translates_are_ordered(k in 0.0f64..0.9, (p, q) in rational(), a in -6i64..6, b in -3i64..3) {
        let h = StandardMap { k };
        let x = minimal_periodic(&h, p, q).unwrap().config;
        let t = x.translate(a, b);
        let diffs: Vec<f64> = (-20..=20).map(|i| t.at(i).unwrap() - x.at(i).unwrap()).collect();
        let pos = diffs.iter().all(|&d| d >= -1e-9);
        let neg = diffs.iter().all(|&d| d <= 1e-9);
        prop_assert!(pos || neg, "translate ({a}, {b}) crosses: {diffs:?}");
    }

    #[test]
    fn convergent_identity_is_exact(qs in prop::collection::vec(1i64..50, 1..30), a0 in -5i64..5) {
        let quotients: Vec<BigInt> = std::iter::once(a0).chain(qs).map(BigInt::from).collect();
        let cf = ContinuedFraction::from_quotients(quotients.clone());
        let c = convergents(&cf, quotients.len()).unwrap();
        for k in 1..c.len() {
            let lhs = &c[k].p * &c[k - 1].q - &c[k - 1].p * &c[k].q;
            let sign = if k % 2 == 1 { BigInt::one() } else { -BigInt::one() };
            prop_assert_eq!(lhs, sign);
        }
    }

    /// Orbits of the reconstructed map satisfy the discrete Euler-Lagrange
    /// equation of the generating function they came from.
    #[test]
    fn orbits_are_euler_lagrange_critical(k in 0.0f64..0.9, x0 in 0.0f64..1.0, y0 in -1.0f64..1.0) {
        let h = Arc::new(StandardMap { k });
        let map = map_from_genfun(h.clone(), (f64::NEG_INFINITY, f64::INFINITY));
        let orbit = iterate(&map, x0, y0, 40).unwrap();
        let xs = &orbit.xs;
        for i in 1..xs.len() - 1 {
            let r = h.d2(xs[i - 1], xs[i]) + h.d1(xs[i], xs[i + 1]);
            prop_assert!(r.abs() <= 1e-9 * (1.0 + xs[i].abs()), "step {i}: {r}");
        }
    }

    #[test]
    fn perturbed_orbits_are_euler_lagrange_critical(
        eps in 0.01f64..0.1,
        x0 in 0.0f64..1.0,
        y0 in -0.8f64..0.8,
        frac in 0.1f64..1.0,
    ) {
        let spec = BumpSpec::new(eps, 1, 1, 2, (0.0, 0.5)).unwrap();
        let u = u_bump(&spec).unwrap();
        let v = v_bump(1, 2, 0.5, 1.0).unwrap();
        let w = w_bump(&spec, (0.2, 0.3), frac).unwrap();
        let (_, ht) = perturbed_genfun(Arc::new(Quadratic), &u, &v, &w, eps).unwrap();
        let ht = Arc::new(ht);
        let map = map_from_genfun(ht.clone(), (f64::NEG_INFINITY, f64::INFINITY));
        let orbit = iterate(&map, x0, y0, 30).unwrap();
        let xs = &orbit.xs;
        for i in 1..xs.len() - 1 {
            let r = ht.d2(xs[i - 1], xs[i]) + ht.d1(xs[i], xs[i + 1]);
            prop_assert!(r.abs() <= 1e-9, "step {i}: {r}");
        }
        // (H1) holds exactly up to rounding
        for n in [-2.0, 1.0, 4.0] {
            prop_assert!((ht.value(x0 + n, x0 + y0 + n) - ht.value(x0, x0 + y0)).abs() <= 1e-13);
        }
    }

    /// The twist: `x'` solving `-h_x(x, x') = y` increases with `y`.
    #[test]
    fn next_point_increases_with_momentum(k in 0.0f64..0.9, x in 0.0f64..1.0, y in -2.0f64..2.0, dy in 1e-6f64..1.0) {
        let h = StandardMap { k };
        prop_assert!(solve_next(&h, x, y + dy).unwrap() > solve_next(&h, x, y).unwrap());
    }

    #[test]
    fn u_certifies_on_random_specs(eps in 0.001f64..0.5, r in 1u32..4, q in 2i64..20, lo in -1.0f64..1.0, extra in 0.0f64..0.5) {
        let width = 1.0 / q as f64 + extra;
        prop_assume!(width < 1.0);
        let spec = BumpSpec::new(eps, r, 1, q, (lo, lo + width)).unwrap();
        let u = u_bump(&spec).unwrap();
        let cert = certify_u(&spec, &u);
        prop_assert!(cert.passed(), "{cert:?}");
    }

    #[test]
    fn periodic_minimizers_have_their_rotation_symbol(k in 0.0f64..0.9, (p, q) in rational()) {
        let h = StandardMap { k };
        let x = minimal_periodic(&h, p, q).unwrap().config;
        let w = x.window(-3 * q, 3 * q).unwrap();
        prop_assert_eq!(rotation_symbol_of(&w, p, q).unwrap(), RotationSymbol::Rational { p, q });
        let c = Configuration::new(w.offset(), w.entries().to_vec());
        prop_assert!(c.period().is_none());
    }
}
