use num_bigint::BigInt;
use proptest::prelude::*;
use twistcore::aubry::{liouville_partial_sum, ContinuedFraction, Sign};
use twistcore::genfun::{builtin_h0, builtin_h1, check_conditions, SampleGrid};
use twistcore::mather::{plan, plan_destruction, PerturbationPlan, PlanRequest, RationalChoice};
use twistcore::solve::mod1;

fn liouville_plan(h: twistcore::genfun::SharedGenFun, p: i64, q: i64, eps: f64) -> PerturbationPlan {
    let req = PlanRequest {
        epsilon: eps,
        r: 1,
        omega: ContinuedFraction::from_rational(&liouville_partial_sum(3, 10)),
        rational: RationalChoice::Fixed { p, q },
        amplitude_fraction: 1.0,
        window: None,
    };
    plan(h, &req).unwrap()
}

fn in_lifted(t: f64, (a, b): (f64, f64)) -> bool {
    // some integer translate of t lies in [a, b]
    let s = a + mod1(t - a);
    s <= b
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn perturbation_is_supported_in_the_box(x in -2.0f64..2.0, d in -1.5f64..1.5) {
        let plan = liouville_plan(builtin_h0(), 1, 2, 0.1);
        let xp = x + d;
        let k = plan.support;
        let ht = plan.h_tilde_shared();
        let base = builtin_h0();
        // the single translate i meeting x decides x'
        let i = (k.x.0 - x).ceil();
        let inside = in_lifted(x, k.x) && xp + i >= k.x_next.0 && xp + i <= k.x_next.1;
        if !inside {
            prop_assert_eq!(ht.value(x, xp), base.value(x, xp));
        }
    }
}

#[test]
fn liouville_half_plan_layout() {
    let plan = liouville_plan(builtin_h0(), 1, 2, 0.1);
    assert_eq!(plan.sign, Sign::Minus);
    assert_eq!(plan.j(), (0.0, 0.5));
    let (a, b) = plan.j_prime();
    assert!((a - 1.0 / 6.0).abs() < 1e-15 && (b - 1.0 / 3.0).abs() < 1e-15);
    assert!(plan.i_interval.0 > a && plan.i_interval.1 < b);
    assert!(plan.bounds.x_ok() && plan.bounds.image_ok());
    // centre of J against the plateau centre
    let ht = plan.h_prime_shared();
    let diff = ht.value(0.25, 0.75) - builtin_h0().value(0.25, 0.75);
    assert!((diff - plan.u.value(0.25) * plan.v.value(0.75)).abs() < 1e-15);
    assert!(diff > 0.0);
}

#[test]
fn perturbed_functions_keep_the_conditions() {
    for h in [builtin_h0(), builtin_h1()] {
        for (p, q) in [(1, 2), (1, 3)] {
            let plan = liouville_plan(h.clone(), p, q, 0.1);
            let ht = plan.h_tilde_shared();
            let report = check_conditions(ht.as_ref(), &SampleGrid::default(), 10.0);
            assert!(report.all_passed(), "{}", report.to_text());
            assert!(ht.theta().unwrap() <= h.theta().unwrap() + 0.1);
        }
    }
}

#[test]
fn golden_control_plan() {
    // (sqrt 5 - 1) / 2 = [0; 1, 1, 1, ...]
    let mut quotients = vec![BigInt::from(0)];
    quotients.extend(std::iter::repeat(BigInt::from(1)).take(40));
    let plan = plan_destruction(builtin_h0(), &ContinuedFraction::from_quotients(quotients), 0.1, 1, 3).unwrap();
    assert_eq!((plan.p(), plan.q()), (2, 3));
    assert!(plan.norms.h_tilde <= 0.1);
    assert_eq!(plan.sign, Sign::Minus);
}

#[test]
fn zero_budget_leaves_h_unchanged() {
    let plan = liouville_plan(builtin_h1(), 1, 2, 0.0);
    let ht = plan.h_tilde_shared();
    for i in 0..50 {
        let x = i as f64 / 50.0;
        assert_eq!(ht.value(x, x + 0.4), builtin_h1().value(x, x + 0.4));
    }
    assert_eq!(plan.norms.h_tilde, 0.0);
}
