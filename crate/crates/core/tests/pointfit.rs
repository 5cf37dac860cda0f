use euaf::activation::{euaf, triwave};
use euaf::pointfit::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const BUDGET: u64 = 1_000_000_000;

fn recheck(t: &FitTargets, r: &FitResult) {
    for (k, (&xi, &off)) in t.values.iter().zip(&t.offsets).enumerate() {
        let e = (triwave(r.w / (t.alpha + off)) - xi).abs();
        assert_eq!(e, r.per_index_error[k], "index {k}");
    }
}

#[test]
fn recovers_model_generated_target() {
    let t = FitTargets::new(vec![triwave(7.3 / (PI + 1.0))]).unwrap();
    let r = fit(&t, 1e-6, BUDGET).unwrap();
    assert!(r.satisfied && r.max_error < 1e-6);
    recheck(&t, &r);
}

#[test]
fn two_targets_match_brute_force() {
    let t = FitTargets::new(vec![0.3, 0.7]).unwrap();
    let r = fit(&t, 0.05, BUDGET).unwrap();
    assert!(r.satisfied);
    recheck(&t, &r);
    // independent sweep: a witness exists with |w| ≤ 10⁵
    let step = 0.01;
    let found = (0..20_000_000i64).map(|i| -1e5 + step * i as f64).any(|w| {
        (triwave(w / (PI + 1.0)) - 0.3).abs() < 0.05 && (triwave(w / (PI + 2.0)) - 0.7).abs() < 0.05
    });
    assert!(found);
}

#[test]
fn zero_targets_fit_at_zero() {
    let t = FitTargets::new(vec![0.0, 0.0, 0.0]).unwrap();
    let r = fit(&t, 1e-9, BUDGET).unwrap();
    assert!(r.satisfied);
    assert_eq!(r.w, 0.0);
    assert!(r.evaluations <= 1);
}

#[test]
fn random_targets_fit() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let k = rng.gen_range(1..=3);
        let t = FitTargets::new((0..k).map(|_| rng.gen::<f64>()).collect()).unwrap();
        let r = fit(&t, 0.05, BUDGET).unwrap();
        assert!(r.satisfied, "{:?}", t.values);
        assert!(r.max_error < 0.05);
        recheck(&t, &r);
    }
}

#[test]
fn exhausted_budget_reports_best() {
    let t = FitTargets::new(vec![0.1, 0.9, 0.5, 0.3]).unwrap();
    let r = fit(&t, 1e-4, 5).unwrap();
    assert!(!r.satisfied);
    assert!(r.evaluations <= 5);
    recheck(&t, &r);
}

#[test]
fn invalid_inputs() {
    assert!(FitTargets::new(vec![]).is_err());
    assert!(FitTargets::new(vec![1.5]).is_err());
    assert!(FitTargets::with_params(vec![0.5, 0.5], PI, vec![1.0]).is_err());
    let t = FitTargets::new(vec![0.5]).unwrap();
    assert!(fit(&t, 0.0, 10).is_err());
    assert!(fit(&t, 1.0, 10).is_err());
}

#[test]
fn shift_examples() {
    let t = FitTargets::new(vec![0.2, 0.4, 0.6]).unwrap();
    let zero = FitResult { w: 0.0, per_index_error: vec![], max_error: 0.0, evaluations: 0, search_bound_reached: 0.0, satisfied: true };
    assert_eq!(shift_nonneg(&zero, &t).1, 1);
    let neg = FitResult { w: -7.3, ..zero.clone() };
    let (w, m0) = shift_nonneg(&neg, &t);
    for r in [1.0, 2.0, 3.0] {
        assert!(w / (PI + r) + 2.0 * m0 as f64 >= 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let w = rng.gen_range(-1e4..1e4);
        let res = FitResult { w, ..zero.clone() };
        let (w, m0) = shift_nonneg(&res, &t);
        for r in [1.0, 2.0, 3.0] {
            assert!((shifted_value(w, m0, PI, r) - triwave(w / (PI + r))).abs() <= 1e-12 * (1.0 + w.abs()));
            assert!(shifted_value(w, m0, PI, r) == euaf(w / (PI + r) + 2.0 * m0 as f64));
        }
    }
}

#[test]
fn coverage() {
    assert_eq!(winding_coverage(1, 1_000_000, 1e4, PI, &[1.0]).unwrap(), 1.0);
    assert!(winding_coverage(2, 10_000_000, 1e6, PI, &[1.0, 2.0]).unwrap() >= 0.99);
    assert!(winding_coverage(2, 1_000_000, 1e6, PI, &[1.0, 1.0]).unwrap() < 0.2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn deterministic_and_monotone(values in proptest::collection::vec(0.0f64..=1.0, 1..=2), eps in 0.02f64..0.2) {
        let t = FitTargets::new(values).unwrap();
        let a = fit(&t, eps, BUDGET).unwrap();
        let b = fit(&t, eps, BUDGET).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.satisfied);
        let looser = fit(&t, eps * 1.5, BUDGET).unwrap();
        prop_assert!(looser.satisfied);
        recheck(&t, &a);
    }
}
