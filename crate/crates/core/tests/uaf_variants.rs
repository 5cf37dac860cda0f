use euaf::activation::{euaf, ActivationKind};
use euaf::approx1d::{build_interval_approx, Approx1DOptions, Target1D};
use euaf::gadgets::square_net;
use euaf::sampling::linspace;
use euaf::uaf_variants::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn away_from_integers(x: f64, gap: f64) -> bool {
    (x - x.round()).abs() >= gap
}

#[test]
fn normalising_constant() {
    let c = compute_c();
    assert!((2.5..=2.6).contains(&c));
    // 50-digit quadrature reference
    assert!((c - 2.553662714850567).abs() < 1e-12, "{c}");
    for cutoff in [1u64 << 12, 1 << 16, 1 << 20] {
        assert!((compute_c_with_cutoff(cutoff) - compute_c_with_cutoff(2 * cutoff)).abs() < 1e-10);
    }
}

#[test]
fn sigmoidal_values_and_limits() {
    assert_eq!(eval_sigmoidal(0.0), 0.0);
    let lo = eval_sigmoidal(-1e6);
    assert!(lo > -1.0 && lo < -0.999998, "{lo}");
    assert!((eval_sigmoidal(1e6) - 1.0).abs() < 1e-5);
    assert_eq!(eval_sigmoidal(-1.0), euaf(-1.0));
    let h = 1e-7;
    assert!(((eval_sigmoidal(h) - eval_sigmoidal(0.0)) / h - 1.0).abs() < 1e-6);
    assert_eq!(ActivationKind::Sigmoidal.slope(0.0), 1.0);
}

#[test]
fn sigmoidal_derivative_formula() {
    let c = compute_c();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    while checked < 500 {
        let x: f64 = rng.gen_range(0.0..40.0);
        if !away_from_integers(x, 1e-3) {
            continue;
        }
        let h = 1e-6;
        let fd = (eval_sigmoidal(x + h) - eval_sigmoidal(x - h)) / (2.0 * h);
        let exact = (c * euaf(x) + 1.0) / (2.0 * x + 1.0).powi(2);
        assert!((fd - exact).abs() <= 1e-6 * exact.abs(), "x={x}: {fd} vs {exact}");
        assert!((ActivationKind::Sigmoidal.slope(x) - exact).abs() <= 1e-12 * exact.abs().max(1.0));
        checked += 1;
    }
}

#[test]
fn smooth_values() {
    assert_eq!(eval_smooth(1, 1.0).unwrap(), 0.5);
    for s in 1..=4 {
        assert_eq!(eval_smooth(s, 0.0).unwrap(), 0.0);
    }
    assert_eq!(eval_smooth(0, 1.5).unwrap(), euaf(1.5));
    assert!(eval_smooth(5, 1.0).is_err());
}

#[test]
fn smooth_derivative_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for s in 1..=3u32 {
        let mut checked = 0;
        while checked < 100 {
            let x: f64 = rng.gen_range(-3.0..3.0);
            if x.abs() < 1e-2 || (s == 1 && !away_from_integers(x, 1e-3)) {
                continue;
            }
            let h = 1e-5;
            let fd = (eval_smooth(s + 1, x + h).unwrap() - eval_smooth(s + 1, x - h).unwrap()) / (2.0 * h);
            let lower = eval_smooth(s, x).unwrap();
            assert!((fd - lower).abs() <= 1e-6 * lower.abs().max(1e-3), "s={s} x={x}: {fd} vs {lower}");
            checked += 1;
        }
    }
}

#[test]
fn exact_approximant_is_accepted_at_once() {
    let r = substitute_activation(&square_net(), |_, z| euaf(z), 0.01).unwrap();
    assert_eq!(r.delta, 1.0);
    assert_eq!(r.sup_diff, 0.0);
}

#[test]
fn difference_quotient_on_the_square() {
    let eps = 0.01;
    let r = substitute_activation(&square_net(), |d, z| smooth_difference(1, d, z), eps).unwrap();
    let sup = linspace(-1.0, 1.0, 10_000).into_iter().map(|x| (r.eval(&[x])[0] - x * x).abs()).fold(0.0, f64::max);
    assert!(sup < eps, "{sup}");
}

#[test]
fn smooth_network_shape() {
    for s in 1..=3 {
        let net = smooth_network(&square_net(), s, 1e-3).unwrap();
        assert_eq!(net.width(), 2 * s as usize * 3);
        assert_eq!(net.depth(), 2);
    }
    for s in 1..=2 {
        let r = smooth_substitute(&square_net(), s, 0.01).unwrap();
        let sup = linspace(-1.0, 1.0, 10_000).into_iter().map(|x| (r.network.eval1(x) - x * x).abs()).fold(0.0, f64::max);
        assert!(sup < 0.01, "s={s}: {sup}");
    }
}

#[test]
fn smooth_substitution_keeps_a_region_approximator_accurate() {
    let f = |x: f64| (3.0 * x).sin();
    let eps = 0.3;
    let base = build_interval_approx(&Target1D::unit(f), eps, &Approx1DOptions::default()).unwrap();
    let r = smooth_substitute(&base.network, 1, 2.0 * (eps - base.grid_sup_error) * 0.99).unwrap();
    assert_eq!((r.network.width(), r.network.depth()), (2 * 36, 5));
    let sup = linspace(0.0, 1.0, 10_000).into_iter().map(|x| (r.network.eval1(x) - f(x)).abs()).fold(0.0, f64::max);
    assert!(sup < eps, "{sup}");
}

#[test]
fn sigmoidal_square_and_product() {
    let sq = sigmoidal_square_net();
    let sup = linspace(-4.0, 4.0, 10_000).into_iter().map(|x| (sq.eval1(x) - x * x).abs()).fold(0.0, f64::max);
    assert!(sup <= 1e-9, "{sup}");
    let p = sigmoidal_product_net(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let (x, y) = (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
        assert!((p.eval(&[x, y]).unwrap()[0] - x * y).abs() <= 1e-8);
    }
}

#[test]
fn sigma_from_sigmoidal_network() {
    let a = approximate_sigma_by_sigmoidal(2.0, 0.1).unwrap();
    assert_eq!((a.network.width(), a.network.depth()), (50, 6));
    let sup = linspace(-2.0, 2.0, 10_000).into_iter().map(|x| (a.network.eval1(x) - euaf(x)).abs()).fold(0.0, f64::max);
    assert!(sup < 0.1, "{sup}");
    assert!((a.network.eval1(-1.0) + 0.5).abs() < 0.1);
    assert!(approximate_sigma_by_sigmoidal(1.0, 0.1).is_err());
}

proptest! {
    #[test]
    fn sigmoidal_strictly_increasing(x in -1e6f64..1e6, dx in 1e-3f64..10.0) {
        prop_assert!(eval_sigmoidal(x + dx) > eval_sigmoidal(x));
    }

    #[test]
    fn sigmoidal_bounded(x in -1e6f64..=1e6) {
        let v = eval_sigmoidal(x);
        prop_assert!(v > -1.0 && v < 1.0);
    }
}
