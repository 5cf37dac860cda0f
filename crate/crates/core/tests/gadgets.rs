use euaf::activation::{bump, ActivationKind};
use euaf::gadgets::*;
use euaf::sampling::linspace;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn square_is_exact() {
    let net = square_net();
    assert_eq!((net.width(), net.depth()), (3, 2));
    assert_eq!(net.eval1(0.0), 0.0);
    assert!((net.eval1(-1.0) - 1.0).abs() <= 1e-12);
    let sup = linspace(-1.0, 1.0, 10_000).into_iter().map(|x| (net.eval1(x) - x * x).abs()).fold(0.0, f64::max);
    assert!(sup <= 1e-12, "{sup}");
}

#[test]
fn product_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for m in [1.0, 10.0, 100.0] {
        let net = product_net(m).unwrap();
        assert_eq!((net.width(), net.depth()), (9, 2));
        let mut sup = 0.0f64;
        for _ in 0..10_000 {
            let (x, y) = (rng.gen_range(-m..=m), rng.gen_range(-m..=m));
            sup = sup.max((net.eval(&[x, y]).unwrap()[0] - x * y).abs());
        }
        assert!(sup <= 1e-10 * m * m, "M={m}: {sup}");
        assert!(net.eval(&[0.0, 0.7 * m]).unwrap()[0].abs() <= 1e-12 * m * m);
    }
    assert!((product_net(3.0).unwrap().eval(&[2.0, 3.0]).unwrap()[0] - 6.0).abs() < 1e-12);
}

#[test]
fn step_encoding() {
    let net = step_encode_net(5).unwrap();
    assert_eq!(net.eval1(0.05), 1.0);
    assert_eq!(net.eval1(0.25), 2.0);
    assert_eq!(step_encode_net(1).unwrap().eval1(0.0), 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k_total in [1usize, 5, 50] {
        let net = step_encode_net(k_total).unwrap();
        let kf = k_total as f64;
        for k in 1..=k_total {
            let (lo, hi) = ((k as f64 - 1.0) / kf, (2.0 * k as f64 - 1.0) / (2.0 * kf));
            for _ in 0..100 {
                let v = net.eval1(rng.gen_range(lo..=hi));
                assert_eq!(v.round() as usize, k);
                assert!((v - k as f64).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn partition_of_unity() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10_000 {
        let x: f64 = rng.gen_range(0.0..100.0);
        let s: f64 = (1..=4).map(|i| bump(x + i as f64 / 2.0)).sum();
        assert!((s - 1.0).abs() <= 1e-12, "x={x}: {s}");
    }
    let parts: Vec<_> = (1..=4).map(|i| partition_component_net(10, i).unwrap()).collect();
    let total: f64 = parts.iter().map(|p| p.eval1(0.37)).sum();
    assert!((total - 1.0).abs() <= 1e-12);
    for (i, p) in parts.iter().enumerate() {
        for x in linspace(0.0, 0.9, 10_000) {
            let v = p.eval1(x);
            assert!((-1e-12..=1.0 + 1e-12).contains(&v));
            let z = 20.0 * x + (i + 1) as f64 / 2.0;
            if z.rem_euclid(2.0) >= 1.0 {
                assert!(v.abs() <= 1e-12, "component {} at {x}", i + 1);
            }
        }
    }
}

#[test]
fn snapping() {
    let net = snap_net(10.0).unwrap();
    assert!((net.eval1(3.0) - 3.0).abs() <= 1e-12);
    assert!((net.eval1(3.5) - 3.0).abs() <= 1e-12);
    assert!((net.eval1(4.6) - 5.0).abs() <= 1e-12);
    for k in 0..4 {
        for y in linspace(2.0 * k as f64 + 0.5, 2.0 * k as f64 + 1.5, 101) {
            let once = ActivationKind::Snap.apply(y);
            assert_eq!(ActivationKind::Snap.apply(once), once);
            assert!((net.eval1(net.eval1(y)) - net.eval1(y)).abs() <= 1e-12);
        }
    }
}

#[test]
fn identity_widening() {
    for m in [0.5, 1.0, 7.0] {
        let net = identity_widen_net(m, 4).unwrap();
        assert_eq!(net.depth(), 4);
        assert_eq!(net.eval1(0.0), 0.0);
        assert!((net.eval1(m) - m).abs() <= 1e-12 * m);
        assert!((net.eval1(-m / 2.0) + m / 2.0).abs() <= 1e-12 * m);
    }
}

#[test]
fn magnitude_reduction() {
    let small = magnitude_reduced_affine(1.0, 1.0, 1.0).unwrap();
    assert!(max_param_magnitude(&small.network) <= small.c0);
    let big = magnitude_reduced_affine(1e4, 1.0, 1.0).unwrap();
    assert!((big.network.eval1(0.5) - 5001.0).abs() <= 1e-9);
    assert!(max_param_magnitude(&big.network) <= 100.0 * big.c0);
    assert!(magnitude_reduced_affine(0.5, 1.0, 1.0).is_err());
}

#[test]
fn parameter_checks() {
    assert!(product_net(0.0).is_err());
    assert!(step_encode_net(0).is_err());
    assert!(partition_component_net(9, 1).is_err());
    assert!(partition_component_net(10, 5).is_err());
    assert!(snap_net(f64::NAN).is_err());
    assert!(identity_widen_net(1.0, 0).is_err());
}

proptest! {
    #[test]
    fn snap_constant_on_plateaus(k in 0u32..40, t in -0.5f64..=0.5) {
        let centre = 2.0 * k as f64 + 1.0;
        let net = snap_net(100.0).unwrap();
        let y = centre + t;
        prop_assume!(y >= 0.0);
        prop_assert!((net.eval1(y) - centre).abs() <= 1e-12);
    }

    #[test]
    fn magnitude_reduced_matches_affine(a in 1.0f64..1e6, b in 1.0f64..1e6, x in -2.0f64..2.0) {
        let r = magnitude_reduced_affine(a, b, 2.0).unwrap();
        let want = a * x + b;
        prop_assert!((r.network.eval1(x) - want).abs() <= 1e-9 * (a.abs() * 2.0 + b));
        prop_assert!(max_param_magnitude(&r.network) <= r.c0 * a.sqrt().max(b.sqrt()) * (1.0 + 1e-12));
    }
}
