use euaf::activation::ActivationKind;
use euaf::autodiff::init_network;
use euaf::gadgets::{identity_widen_net, partition_component_net, snap_net, square_net};
use euaf::{AffineLayer, Branch, Domain, Network, NetworkError};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_net(rng: &mut ChaCha8Rng, input: usize, output: usize) -> Network {
    let depth = rng.gen_range(1..=4);
    let mut layers = Vec::new();
    let mut acts = Vec::new();
    let mut cols = input;
    for l in 0..=depth {
        let rows = if l == depth { output } else { rng.gen_range(1..=8) };
        let w = (0..rows * cols).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b = (0..rows).map(|_| rng.gen_range(-1.0..1.0)).collect();
        layers.push(AffineLayer::new(cols, w, b).unwrap());
        if l < depth {
            acts.push(vec![ActivationKind::Euaf; rows]);
        }
        cols = rows;
    }
    Network::new(input, layers, acts, None).unwrap()
}

#[test]
fn affine_only_eval() {
    let net = Network::affine(AffineLayer::new(1, vec![2.0], vec![1.0]).unwrap());
    assert_eq!(net.eval(&[3.0]).unwrap(), vec![7.0]);
}

#[test]
fn identity_widening_and_square_values() {
    assert!((identity_widen_net(1.0, 1).unwrap().eval1(0.4) - 0.4).abs() < 1e-15);
    assert!((square_net().eval1(0.5) - 0.25).abs() < 1e-12);
}

#[test]
fn composing_affines_fuses() {
    let a = Network::affine(AffineLayer::new(1, vec![2.0], vec![1.0]).unwrap());
    let b = Network::affine(AffineLayer::new(1, vec![-3.0], vec![0.5]).unwrap());
    let c = Network::compose(&a, &b).unwrap();
    assert_eq!(c.depth(), 0);
    assert_eq!(c.layers().len(), 1);
    assert_eq!(c.eval1(1.0), 2.0 * (-3.0 + 0.5) + 1.0);
}

#[test]
fn composition_is_sequential_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let inner = random_net(&mut rng, 2, 3);
        let outer = random_net(&mut rng, 3, 1);
        let both = Network::compose(&outer, &inner).unwrap();
        assert_eq!(both.depth(), outer.depth() + inner.depth());
        for _ in 0..1000 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let seq = outer.eval(&inner.eval(&x).unwrap()).unwrap()[0];
            assert!((both.eval(&x).unwrap()[0] - seq).abs() <= 1e-12 * seq.abs().max(1.0));
        }
    }
}

#[test]
fn junction_composition_adds_a_layer() {
    let inner = init_network(1, 5, 10, ActivationKind::Euaf, &mut ChaCha8Rng::seed_from_u64(1));
    let outer = snap_net(10.0).unwrap();
    let c = Network::compose_with_junction(&outer, &inner, ActivationKind::Identity).unwrap();
    assert_eq!(c.depth(), 12);
}

#[test]
fn mismatched_composition_is_rejected() {
    let two_in = init_network(2, 3, 1, ActivationKind::Euaf, &mut ChaCha8Rng::seed_from_u64(3));
    assert!(matches!(Network::compose(&two_in, &square_net()), Err(NetworkError::Mismatch(_))));
}

#[test]
fn parallel_widths_add() {
    let a = partition_component_net(10, 1).unwrap();
    let b = partition_component_net(10, 2).unwrap();
    let p = Network::parallel(&[Branch::new(&a), Branch::new(&b)], false).unwrap();
    assert_eq!(p.width(), 4);
    assert_eq!(p.depth(), 2);
    assert_eq!(p.output_dim(), 2);
}

#[test]
fn padding_preserves_values() {
    let sq = square_net();
    let padded = sq.pad_widen(3, 1.0);
    assert_eq!(padded.depth(), 5);
    for i in 0..=2000 {
        let x = -1.0 + i as f64 / 1000.0;
        assert!((padded.eval1(x) - sq.eval1(x)).abs() <= 1e-12);
    }
    let deep = Network::parallel(&[Branch::bounded(&sq, 1.0), Branch::new(&padded)], true).unwrap();
    assert_eq!(deep.depth(), 5);
    for i in 0..=200 {
        let x = -1.0 + i as f64 / 100.0;
        let v = deep.eval(&[x]).unwrap();
        assert!((v[0] - sq.eval1(x)).abs() <= 1e-12);
    }
}

#[test]
fn weighted_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g1 = random_net(&mut rng, 1, 1);
    let g2 = random_net(&mut rng, 1, 1);
    let single = Network::sum(&[Branch::new(&g1)], &[1.0]).unwrap();
    let pair = Network::sum(&[Branch::new(&g1), Branch::new(&g2)], &[2.0, -3.0]);
    for _ in 0..100 {
        let x = rng.gen_range(-1.0..1.0);
        assert!((single.eval1(x) - g1.eval1(x)).abs() <= 1e-12);
        if let Ok(p) = &pair {
            let want = 2.0 * g1.eval1(x) - 3.0 * g2.eval1(x);
            assert!((p.eval1(x) - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }
    if g1.depth() == g2.depth() {
        assert!(pair.is_ok());
    }
}

#[test]
fn closed_form_parameter_count() {
    // uniform width N, depth L, input d: dN + N + (N² + N)(L − 1) + N + 1
    let net = init_network(1, 108, 11, ActivationKind::Euaf, &mut ChaCha8Rng::seed_from_u64(0));
    assert_eq!(net.count_params().total, 118_045);
    for (d, n, l) in [(1, 3, 2), (2, 7, 3), (3, 5, 4)] {
        let net = init_network(d, n, l, ActivationKind::Relu, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(net.count_params().total, d * n + n + (n * n + n) * (l - 1) + n + 1);
    }
    let zero = Network::affine(AffineLayer::new(3, vec![0.0; 6], vec![0.0; 2]).unwrap());
    assert_eq!(zero.count_params().nonzero, 0);
}

#[test]
fn json_round_trip_and_rejection() {
    let sq = square_net();
    assert_eq!(Network::from_json(&sq.to_json().unwrap()).unwrap(), sq);
    let bad = r#"{"input_dim":1,"domain":null,"layers":[
        {"weights":[[1.0],[2.0]],"bias":[0.0,0.0],"activations":["euaf","euaf"]},
        {"weights":[[1.0,2.0,3.0]],"bias":[0.0],"activations":null}]}"#;
    let err = Network::from_json(bad).unwrap_err();
    assert!(err.to_string().contains("layer 1"), "{err}");
}

#[test]
fn json_field_names() {
    let net = snap_net(2.0).unwrap().with_domain(Some(Domain::interval(0.0, 2.0)));
    let v: serde_json::Value = serde_json::from_str(&net.to_json().unwrap()).unwrap();
    assert_eq!(v["input_dim"], 1);
    assert_eq!(v["domain"]["lo"][0], 0.0);
    assert_eq!(v["layers"][0]["activations"][0], "euaf");
    assert!(v["layers"][1]["activations"].is_null());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn random_networks_round_trip_bitwise(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (input, output) = (rng.gen_range(1..=4), rng.gen_range(1..=3));
        let net = random_net(&mut rng, input, output);
        let back = Network::from_json(&net.to_json().unwrap()).unwrap();
        for (a, b) in net.layers().iter().zip(back.layers()) {
            prop_assert!(a.weights().iter().zip(b.weights()).all(|(x, y)| x.to_bits() == y.to_bits()));
            prop_assert!(a.bias().iter().zip(b.bias()).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        prop_assert_eq!(back, net);
    }
}
