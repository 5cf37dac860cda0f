//! Exact gadgets: square, product, snapping and the partition of unity.

use euaf::activation::ActivationKind;
use euaf::gadgets::{partition_component_net, product_net, snap_net, square_net};
use euaf::sampling::linspace;

fn main() {
    let sq = square_net();
    let sq_err = linspace(-1.0, 1.0, 10_000).into_iter().map(|x| (sq.eval1(x) - x * x).abs()).fold(0.0, f64::max);
    println!("square: width {} depth {} max error {sq_err:e}", sq.width(), sq.depth());

    let prod = product_net(3.0).unwrap();
    let (x, y) = (2.5, -1.75);
    println!("product on [-3,3]^2: {x}·{y} = {}", prod.eval(&[x, y]).unwrap()[0]);

    let snap = snap_net(20.0).unwrap();
    for y in [4.6, 5.0, 5.4, 10.9] {
        println!("snap({y}) = {} (φ₂ = {})", snap.eval1(y), ActivationKind::Snap.apply(y));
    }

    let k = 10;
    let parts: Vec<_> = (1..=4).map(|i| partition_component_net(k, i).unwrap()).collect();
    let worst = linspace(0.0, 0.9, 5_000)
        .into_iter()
        .map(|x| (parts.iter().map(|p| p.eval1(x)).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    println!("partition of unity at K = {k}: max |Σψ − 1| = {worst:e}");
}
