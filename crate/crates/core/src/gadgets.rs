//! Small EUAF networks with exact algebraic behaviour on bounded ranges.
//!
//! All of them rely on two facts: σ is the identity on [0,1], and on (−∞,0]
//! σ(y) + 1 = 1/(1 − y), which turns affine inputs into rational functions
//! that recombine exactly.

use serde::Serialize;
use thiserror::Error;

use crate::activation::ActivationKind::{self, Euaf, Identity};
use crate::network::{AffineLayer, Domain, Network};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GadgetError {
    #[error("invalid gadget parameter: {0}")]
    Parameter(String),
}

fn layer(rows: &[&[f64]], bias: &[f64]) -> AffineLayer {
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    AffineLayer::from_rows(&rows, bias.to_vec()).expect("gadget layers are well formed")
}

fn net(input_dim: usize, layers: Vec<AffineLayer>, acts: Vec<Vec<ActivationKind>>, domain: Option<Domain>) -> Network {
    Network::new(input_dim, layers, acts, domain).expect("gadget networks are well formed")
}

/// x² on [−1, 1]: `12σ(1 − 12σ(−x−1) + 12σ(−x−2)) + 11σ((6−5x)/11)`. Width 3, depth 2.
pub fn square_net() -> Network {
    net(
        1,
        vec![
            layer(&[&[-1.0], &[-1.0], &[-5.0 / 11.0]], &[-1.0, -2.0, 6.0 / 11.0]),
            layer(&[&[-12.0, 12.0, 0.0], &[0.0, 0.0, 1.0]], &[1.0, 0.0]),
            layer(&[&[12.0, 11.0]], &[0.0]),
        ],
        vec![vec![Euaf; 3], vec![Euaf; 2]],
        Some(Domain::interval(-1.0, 1.0)),
    )
}

/// xy on [−M, M]² by polarisation, `2M²(s((x+y)/2M) − s(x/2M) − s(y/2M))`
/// with `s` the square gadget. Width 9, depth 2.
pub fn product_net(m: f64) -> Result<Network, GadgetError> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(GadgetError::Parameter(format!("product bound must be positive, got {m}")));
    }
    let k = 1.0 / (2.0 * m);
    let forms = [[k, k], [k, 0.0], [0.0, k]];
    let signs = [1.0, -1.0, -1.0];
    let mut w1 = Vec::new();
    let mut b1 = Vec::new();
    for f in forms {
        // σ(−u−1), σ(−u−2), σ((6−5u)/11)
        w1.push(vec![-f[0], -f[1]]);
        b1.push(-1.0);
        w1.push(vec![-f[0], -f[1]]);
        b1.push(-2.0);
        w1.push(vec![-5.0 / 11.0 * f[0], -5.0 / 11.0 * f[1]]);
        b1.push(6.0 / 11.0);
    }
    let mut w2 = vec![vec![0.0; 9]; 6];
    let mut b2 = vec![0.0; 6];
    let mut w3 = vec![0.0; 6];
    let scale = 2.0 * m * m;
    for j in 0..3 {
        w2[2 * j][3 * j] = -12.0;
        w2[2 * j][3 * j + 1] = 12.0;
        b2[2 * j] = 1.0;
        w2[2 * j + 1][3 * j + 2] = 1.0;
        w3[2 * j] = 12.0 * scale * signs[j];
        w3[2 * j + 1] = 11.0 * scale * signs[j];
    }
    Ok(net(
        2,
        vec![
            AffineLayer::from_rows(&w1, b1).expect("shape"),
            AffineLayer::from_rows(&w2, b2).expect("shape"),
            AffineLayer::new(6, w3, vec![0.0]).expect("shape"),
        ],
        vec![vec![Euaf; 9], vec![Euaf; 6]],
        Some(Domain::cube(-m, m, 2)),
    ))
}

/// `ψ(2Kx)/2 + 1`, which equals k on `[(2k−2)/2K, (2k−1)/2K]`. One step-tagged neuron.
pub fn step_encode_net(k: usize) -> Result<Network, GadgetError> {
    if k == 0 {
        return Err(GadgetError::Parameter("K must be at least 1".into()));
    }
    Ok(net(
        1,
        vec![layer(&[&[2.0 * k as f64]], &[0.0]), layer(&[&[0.5]], &[1.0])],
        vec![vec![ActivationKind::Step]],
        Some(Domain::interval(0.0, 1.0)),
    ))
}

/// Bump `σ(z+1−σ(z+1))` at `z = 2Kx + i/2`, written as
/// `σ((2K+1)σ((z+1)/(2K+1)) − σ(z+1))` so every hidden value stays bounded.
/// Exact on [0, 9/10] when K ≥ 10. Width 2, depth 2.
pub fn partition_component_net(k: usize, i: usize) -> Result<Network, GadgetError> {
    if k < 10 {
        return Err(GadgetError::Parameter(format!("partition components need K ≥ 10, got {k}")));
    }
    if !(1..=4).contains(&i) {
        return Err(GadgetError::Parameter(format!("component index must be in 1..=4, got {i}")));
    }
    let two_k = 2.0 * k as f64;
    let r = two_k + 1.0;
    let shift = i as f64 / 2.0 + 1.0;
    Ok(net(
        1,
        vec![
            layer(&[&[two_k / r], &[two_k]], &[shift / r, shift]),
            layer(&[&[r, -1.0]], &[0.0]),
            layer(&[&[1.0]], &[0.0]),
        ],
        vec![vec![Euaf; 2], vec![Euaf]],
        Some(Domain::interval(0.0, 0.9)),
    ))
}

/// `φ₂(y) = Mσ(y/M) + 1/2 − σ(y + 3/2)`, exact for y ∈ [0, M]; constant 2k+1
/// on each plateau |y − (2k+1)| ≤ 1/2.
pub fn snap_net(m: f64) -> Result<Network, GadgetError> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(GadgetError::Parameter(format!("snap bound must be positive, got {m}")));
    }
    Ok(net(
        1,
        vec![layer(&[&[1.0 / m], &[1.0]], &[0.0, 1.5]), layer(&[&[m, -1.0]], &[0.5])],
        vec![vec![Euaf; 2]],
        Some(Domain::interval(0.0, m)),
    ))
}

/// Identity on [−M, M] through `depth` width-1 layers, `2Mσ((x+M)/2M) − M`.
pub fn identity_widen_net(m: f64, depth: usize) -> Result<Network, GadgetError> {
    if !(m > 0.0 && m.is_finite()) || depth == 0 {
        return Err(GadgetError::Parameter(format!("need M > 0 and depth ≥ 1, got M={m}, depth={depth}")));
    }
    let base = Network::affine(layer(&[&[1.0]], &[0.0]));
    Ok(base.pad_widen(depth, m - 1.0).with_domain(Some(Domain::interval(-m, m))))
}

#[derive(Debug, Clone, Serialize)]
pub struct MagnitudeReduced {
    pub network: Network,
    /// Every parameter satisfies |p| ≤ c0 · max(√a, √b).
    pub c0: f64,
}

/// `ax + b` on [−R, R] using parameters no larger than `c0·max(√a, √b)`.
///
/// Layer 1 maps x into [0,1] with σ((x+R)/2R); layer 2 carries `√a·x` and the
/// constant `√b` on identity-tagged neurons; the output multiplies both by
/// `√a` and `√b`. Hidden values of a pure EUAF layer are bounded by 1, so the
/// unbounded `√a·x` stage needs the identity tag.
pub fn magnitude_reduced_affine(a: f64, b: f64, range_bound: f64) -> Result<MagnitudeReduced, GadgetError> {
    if !(a >= 1.0 && b >= 1.0) {
        return Err(GadgetError::Parameter(format!("need a, b ≥ 1, got a={a}, b={b}")));
    }
    if !(range_bound > 0.0 && range_bound.is_finite()) {
        return Err(GadgetError::Parameter(format!("range bound must be positive, got {range_bound}")));
    }
    let r = range_bound;
    let (sa, sb) = (a.sqrt(), b.sqrt());
    let network = net(
        1,
        vec![
            layer(&[&[1.0 / (2.0 * r)]], &[0.5]),
            layer(&[&[2.0 * r * sa], &[0.0]], &[-r * sa, sb]),
            layer(&[&[sa, sb]], &[0.0]),
        ],
        vec![vec![Euaf], vec![Identity, Identity]],
        Some(Domain::interval(-r, r)),
    );
    let c0 = 1f64.max(2.0 * r).max(1.0 / (2.0 * r));
    Ok(MagnitudeReduced { network, c0 })
}

/// Largest parameter magnitude in a network.
pub fn max_param_magnitude(net: &Network) -> f64 {
    net.layers()
        .iter()
        .flat_map(|l| l.weights().iter().chain(l.bias()))
        .fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_examples() {
        let n = square_net();
        assert_eq!((n.width(), n.depth()), (3, 2));
        assert_eq!(n.eval1(0.0), 0.0);
        assert!((n.eval1(-1.0) - 1.0).abs() < 1e-14);
        assert!((n.eval1(0.5) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn product_examples() {
        let n = product_net(3.0).unwrap();
        assert_eq!((n.width(), n.depth()), (9, 2));
        assert!((n.eval(&[2.0, 3.0]).unwrap()[0] - 6.0).abs() < 1e-10 * 9.0);
        assert!(n.eval(&[0.0, 2.5]).unwrap()[0].abs() < 1e-12);
        assert!(product_net(0.0).is_err());
    }

    #[test]
    fn step_examples() {
        let n = step_encode_net(5).unwrap();
        assert_eq!((n.width(), n.depth()), (1, 1));
        assert_eq!(n.eval1(0.05), 1.0);
        assert_eq!(n.eval1(0.25), 2.0);
        assert_eq!(step_encode_net(1).unwrap().eval1(0.0), 1.0);
    }

    #[test]
    fn partition_examples() {
        let sum: f64 = (1..=4).map(|i| partition_component_net(10, i).unwrap().eval1(0.37)).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        // 2Kx + i/2 = 3.5 lies in [3, 4], where the bump vanishes
        assert_eq!(partition_component_net(10, 1).unwrap().eval1(0.15), 0.0);
        assert!(partition_component_net(9, 1).is_err());
        assert!(partition_component_net(10, 5).is_err());
    }

    #[test]
    fn snap_examples() {
        let n = snap_net(10.0).unwrap();
        assert!((n.eval1(3.0) - 3.0).abs() < 1e-14);
        assert!((n.eval1(3.5) - 3.0).abs() < 1e-14);
        assert!((n.eval1(4.6) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn widen_examples() {
        let m = 3.0;
        let n = identity_widen_net(m, 4).unwrap();
        assert_eq!((n.width(), n.depth()), (1, 4));
        assert_eq!(n.eval1(0.0), 0.0);
        assert!((n.eval1(m) - m).abs() < 1e-12);
        assert!((n.eval1(-m / 2.0) + m / 2.0).abs() < 1e-12);
    }

    #[test]
    fn magnitude_reduction() {
        let r = magnitude_reduced_affine(1.0, 1.0, 1.0).unwrap();
        assert!(max_param_magnitude(&r.network) <= r.c0);
        let r = magnitude_reduced_affine(1e4, 1.0, 1.0).unwrap();
        assert!((r.network.eval1(0.5) - 5001.0).abs() <= 1e-9 * (1e4 + 1.0));
        assert!(max_param_magnitude(&r.network) <= 100.0 * r.c0);
        assert_eq!(r.network.depth(), 2);
    }
}
