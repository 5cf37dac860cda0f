//! Smooth and sigmoidal relatives of σ.

use euaf::activation::euaf as sigma;
use euaf::gadgets::square_net;
use euaf::uaf_variants::{approximate_sigma_by_sigmoidal, compute_c, eval_sigmoidal, eval_smooth, smooth_substitute};

fn main() {
    println!("c = {}", compute_c());
    for x in [-3.0, -0.5, 0.0, 0.5, 1.0, 4.0, 50.0] {
        println!(
            "x={x:5}: σ={:.5} σ̃={:.5} ρ1={:.5} ρ2={:.5}",
            sigma(x),
            eval_sigmoidal(x),
            eval_smooth(1, x).unwrap(),
            eval_smooth(2, x).unwrap()
        );
    }
    let approx = approximate_sigma_by_sigmoidal(2.0, 0.1).unwrap();
    println!(
        "σ by a σ̃ network on [-2,2]: width {} depth {} sup error {:.4} (δ={}, η₀={})",
        approx.network.width(),
        approx.network.depth(),
        approx.sup_error,
        approx.delta,
        approx.eta0
    );
    for s in [1, 2] {
        let r = smooth_substitute(&square_net(), s, 0.01).unwrap();
        println!("square gadget with ρ_{s} finite differences: δ={:e}, sup difference {:.2e}", r.delta, r.sup_diff);
    }
}
