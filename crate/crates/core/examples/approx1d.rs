//! Width-36 depth-5 approximators of one-variable functions.

use euaf::approx1d::{build_interval_approx, Approx1DOptions, Target1D};

type Case = (&'static str, fn(f64) -> f64, f64, f64);

fn main() {
    let cases: [Case; 3] = [
        ("sin(3x) on [0,1]", |x| (3.0 * x).sin(), 0.0, 1.0),
        ("0.6 sin 8x + 0.4 sin 16x on [0,1]", |x| 0.6 * (8.0 * x).sin() + 0.4 * (16.0 * x).sin(), 0.0, 1.0),
        ("exp(x) on [-1,1]", f64::exp, -1.0, 1.0),
    ];
    for (name, f, a, b) in cases {
        let target = Target1D::new(f, a, b).unwrap();
        for eps in [0.3, 0.2] {
            let r = build_interval_approx(&target, eps, &Approx1DOptions::default()).unwrap();
            println!(
                "{name:36} ε={eps:<4} K={:<3} width {} depth {} sup error {:.4} ({} windows)",
                r.k, r.width, r.depth, r.grid_sup_error, r.pointfit_evaluations
            );
        }
    }
}
