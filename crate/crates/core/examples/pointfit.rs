//! One scalar w placing the winding curve near prescribed values.

use euaf::pointfit::{fit, shift_nonneg, shifted_value, winding_coverage, FitTargets};

fn main() {
    let targets = FitTargets::new(vec![0.12, 0.85, 0.4]).unwrap();
    let result = fit(&targets, 0.02, 1_000_000_000).unwrap();
    println!("w = {} after {} windows, max error {:.4}", result.w, result.evaluations, result.max_error);
    let (w, m0) = shift_nonneg(&result, &targets);
    for (k, xi) in targets.values.iter().enumerate() {
        let r = targets.offsets[k];
        println!("  k={} target {xi:.3} realised {:.4}", k + 1, shifted_value(w, m0, targets.alpha, r));
    }
    let cover = winding_coverage(2, 1_000_000, 1e5, std::f64::consts::PI, &[1.0, 2.0]).unwrap();
    println!("coverage of [0,1]^2 cells by 10^6 winding samples: {cover:.4}");
}
