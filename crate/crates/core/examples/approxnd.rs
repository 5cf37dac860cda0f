//! Multivariate assembly from a superposition decomposition.

use euaf::approxnd::{assemble, builtin, NdOptions};

fn main() {
    for (name, d, eps) in [("sum", 2, 0.1), ("product", 2, 0.1), ("sum", 3, 0.1)] {
        let (f, kst) = builtin(name, d, 0.0, 1.0).unwrap();
        let (net, report) = assemble(&f, 0.0, 1.0, &kst, eps, &NdOptions::default()).unwrap();
        println!(
            "{name} d={d}: width {} depth {} nonzero {} (bound {}), sup error {:.4} on {} points",
            net.width(),
            net.depth(),
            report.params.nonzero,
            report.nonzero_bound,
            report.grid_sup_error,
            report.verified_points
        );
    }
}
