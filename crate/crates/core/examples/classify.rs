//! Exact rational labels on separated intervals.

use euaf::classify::{build_classifier, LabeledRegions, Rational, Region};

fn main() {
    let regions = LabeledRegions {
        regions: vec![Region::Intervals(vec![[0.0, 0.3]]), Region::Intervals(vec![[0.5, 1.0]])],
        labels: vec![Rational::new(1, 2), Rational::new(-1, 3)],
        bounding_box: None,
    };
    let report = build_classifier(&regions, 1_000_000_000).unwrap();
    println!("n1 = {}, n2 = {}, width {}, depth {}", report.n1, report.n2, report.width, report.depth);
    for x in [0.0, 0.15, 0.3, 0.5, 0.77, 1.0] {
        println!("  label({x}) = {}", report.network.eval1(x));
    }
    println!("max deviation on samples: {:e}", report.max_deviation_on_samples);
}
