use euaf::activation::ActivationKind;
use euaf::classify::*;
use proptest::prelude::*;
use std::sync::OnceLock;

const BUDGET: u64 = 1_000_000_000;

fn two_intervals() -> LabeledRegions {
    LabeledRegions {
        regions: vec![Region::Intervals(vec![[0.0, 0.3]]), Region::Intervals(vec![[0.5, 0.8]])],
        labels: vec![Rational::new(1, 2), Rational::new(-1, 3)],
        bounding_box: None,
    }
}

fn built() -> &'static ClassifyReport {
    static R: OnceLock<ClassifyReport> = OnceLock::new();
    R.get_or_init(|| build_classifier(&two_intervals(), BUDGET).unwrap())
}

#[test]
fn extension_values() {
    let one = LabeledRegions { regions: vec![Region::Intervals(vec![[0.0, 1.0]])], labels: vec![Rational::new(1, 1)], bounding_box: None };
    let g = continuous_extension(&one).unwrap();
    assert_eq!(g(&[0.3]), 1.0);

    let pair = LabeledRegions {
        regions: vec![Region::Intervals(vec![[0.0, 0.3]]), Region::Intervals(vec![[0.5, 0.8]])],
        labels: vec![Rational::new(1, 1), Rational::new(0, 1)],
        bounding_box: None,
    };
    let g = continuous_extension(&pair).unwrap();
    assert!((g(&[0.4]) - 0.5).abs() < 1e-12);
    for r in [&two_intervals()] {
        let g = continuous_extension(r).unwrap();
        for (region, label) in r.regions.iter().zip(&r.labels) {
            for x in region.samples(1000) {
                assert_eq!(g(&x), label.value());
            }
        }
    }
}

#[test]
fn integer_choice() {
    assert_eq!(choose_integers(&[Rational::new(1, 1), Rational::new(0, 1)], [0.0, 1.0]).unwrap(), (1, 1));
    let (n1, n2) = choose_integers(&[Rational::new(1, 2), Rational::new(-1, 3)], [-1.0 / 3.0, 0.5]).unwrap();
    assert_eq!(n1, 6);
    assert!(n2 >= 3);
    assert_eq!(choose_integers(&[Rational::new(0, 1)], [0.0, 0.0]).unwrap(), (1, 1));
}

#[test]
fn labels_reproduced() {
    let r = built();
    assert_eq!(r.depth, 12);
    assert_eq!(r.width, 108);
    assert_eq!((r.network.width(), r.network.depth()), (108, 12));
    assert!(r.params.nonzero <= 33_054);
    for (region, label) in two_intervals().regions.iter().zip(&two_intervals().labels) {
        for x in region.samples(1000) {
            assert!((r.network.eval(&x).unwrap()[0] - label.value()).abs() <= 1e-9);
        }
    }
}

#[test]
fn constant_on_members_and_odd_integers() {
    let r = built();
    for region in &two_intervals().regions {
        let snapped: Vec<f64> = region
            .samples(1000)
            .iter()
            .map(|x| ActivationKind::Snap.apply(r.stage_one.eval(x).unwrap()[0]))
            .collect();
        let lo = snapped.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = snapped.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(hi - lo <= 1e-12);
        let outputs: Vec<f64> = region.samples(1000).iter().map(|x| r.network.eval(x).unwrap()[0]).collect();
        for v in outputs {
            let odd = v * 2.0 * r.n1 as f64 + 2.0 * r.n2 as f64 + 1.0;
            assert!((odd - odd.round()).abs() <= 1e-9);
            assert_eq!(odd.round().rem_euclid(2.0), 1.0);
        }
    }
}

#[test]
fn plateau_robustness() {
    let r = built();
    let slack = 0.5 - r.stage_one_error;
    assert!(slack > 0.0);
    for (region, label) in two_intervals().regions.iter().zip(&two_intervals().labels) {
        for x in region.samples(200) {
            let y = r.stage_one.eval(&x).unwrap()[0];
            for t in [-1.0, -0.7, -0.3, 0.0, 0.4, 0.9, 1.0] {
                let v = snap_label(y + t * slack * 0.999, r.snap_m, r.n1, r.n2);
                assert!((v - label.value()).abs() <= 1e-9, "x={x:?} shift {t}: {v}");
            }
        }
    }
}

#[test]
fn single_region() {
    let one = LabeledRegions { regions: vec![Region::Intervals(vec![[0.2, 0.6]])], labels: vec![Rational::new(7, 1)], bounding_box: None };
    let r = build_classifier(&one, BUDGET).unwrap();
    for x in one.regions[0].samples(1000) {
        assert!((r.network.eval(&x).unwrap()[0] - 7.0).abs() <= 1e-9);
    }
}

#[test]
fn validation() {
    let mut bad = two_intervals();
    bad.regions[1] = Region::Intervals(vec![[0.2, 0.8]]);
    assert!(matches!(build_classifier(&bad, BUDGET), Err(ClassifyError::Validation(_))));
    let mut bad = two_intervals();
    bad.labels.pop();
    assert!(matches!(bad.validate(), Err(ClassifyError::Validation(_))));
    let mut bad = two_intervals();
    bad.labels[0] = Rational { num: 1, den: 0 };
    assert!(bad.validate().is_err());
    let points = LabeledRegions { regions: vec![Region::Points(vec![vec![0.1, 0.2]])], labels: vec![Rational::new(1, 1)], bounding_box: None };
    assert!(matches!(build_classifier(&points, BUDGET), Err(ClassifyError::Unsupported(_))));
}

#[test]
fn json_format() {
    let text = r#"{"regions":[{"intervals":[[0.0,0.3]]},{"intervals":[[0.5,0.8]]}],"labels":[{"num":1,"den":2},{"num":-1,"den":3}]}"#;
    let parsed: LabeledRegions = serde_json::from_str(text).unwrap();
    assert_eq!(parsed, two_intervals());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn integers_make_labels_positive(nums in proptest::collection::vec(-5i64..=5, 1..4), dens in proptest::collection::vec(1i64..=6, 4)) {
        let labels: Vec<Rational> = nums.iter().zip(&dens).map(|(n, d)| Rational::new(*n, *d)).collect();
        let lo = labels.iter().map(|l| l.value()).fold(0.0f64, f64::min) * 2.0;
        let hi = labels.iter().map(|l| l.value()).fold(0.0f64, f64::max) * 2.0;
        let (n1, n2) = choose_integers(&labels, [lo, hi]).unwrap();
        for l in &labels {
            let v = n1 as f64 * l.value() + n2 as f64;
            prop_assert!((v - v.round()).abs() < 1e-9 && v.round() >= 1.0);
        }
        prop_assert!(n1 as f64 * lo + n2 as f64 >= 0.0);
    }
}
