//! Seeded SGD on a 1-D oscillatory target, EUAF against ReLU.

use euaf::activation::ActivationKind;
use euaf::autodiff::{train_toy, TrainConfig, TrainTarget};

fn main() {
    let target = TrainTarget::builtin("osc").unwrap();
    let cfg = TrainConfig::default();
    for act in [ActivationKind::Euaf, ActivationKind::Relu] {
        let r = train_toy(&target, 40, 2, act, &cfg).unwrap();
        println!(
            "{act}: train mse {:.5} -> {:.5}, test mse {:.5}, test max {:.4}",
            r.initial_train_mse, r.final_train_mse, r.final_test.mse, r.final_test.max
        );
    }
}
