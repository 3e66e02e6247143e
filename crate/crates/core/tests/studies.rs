//! Accuracy trends over seeds on the full synthetic corpus.
mod common;

use esn_chip::harness::{load_dataset, run_training_on};

fn mean_accuracy(overrides: &[&str]) -> f64 {
    let mut total = 0.0;
    for seed in 1..=5 {
        let s = format!("global_seed={seed}");
        let mut o = overrides.to_vec();
        o.push(&s);
        let cfg = common::flagship(&o);
        let raw = load_dataset(&cfg).unwrap();
        total += run_training_on(&cfg, &raw).unwrap().summary.metrics.accuracy;
    }
    total / 5.0
}

#[test]
fn larger_reservoirs_are_not_worse() {
    let acc: Vec<f64> = ["32", "64", "128"]
        .iter()
        .map(|n| mean_accuracy(&[&format!("reservoir.n_r={n}")]))
        .collect();
    assert!(acc[0] <= acc[1] && acc[1] <= acc[2], "{acc:?}");
}

#[test]
fn filters_help_small_reservoirs() {
    let filtered = mean_accuracy(&["reservoir.n_r=32", "filters=\"concat\""]);
    let raw = mean_accuracy(&["reservoir.n_r=32", "filters=\"none\""]);
    assert!(filtered >= raw, "filtered {filtered} < unfiltered {raw}");
}
