//! End-to-end activity recognition on the synthetic accelerometer corpus.
//!
//! Set `ESN_DATA_ROOT` and pass `dataset.kind="har"` to use recorded data.
use esn_chip::harness::{run_training, ExperimentConfig};

fn main() -> esn_chip::Result<()> {
    let overrides: Vec<String> = std::env::args().skip(1).collect();
    let cfg = ExperimentConfig::from_toml_str("", &overrides)?;
    let out = run_training(&cfg)?;
    let s = &out.summary;
    println!("train {} / test {} samples, {} inputs, esp_shift {}", s.n_train, s.n_test, s.n_inputs, s.esp_shift);
    println!("accuracy {:.4}, macro F1 {:.4}", s.metrics.accuracy, s.metrics.macro_f1);
    println!("confusion (rows = truth):");
    for row in &s.metrics.confusion {
        println!("  {row:?}");
    }
    println!(
        "{}: {:.0} samples/s, real time: {:?}",
        s.latency.topology, s.latency.samples_per_sec, s.realtime_feasible
    );
    Ok(())
}
