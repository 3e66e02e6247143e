//! Prosthetic finger control on the synthetic two-channel EMG corpus.
use esn_chip::harness::{run_training, ExperimentConfig};

fn main() -> esn_chip::Result<()> {
    let cfg = ExperimentConfig::from_toml_str(
        "name = \"pfc\"\n[dataset]\nkind = \"synthetic-pfc\"\n",
        &[],
    )?;
    let out = run_training(&cfg)?;
    let s = &out.summary;
    println!("EMG at 4 kHz: train {} / test {}", s.n_train, s.n_test);
    println!("accuracy {:.4}, macro F1 {:.4}", s.metrics.accuracy, s.metrics.macro_f1);
    println!(
        "{:.0} samples/s needed, {:.0} available: real time {:?}",
        out.prepared.sample_rate.unwrap_or(0.0),
        s.latency.samples_per_sec,
        s.realtime_feasible
    );
    Ok(())
}
