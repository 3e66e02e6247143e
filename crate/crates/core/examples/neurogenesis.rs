//! Grow a trained model by adding neurons without discarding learned weights.
use esn_chip::harness::{run_training, ExperimentConfig};

fn main() -> esn_chip::Result<()> {
    let cfg = ExperimentConfig::from_toml_str(
        "",
        &["reservoir.n_r=32".into(), "dataset.synthetic_samples_per_subject=6000".into()],
    )?;
    let out = run_training(&cfg)?;
    let mut model = out.model;
    println!("n_r 32: accuracy {:.4}", out.summary.metrics.accuracy);

    model.reservoir.grow(32);
    model.readout.grow(32);
    println!("grown to n_r {}: accuracy before retraining {:.4}", model.reservoir.n_r(), model.evaluate(&out.prepared.test)?.accuracy);
    model.train_epoch(&out.prepared.train, |_, _| {})?;
    println!("after one more epoch: accuracy {:.4}", model.evaluate(&out.prepared.test)?.accuracy);
    Ok(())
}
