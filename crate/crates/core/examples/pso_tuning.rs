//! Particle-swarm search: a closed-form objective, then a small tuning run.
use esn_chip::harness::pso::{optimize, Dimension, PsoConfig, PsoParams};
use esn_chip::harness::{load_dataset, pso_tune, ExperimentConfig};

fn main() -> esn_chip::Result<()> {
    let params = PsoParams {
        iterations: 100,
        ..PsoParams::default()
    };
    let r = optimize(&[Dimension::real(-10.0, 10.0)], &params, |p| -(p[0] - 3.0).powi(2))?;
    println!("argmax of -(p-3)^2: {:.5} after {} evaluations", r.best_position[0], r.evaluations);

    let base = ExperimentConfig::from_toml_str("", &["dataset.synthetic_samples_per_subject=2000".into()])?;
    let pcfg = PsoConfig {
        particles: 6,
        iterations: 3,
        n_r: (32, 128),
        ..PsoConfig::default()
    };
    let raw = load_dataset(&base)?;
    let tuned = pso_tune(&pcfg, &base, &raw)?;
    let b = &tuned.best;
    println!(
        "best: delta {:.3}, alpha_shift {}, n_r {}, sparsity {:.3} -> validation accuracy {:.4}",
        b.reservoir.delta, b.readout.alpha_shift, b.reservoir.n_r, b.reservoir.sparsity, tuned.validation_accuracy
    );
    Ok(())
}
