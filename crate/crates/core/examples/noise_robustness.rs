//! Accuracy of a trained model as the test inputs get noisier.
use esn_chip::analysis::NoiseKind;
use esn_chip::harness::studies::noise_sweep;
use esn_chip::harness::{load_dataset, run_training_on, ExperimentConfig};

fn main() -> esn_chip::Result<()> {
    let cfg = ExperimentConfig::from_toml_str("", &["dataset.synthetic_samples_per_subject=8000".into()])?;
    let raw = load_dataset(&cfg)?;
    let out = run_training_on(&cfg, &raw)?;
    let snrs = [f64::INFINITY, 40.0, 30.0, 26.0, 20.0, 15.0, 10.0];
    let points = noise_sweep(&cfg, &raw, &out.model, &[NoiseKind::Gaussian, NoiseKind::Uniform], &snrs)?;
    for p in points {
        let snr = p.snr_db.map_or("clean".to_string(), |s| format!("{s} dB"));
        println!("{:?} {snr:>8}: accuracy {:.4}", p.kind, p.accuracy);
    }
    Ok(())
}
