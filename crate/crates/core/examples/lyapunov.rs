//! Largest Lyapunov exponent from nearest-neighbour divergence.
use esn_chip::analysis::{lyapunov_exponent, LyapunovConfig};
use esn_chip::harness::studies::lyapunov_study;
use esn_chip::harness::{run_training, ExperimentConfig};

fn main() -> esn_chip::Result<()> {
    // closed form: x = c·u gives λ = k·N·ln c, which is ln c for the default k = 1/N
    let u: Vec<Vec<f64>> = (0..40).map(|t| vec![(t as f64 * 0.31).sin(), t as f64 * 0.01]).collect();
    for c in [1.0, 2.0, 0.5] {
        let x: Vec<Vec<f64>> = u.iter().map(|v| v.iter().map(|a| a * c).collect()).collect();
        let r = lyapunov_exponent(&u, &x, &LyapunovConfig::default())?;
        println!("scale {c}: lambda {:+.6} (expected {:+.6})", r.lambda, r.k * u.len() as f64 * c.ln());
    }

    let cfg = ExperimentConfig::from_toml_str("", &["dataset.synthetic_samples_per_subject=6000".into()])?;
    let out = run_training(&cfg)?;
    let rep = lyapunov_study(&out.model, &out.prepared, 1500)?;
    println!(
        "trained reservoir over {} samples: fixed point {:+.5}, float {:+.5}",
        rep.samples, rep.quantized.lambda, rep.reference.lambda
    );
    Ok(())
}
