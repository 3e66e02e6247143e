//! Save trained readout weights and load them back bit-exactly.
use esn_chip::harness::{run_training, ExperimentConfig};
use esn_chip::readout::{sidecar_path, Readout};

fn main() -> esn_chip::Result<()> {
    let cfg = ExperimentConfig::from_toml_str("", &["dataset.synthetic_samples_per_subject=4000".into()])?;
    let out = run_training(&cfg)?;
    let dir = std::env::temp_dir().join("esn-chip-snapshot");
    std::fs::create_dir_all(&dir).map_err(|e| esn_chip::Error::Io { path: dir.clone(), source: e })?;
    let path = dir.join("readout.bin");
    out.model.readout.save_snapshot(&path, &serde_json::json!({ "name": cfg.name }))?;
    let (loaded, extra) = Readout::load_snapshot(&path)?;
    println!("wrote {} and {}", path.display(), sidecar_path(&path).display());
    println!("weights identical: {}", loaded.raw_weights() == out.model.readout.raw_weights());
    println!("sidecar payload: {extra}");
    Ok(())
}
