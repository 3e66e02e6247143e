//! Drive a fixed-point reservoir and watch two trajectories forget their start.
use esn_chip::reservoir::SIGNAL;
use esn_chip::{FxValue, Reservoir, ReservoirConfig, WeightMode};

fn main() -> esn_chip::Result<()> {
    let cfg = ReservoirConfig {
        n_i: 2,
        n_r: 64,
        ..ReservoirConfig::default()
    };
    let mut a = Reservoir::new(cfg.clone(), WeightMode::Cached)?;
    let mut b = Reservoir::new(cfg, WeightMode::Streaming)?;
    b.set_state(&vec![FxValue::quantize(0.9, SIGNAL); 64])?;

    for t in 0..300 {
        let u = [
            FxValue::quantize((t as f64 * 0.1).sin(), SIGNAL),
            FxValue::quantize((t as f64 * 0.037).cos(), SIGNAL),
        ];
        let xa = a.step(&u)?.to_vec();
        let xb = b.step(&u)?;
        let gap = xa
            .iter()
            .zip(xb)
            .map(|(p, q)| (p.raw() - q.raw()).abs())
            .max()
            .unwrap_or(0);
        if t % 50 == 0 {
            println!("t={t:3} max |x_a - x_b| = {gap} ulp");
        }
    }
    Ok(())
}
