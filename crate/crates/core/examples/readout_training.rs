//! Per-sample SGD of the readout on a toy separable problem.
use esn_chip::readout::one_hot;
use esn_chip::reservoir::SIGNAL;
use esn_chip::{FxValue, Readout, ReadoutConfig};

fn main() -> esn_chip::Result<()> {
    let cfg = ReadoutConfig {
        n_o: 2,
        alpha_shift: 4,
        ..ReadoutConfig::default()
    };
    let mut readout = Readout::init(cfg, 4)?;
    let point = |c: usize, k: usize| -> Vec<FxValue> {
        let s = if c == 0 { 1.0 } else { -1.0 };
        let j = (k % 7) as f64 * 0.05;
        [0.6 * s + j, -0.4 * s, 0.2 - j, 0.5]
            .iter()
            .map(|&v| FxValue::quantize(v, SIGNAL))
            .collect()
    };
    for k in 0..2000 {
        let c = k % 2;
        let x = point(c, k);
        let pred = readout.forward(&x)?;
        readout.sgd_update(&pred, &one_hot(c, 2), &x)?;
        if k % 400 == 0 {
            let correct = (0..100).filter(|&i| readout.forward(&point(i % 2, i)).unwrap().class == i % 2).count();
            println!("update {k:4}: accuracy {correct}%");
        }
    }
    println!("gradient stats: {:?}", readout.gradient_stats());
    Ok(())
}
