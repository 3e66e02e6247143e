//! On-the-fly weight and sparsity generation from linear-feedback shift registers.
use esn_chip::lfsr::{build_reservoir_matrix, mask_threshold, sparsity_mask, StreamRole};
use esn_chip::{Lfsr, WeightGenConfig};

fn main() -> esn_chip::Result<()> {
    let mut lfsr = Lfsr::with_default_taps(0xACE1, 16)?;
    let words: Vec<u32> = (0..4).map(|_| lfsr.next_word()).collect();
    println!("first words: {words:04x?}");

    // the period of a maximal 16-bit register
    let mut r = Lfsr::with_default_taps(1, 16)?;
    let start = r.register();
    let mut period = 0u32;
    loop {
        r.step();
        period += 1;
        if r.register() == start {
            break;
        }
    }
    println!("period: {period}");

    let cfg = WeightGenConfig::from_global_seed(7);
    let mut fb = cfg.lfsr(StreamRole::Recurrent, 0);
    let w: Vec<String> = (0..5).map(|_| cfg.gen_recurrent_weight(&mut fb).to_string()).collect();
    println!("recurrent weights (esp_shift {}): {}", cfg.esp_shift, w.join(" "));

    let mut s = cfg.lfsr(StreamRole::Sparsity, 0);
    let threshold = mask_threshold(0.1);
    let accepted = (0..10_000).filter(|_| sparsity_mask(&mut s, threshold)).count();
    println!("mask acceptance at 0.1: {:.4}", accepted as f64 / 10_000.0);

    let m = build_reservoir_matrix(&cfg, 128, 0.1);
    println!("128x128 reservoir: {} nonzeros", m.count_nonzero());
    Ok(())
}
