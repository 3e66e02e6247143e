//! Choose the recurrent weight shift that keeps the spectral radius below one.
use esn_chip::analysis::{esp_shift_for_sparsity, EspSearch};

fn main() -> esn_chip::Result<()> {
    for sparsity in [0.05, 0.1, 0.2, 0.4] {
        let cal = esp_shift_for_sparsity(&EspSearch {
            sparsity,
            ..EspSearch::default()
        })?;
        let max = cal.radii.iter().cloned().fold(0.0, f64::max);
        println!(
            "sparsity {sparsity:4}: unshifted mean {:.3}, shift {}, mean {:.3}, max {:.3}, cv {:.2}%",
            cal.unshifted_mean,
            cal.shift,
            cal.mean,
            max,
            cal.cv * 100.0
        );
    }
    Ok(())
}
