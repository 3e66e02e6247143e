//! Quantization, saturation and the wide accumulator.
use esn_chip::{Accumulator, FxFormat, FxValue};

fn main() -> esn_chip::Result<()> {
    let f = FxFormat::SQ3_12;
    println!("{f}: range [{}, {}], step {}", f.min_value(), f.max_value(), f.resolution());

    let a = FxValue::quantize(1.337, f);
    let b = FxValue::quantize(-0.25, f);
    println!("a = {a} (raw {}), b = {b}", a.raw());
    println!("a + b = {}", a.add(b)?);
    println!("a * b = {}", a.mul(b, f));

    // saturating arithmetic never wraps
    let big = FxValue::quantize(7.9, f);
    let sum = big.add(big)?;
    println!("7.9 + 7.9 = {sum} (saturated: {})", sum.is_saturated());

    // halfway values round away from zero
    let half_ulp = f.resolution() / 2.0;
    println!(
        "+half ulp -> raw {}, -half ulp -> raw {}",
        FxValue::quantize(half_ulp, f).raw(),
        FxValue::quantize(-half_ulp, f).raw()
    );

    // a dot product accumulates exactly and rounds once
    let xs = [0.5, -0.75, 0.125, 0.9];
    let ws = [0.3, 0.2, -0.6, 0.45];
    let mut acc = Accumulator::for_product(f, FxFormat::SQ0_15);
    for (x, w) in xs.iter().zip(&ws) {
        acc.mac(FxValue::quantize(*x, f), FxValue::quantize(*w, FxFormat::SQ0_15));
    }
    let exact: f64 = xs.iter().zip(&ws).map(|(x, w)| x * w).sum();
    println!("dot = {} (float {exact:.6})", acc.finish(f));
    Ok(())
}
