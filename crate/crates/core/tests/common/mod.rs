//! Oracles shared by integration and acceptance tests.
#![allow(dead_code)]

use esn_chip::analysis::NoiseKind;
use esn_chip::fixed_point::FxFormat;
use esn_chip::harness::ExperimentConfig;
use esn_chip::{Accumulator, FxValue};
use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// exact fixed-point model

fn pow2(bits: u32) -> BigRational {
    BigRational::from_integer(BigInt::one() << bits)
}

fn exact(v: FxValue) -> BigRational {
    BigRational::new(BigInt::from(v.raw()), BigInt::one() << v.format().frac_bits())
}

/// Nearest integer to `q`, ties away from zero.
fn round_away(q: &BigRational) -> BigInt {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if q.is_negative() {
        -((-q) + half).floor().to_integer()
    } else {
        (q + half).floor().to_integer()
    }
}

fn clamp(raw: BigInt, f: FxFormat) -> i64 {
    let lo = BigInt::from(f.min_raw());
    let hi = BigInt::from(f.max_raw());
    let c = if raw < lo {
        lo
    } else if raw > hi {
        hi
    } else {
        raw
    };
    c.to_i64().expect("clamped into i64")
}

/// Raw word of the representable value nearest to `q`.
pub fn oracle_raw(q: &BigRational, f: FxFormat) -> i64 {
    clamp(round_away(&(q * pow2(f.frac_bits()))), f)
}

fn random_format(rng: &mut ChaCha8Rng) -> FxFormat {
    let total = rng.random_range(2..=32u32);
    let frac = rng.random_range(0..total);
    FxFormat::new(total, frac).expect("valid format")
}

fn random_value(rng: &mut ChaCha8Rng, f: FxFormat) -> FxValue {
    // bias towards the edges where saturation lives
    let raw = match rng.random_range(0..8) {
        0 => f.max_raw() - rng.random_range(0..3i64).min(f.max_raw()),
        1 => f.min_raw() + rng.random_range(0..3i64),
        2 => rng.random_range(-4..=4i64).clamp(f.min_raw(), f.max_raw()),
        _ => rng.random_range(f.min_raw()..=f.max_raw()),
    };
    FxValue::from_raw(raw, f)
}

fn random_real(rng: &mut ChaCha8Rng, f: FxFormat) -> f64 {
    let scale = f.max_value() * 1.5;
    match rng.random_range(0..4) {
        // exact ties between two codes
        0 => (rng.random_range(-(1i64 << 20)..(1i64 << 20)) as f64 + 0.5) * f.resolution(),
        _ => rng.random_range(-scale..scale),
    }
}

/// Outcome of a randomized fixed-point battery.
pub struct FixedPointRun {
    pub cases: usize,
    pub mismatches: Vec<String>,
}

/// `n` randomized quantize/add/sub/mul/convert/shift/accumulate cases, each
/// checked against exact rational arithmetic.
pub fn fixed_point_battery(n: usize, seed: u64) -> FixedPointRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = Vec::new();
    let mut check = |what: &str, got: i64, want: i64, detail: String| {
        if got != want && mismatches.len() < 20 {
            mismatches.push(format!("{what}: got {got}, want {want} ({detail})"));
        }
    };
    for case in 0..n {
        let f = random_format(&mut rng);
        match case % 7 {
            0 => {
                let r = random_real(&mut rng, f);
                let got = FxValue::quantize(r, f).raw();
                let q = BigRational::from_float(r).expect("finite");
                check("quantize", got, oracle_raw(&q, f), format!("{r} into {f}"));
            }
            1 => {
                let (a, b) = (random_value(&mut rng, f), random_value(&mut rng, f));
                let got = a.add(b).unwrap().raw();
                check("add", got, oracle_raw(&(exact(a) + exact(b)), f), format!("{a}+{b} {f}"));
            }
            2 => {
                let (a, b) = (random_value(&mut rng, f), random_value(&mut rng, f));
                let got = a.sub(b).unwrap().raw();
                check("sub", got, oracle_raw(&(exact(a) - exact(b)), f), format!("{a}-{b} {f}"));
            }
            3 => {
                let g = random_format(&mut rng);
                let out = random_format(&mut rng);
                let (a, b) = (random_value(&mut rng, f), random_value(&mut rng, g));
                let got = a.mul(b, out).raw();
                let want = oracle_raw(&(exact(a) * exact(b)), out);
                check("mul", got, want, format!("{a}*{b} into {out}"));
            }
            4 => {
                let out = random_format(&mut rng);
                let a = random_value(&mut rng, f);
                check("convert", a.convert(out).raw(), oracle_raw(&exact(a), out), format!("{a} {f}->{out}"));
            }
            5 => {
                let a = random_value(&mut rng, f);
                let s = rng.random_range(0..40u32);
                let want = (exact(a) * pow2(f.frac_bits()) / pow2(s)).floor().to_integer();
                check("shift", a.shift_right(s).raw(), clamp(want, f), format!("{a}>>{s}"));
            }
            _ => {
                let g = random_format(&mut rng);
                let out = random_format(&mut rng);
                let mut acc = Accumulator::for_product(f, g);
                let mut sum = BigRational::zero();
                for _ in 0..rng.random_range(1..16) {
                    let (a, b) = (random_value(&mut rng, f), random_value(&mut rng, g));
                    acc.mac(a, b);
                    sum += exact(a) * exact(b);
                }
                check("accumulate", acc.finish(out).raw(), oracle_raw(&sum, out), format!("into {out}"));
            }
        }
    }
    FixedPointRun { cases: n, mismatches }
}

// ---------------------------------------------------------------------------
// gradient of the readout update

/// Largest relative error between the readout update divided by `−α` and a
/// central finite-difference gradient of `½‖W x − y‖²`, over `instances`.
pub fn delta_rule_gradient_error(instances: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let n_o = rng.random_range(1..=3);
        let n_r = rng.random_range(1..=5);
        let w = DMatrix::from_fn(n_o, n_r, |_, _| rng.random_range(-1.0..1.0));
        let x = DVector::from_fn(n_r, |_, _| rng.random_range(-1.0..1.0));
        let y = DVector::from_fn(n_o, |_, _| rng.random_range(0.0..1.0));
        let alpha = 2f64.powi(-rng.random_range(2..=8));
        let updated = esn_chip::reference::delta_rule_step(&w, &x, &y, alpha);
        let step = (updated - &w) / (-alpha);

        let loss = |w: &DMatrix<f64>| 0.5 * (w * &x - &y).norm_squared();
        let h = 1e-5;
        let numeric = DMatrix::from_fn(n_o, n_r, |i, j| {
            let mut p = w.clone();
            let mut m = w.clone();
            p[(i, j)] += h;
            m[(i, j)] -= h;
            (loss(&p) - loss(&m)) / (2.0 * h)
        });
        let denom = numeric.norm().max(1e-12);
        worst = worst.max((step - numeric).norm() / denom);
    }
    worst
}

// ---------------------------------------------------------------------------
// shared experiment settings

/// Flagship activity-recognition configuration on the synthetic corpus.
pub fn flagship(overrides: &[&str]) -> ExperimentConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    ExperimentConfig::from_toml_str("", &o).expect("valid flagship config")
}

/// Reduced corpus for tests that train many models on one CPU.
pub fn small(overrides: &[&str]) -> ExperimentConfig {
    let mut o = vec!["dataset.synthetic_samples_per_subject=3000"];
    o.extend_from_slice(overrides);
    flagship(&o)
}

pub const BOTH_KINDS: [NoiseKind; 2] = [NoiseKind::Gaussian, NoiseKind::Uniform];
