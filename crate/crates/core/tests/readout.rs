mod common;

use esn_chip::readout::{one_hot, SparseReadout};
use esn_chip::reference::{FloatReadout, Activation};
use esn_chip::reservoir::SIGNAL;
use esn_chip::{FxValue, Readout, ReadoutConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two classes split by a hyperplane with a margin, plus a bias input.
fn separable(n: usize, dim: usize, seed: u64) -> Vec<(Vec<FxValue>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d = x.iter().zip(&normal).map(|(a, b)| a * b).sum::<f64>() / norm;
        if d.abs() < 0.2 {
            continue;
        }
        x.push(0.5);
        let label = usize::from(d > 0.0);
        out.push((x.iter().map(|&v| FxValue::quantize(v, SIGNAL)).collect(), label));
    }
    out
}

fn accuracy(r: &Readout, data: &[(Vec<FxValue>, usize)]) -> f64 {
    data.iter().filter(|(x, c)| r.forward(x).unwrap().class == *c).count() as f64 / data.len() as f64
}

#[test]
fn sgd_separates_a_separable_stream() {
    let data = separable(200, 6, 3);
    for alpha_shift in 3..=7 {
        let cfg = ReadoutConfig {
            n_o: 2,
            alpha_shift,
            ..ReadoutConfig::default()
        };
        let mut r = Readout::init(cfg, 7).unwrap();
        let mut reached = None;
        for k in 0..10_000 {
            let (x, c) = &data[k % data.len()];
            let p = r.forward(x).unwrap();
            r.sgd_update(&p, &one_hot(*c, 2), x).unwrap();
            if (k + 1) % data.len() == 0 && accuracy(&r, &data) == 1.0 {
                reached = Some(k + 1);
                break;
            }
        }
        assert!(reached.is_some(), "alpha_shift {alpha_shift}: accuracy {}", accuracy(&r, &data));
    }
}

#[test]
fn fixed_point_sgd_tracks_float_sgd() {
    let data = separable(400, 6, 9);
    let cfg = ReadoutConfig {
        n_o: 2,
        alpha_shift: 5,
        ..ReadoutConfig::default()
    };
    let mut fx = Readout::init(cfg, 7).unwrap();
    let mut fl = FloatReadout::from_fixed(&fx, Activation::Piecewise);
    for (x, c) in &data {
        let p = fx.forward(x).unwrap();
        fx.sgd_update(&p, &one_hot(*c, 2), x).unwrap();
        let xf = nalgebra::DVector::from_iterator(x.len(), x.iter().map(|v| v.to_f64()));
        let y = fl.forward(&xf);
        fl.sgd_update(&y, *c, &xf);
    }
    for o in 0..2 {
        for j in 0..7 {
            let d = (fx.weight(o, j).to_f64() - fl.weights()[(o, j)]).abs();
            assert!(d < 1e-3, "weight ({o},{j}) differs by {d}");
        }
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let err = common::delta_rule_gradient_error(200, 17);
    assert!(err <= 1e-6, "relative error {err}");
}

#[test]
fn sparse_mode_keeps_requested_fraction() {
    for level in [0.25, 0.5, 0.75] {
        let mut r = Readout::init(ReadoutConfig::default(), 4096).unwrap();
        r.set_sparse_mode(Some(SparseReadout { level, seed: 0xBEEF }));
        let mask = r.connection_mask().unwrap();
        let kept = mask.iter().filter(|&&m| m).count() as f64 / mask.len() as f64;
        assert!((kept - level).abs() < 0.03, "level {level}: kept {kept}");
    }
}

#[test]
fn full_sparse_level_equals_dense() {
    let data = separable(50, 6, 5);
    let dense = Readout::init(ReadoutConfig { n_o: 2, ..ReadoutConfig::default() }, 7).unwrap();
    let mut sparse = dense.clone();
    sparse.set_sparse_mode(Some(SparseReadout { level: 1.0, seed: 1 }));
    for (x, _) in &data {
        assert_eq!(dense.forward(x).unwrap(), sparse.forward(x).unwrap());
    }
}
