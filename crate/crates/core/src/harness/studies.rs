//! Measurements built on a trained model: noise sweeps, the ridge oracle,
//! Lyapunov exponents, spectral calibration and the float reference run.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    compute_metrics, esp_shift_for_sparsity, lyapunov_exponent, ridge_classify, ridge_readout,
    spectral_radius, EspCalibration, EspSearch, LyapunovConfig, LyapunovResult, Metrics,
    NoiseKind, NoiseSpec, SpectralEstimate,
};
use crate::error::Result;
use crate::fixed_point::FxValue;
use crate::harness::config::{ExperimentConfig, SeedRole};
use crate::harness::data::{RawDataset, SampleRecord};
use crate::harness::experiment::{prepare, Model, Prepared};
use crate::reference::{Activation, FloatReadout, FloatReservoir};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisePoint {
    pub kind: NoiseKind,
    /// `None` for the clean baseline.
    pub snr_db: Option<f64>,
    pub accuracy: f64,
    pub macro_f1: f64,
}

pub const NOISE_CSV_HEADER: &str = "kind,snr_db,accuracy,macro_f1";

impl NoisePoint {
    pub fn csv_row(&self) -> String {
        let kind = match self.kind {
            NoiseKind::Uniform => "uniform",
            NoiseKind::Gaussian => "gaussian",
        };
        let snr = self.snr_db.map_or("inf".to_string(), |s| format!("{s}"));
        format!("{kind},{snr},{:.6},{:.6}", self.accuracy, self.macro_f1)
    }
}

/// Evaluate a trained model on test splits corrupted at each SNR.
///
/// The training split is never corrupted, so the normalizer, and hence the
/// model, is the one used during training.
pub fn noise_sweep(
    cfg: &ExperimentConfig,
    raw: &RawDataset,
    model: &Model,
    kinds: &[NoiseKind],
    snrs_db: &[f64],
) -> Result<Vec<NoisePoint>> {
    let grid: Vec<(NoiseKind, f64)> = kinds
        .iter()
        .flat_map(|&k| snrs_db.iter().map(move |&s| (k, s)))
        .collect();
    grid.par_iter()
        .map(|&(kind, snr_db)| {
            let spec = NoiseSpec {
                snr_db,
                kind,
                bernoulli_p: cfg.noise.bernoulli_p,
                seed: cfg.seed_for(SeedRole::Noise),
            };
            let noisy = prepare(raw, cfg, snr_db.is_finite().then_some(&spec))?;
            let m = model.clone().evaluate(&noisy.test)?;
            Ok(NoisePoint {
                kind,
                snr_db: snr_db.is_finite().then_some(snr_db),
                accuracy: m.accuracy,
                macro_f1: m.macro_f1,
            })
        })
        .collect()
}

fn states_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows.len(), n, |t, j| rows[t][j])
}

fn dequantize(x: &[FxValue]) -> Vec<f64> {
    x.iter().map(|v| v.to_f64()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RidgePoint {
    pub beta: f64,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub sgd_accuracy: f64,
    pub sweep: Vec<RidgePoint>,
    pub best_beta: f64,
    pub best_accuracy: f64,
}

pub const DEFAULT_BETAS: [f64; 7] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0];

/// Ridge readouts fitted on the exact reservoir states the SGD readout saw.
///
/// States are collected while training `model` for `epochs` passes; the
/// ridge fit uses the states of the first pass.
pub fn ridge_vs_sgd(model: &mut Model, prepared: &Prepared, epochs: usize, betas: &[f64]) -> Result<OracleReport> {
    let n_o = prepared.n_classes;
    let mut train_states = Vec::with_capacity(prepared.train.len());
    let mut train_labels = Vec::with_capacity(prepared.train.len());
    for epoch in 0..epochs.max(1) {
        model.train_epoch(&prepared.train, |x, label| {
            if epoch == 0 {
                train_states.push(dequantize(x));
                train_labels.push(label);
            }
        })?;
    }
    let mut test_states = Vec::with_capacity(prepared.test.len());
    let preds = model.predict(&prepared.test, |x, _| test_states.push(dequantize(x)))?;
    let labels: Vec<usize> = prepared.test.iter().map(|s| s.label).collect();
    let sgd = compute_metrics(&preds, &labels, n_o)?;

    let x_train = states_matrix(&train_states);
    drop(train_states);
    let y_train = DMatrix::from_fn(train_labels.len(), n_o, |t, o| f64::from(u8::from(train_labels[t] == o)));
    let x_test = states_matrix(&test_states);
    let sweep = betas
        .par_iter()
        .map(|&beta| {
            let w = ridge_readout(&x_train, &y_train, beta)?;
            let m = compute_metrics(&ridge_classify(&w, &x_test), &labels, n_o)?;
            Ok(RidgePoint { beta, accuracy: m.accuracy })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = sweep
        .iter()
        .fold(None::<&RidgePoint>, |b, p| match b {
            Some(b) if b.accuracy >= p.accuracy => Some(b),
            _ => Some(p),
        })
        .expect("at least one beta");
    Ok(OracleReport {
        sgd_accuracy: sgd.accuracy,
        best_beta: best.beta,
        best_accuracy: best.accuracy,
        sweep,
    })
}

/// Train and evaluate the double-precision twin of `model`'s initial state.
pub fn reference_run(model: &Model, prepared: &Prepared, epochs: usize, activation: Activation) -> Result<Metrics> {
    let mut res = FloatReservoir::from_fixed(&model.reservoir, activation);
    let mut readout = FloatReadout::from_fixed(&model.readout, activation);
    let inputs = |s: &SampleRecord| dequantize(&s.features);
    let feedback = model.reservoir.config().feedback_enabled;
    for _ in 0..epochs {
        res.reset();
        for s in &prepared.train {
            let x = res.step(&inputs(s))?.clone();
            let y_hat = readout.forward(&x);
            readout.sgd_update(&y_hat, s.label, &x);
            if feedback {
                res.set_feedback(&y_hat);
            }
        }
    }
    res.reset();
    let mut preds = Vec::with_capacity(prepared.test.len());
    for s in &prepared.test {
        let x = res.step(&inputs(s))?.clone();
        let y_hat = readout.forward(&x);
        preds.push(crate::readout::argmax(y_hat.iter().copied()));
        if feedback {
            res.set_feedback(&y_hat);
        }
    }
    let labels: Vec<usize> = prepared.test.iter().map(|s| s.label).collect();
    compute_metrics(&preds, &labels, prepared.n_classes)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub samples: usize,
    pub quantized: LyapunovResult,
    pub reference: LyapunovResult,
}

/// Lyapunov exponent of the fixed-point reservoir and its float twin over
/// `max_samples` evenly spaced test inputs.
pub fn lyapunov_study(model: &Model, prepared: &Prepared, max_samples: usize) -> Result<LyapunovReport> {
    let mut fx = model.reservoir.clone();
    fx.reset();
    let mut fl = FloatReservoir::from_fixed(&model.reservoir, Activation::Piecewise);
    let stride = prepared.test.len().div_ceil(max_samples.max(2)).max(1);
    let mut inputs = Vec::new();
    let mut q_states = Vec::new();
    let mut f_states = Vec::new();
    for (t, s) in prepared.test.iter().enumerate() {
        let u = dequantize(&s.features);
        let xq = dequantize(fx.step(&s.features)?);
        let xf = fl.step(&u)?.as_slice().to_vec();
        if t % stride == 0 {
            inputs.push(u);
            q_states.push(xq);
            f_states.push(xf);
        }
    }
    let cfg = LyapunovConfig::default();
    Ok(LyapunovReport {
        samples: inputs.len(),
        quantized: lyapunov_exponent(&inputs, &q_states, &cfg)?,
        reference: lyapunov_exponent(&inputs, &f_states, &cfg)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub calibration: EspCalibration,
    /// Radius of the configured reservoir at the shift in use.
    pub configured_shift: u32,
    pub configured: SpectralEstimate,
}

pub fn eigen_study(cfg: &ExperimentConfig, model: &Model, seeds: usize) -> Result<EigenReport> {
    let calibration = esp_shift_for_sparsity(&EspSearch {
        n_r: cfg.reservoir.n_r,
        sparsity: cfg.reservoir.sparsity,
        seeds,
        seed_base: cfg.global_seed,
        ..EspSearch::default()
    })?;
    let (_, w_r, _) = model.reservoir.materialize();
    Ok(EigenReport {
        calibration,
        configured_shift: model.reservoir.config().weight_gen.esp_shift,
        configured: spectral_radius(&w_r.to_dmatrix())?,
    })
}

/// Dequantized input vector as a column.
pub fn input_column(s: &SampleRecord) -> DVector<f64> {
    DVector::from_vec(dequantize(&s.features))
}
