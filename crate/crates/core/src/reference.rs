//! Double-precision twin of the fixed-point network.
//!
//! Uses the dequantized LFSR weights so the only difference from the chip
//! model is arithmetic precision (and, optionally, smooth activations).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::readout::{argmax, Readout};
use crate::reservoir::Reservoir;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    /// Same piecewise-linear tanh and sigmoid as the chip.
    #[default]
    Piecewise,
    /// `tanh` and the logistic function.
    Smooth,
}

impl Activation {
    pub fn tanh(self, z: f64) -> f64 {
        match self {
            Activation::Piecewise => z.clamp(-1.0, 1.0),
            Activation::Smooth => z.tanh(),
        }
    }

    pub fn sigmoid(self, z: f64) -> f64 {
        match self {
            Activation::Piecewise => (z / 4.0 + 0.5).clamp(0.0, 1.0),
            Activation::Smooth => 1.0 / (1.0 + (-z).exp()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FloatReservoir {
    w_in: DMatrix<f64>,
    w_r: DMatrix<f64>,
    w_f: DMatrix<f64>,
    delta: f64,
    activation: Activation,
    x: DVector<f64>,
    y_prev: DVector<f64>,
}

impl FloatReservoir {
    /// Copy the weights of a fixed-point reservoir.
    pub fn from_fixed(res: &Reservoir, activation: Activation) -> Self {
        let (w_in, w_r, w_f) = res.materialize();
        let n_r = res.n_r();
        FloatReservoir {
            w_in: w_in.to_dmatrix(),
            w_r: w_r.to_dmatrix(),
            y_prev: DVector::zeros(w_f.cols()),
            w_f: w_f.to_dmatrix(),
            delta: res.config().delta,
            activation,
            x: DVector::zeros(n_r),
        }
    }

    pub fn n_r(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn reset(&mut self) {
        self.x.fill(0.0);
        self.y_prev.fill(0.0);
    }

    pub fn set_feedback(&mut self, y_hat: &[f64]) {
        if self.y_prev.len() == y_hat.len() {
            self.y_prev.copy_from_slice(y_hat);
        }
    }

    pub fn step(&mut self, u: &[f64]) -> Result<&DVector<f64>> {
        if u.len() != self.w_in.ncols() {
            return Err(Error::DimensionMismatch {
                what: "input vector",
                expected: self.w_in.ncols(),
                got: u.len(),
            });
        }
        let u = DVector::from_column_slice(u);
        let mut z = &self.w_in * u + &self.w_r * &self.x;
        if !self.y_prev.is_empty() {
            z += &self.w_f * &self.y_prev;
        }
        let act = self.activation;
        let x_hat = z.map(|v| act.tanh(v));
        self.x = &self.x * (1.0 - self.delta) + x_hat * self.delta;
        Ok(&self.x)
    }
}

#[derive(Clone, Debug)]
pub struct FloatReadout {
    w: DMatrix<f64>,
    alpha: f64,
    activation: Activation,
}

impl FloatReadout {
    /// Start from the dequantized initial weights of a fixed-point readout.
    pub fn from_fixed(readout: &Readout, activation: Activation) -> Self {
        let (n_o, n_r) = (readout.n_o(), readout.n_r());
        let w = DMatrix::from_fn(n_o, n_r, |o, j| readout.weight(o, j).to_f64());
        FloatReadout {
            w,
            alpha: 2f64.powi(-(readout.config().alpha_shift as i32)),
            activation,
        }
    }

    pub fn new(w: DMatrix<f64>, alpha: f64, activation: Activation) -> Self {
        FloatReadout { w, alpha, activation }
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn forward(&self, x: &DVector<f64>) -> Vec<f64> {
        let act = self.activation;
        (&self.w * x).iter().map(|&z| act.sigmoid(z)).collect()
    }

    pub fn predict(&self, x: &DVector<f64>) -> usize {
        argmax(self.forward(x))
    }

    /// One delta-rule step: `W ← W − α (ŷ − y) xᵀ`.
    pub fn sgd_update(&mut self, y_hat: &[f64], class: usize, x: &DVector<f64>) {
        let err = DVector::from_fn(y_hat.len(), |o, _| {
            y_hat[o] - if o == class { 1.0 } else { 0.0 }
        });
        self.w -= (err * x.transpose()) * self.alpha;
    }
}

/// Delta-rule update for an identity-activation linear readout:
/// `W − α (W x − y) xᵀ`, which is a gradient step on `½‖W x − y‖²`.
pub fn delta_rule_step(w: &DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>, alpha: f64) -> DMatrix<f64> {
    let err = w * x - y;
    w - (err * x.transpose()) * alpha
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixed_point::FxValue;
    use crate::reservoir::{ReservoirConfig, WeightMode, SIGNAL};

    #[test]
    fn activations() {
        let p = Activation::Piecewise;
        assert_eq!(p.tanh(3.0), 1.0);
        assert_eq!(p.sigmoid(1.0), 0.75);
        assert_eq!(p.sigmoid(-5.0), 0.0);
        assert!((Activation::Smooth.sigmoid(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tracks_fixed_point_trajectory() {
        let cfg = ReservoirConfig {
            n_r: 32,
            ..ReservoirConfig::default()
        };
        let mut fx = Reservoir::new(cfg, WeightMode::Cached).unwrap();
        let mut fl = FloatReservoir::from_fixed(&fx, Activation::Piecewise);
        let mut worst: f64 = 0.0;
        for t in 0..200 {
            let u: Vec<f64> = (0..3).map(|i| ((t * (i + 1)) as f64 * 0.1).sin()).collect();
            let uq: Vec<FxValue> = u.iter().map(|&v| FxValue::quantize(v, SIGNAL)).collect();
            let uf: Vec<f64> = uq.iter().map(|v| v.to_f64()).collect();
            fx.step(&uq).unwrap();
            let xf = fl.step(&uf).unwrap();
            for (a, b) in fx.x().iter().zip(xf.iter()) {
                worst = worst.max((a.to_f64() - b).abs());
            }
        }
        // rounding drift stays at a few LSBs of SQ3.12
        assert!(worst < 0.01, "max deviation {worst}");
    }

    #[test]
    fn delta_rule_zero_error_is_fixed_point() {
        let w = DMatrix::from_row_slice(1, 2, &[0.5, -0.25]);
        let x = DVector::from_vec(vec![1.0, 2.0]);
        let y = &w * &x;
        assert_eq!(delta_rule_step(&w, &x, &y, 0.1), w);
    }
}
