//! Leaky-integrated reservoir layer.
//!
//! One step computes
//!
//! ```text
//! x̂(t) = tanh_pw(W_ri u(t) + W_r x(t-1) + W_f ŷ(t-1))
//! x(t)  = (1 - δ) x(t-1) + δ x̂(t)
//! ```
//!
//! with all weights drawn from per-neuron LFSR streams. In
//! [`WeightMode::Streaming`] the streams are reseeded and replayed on every
//! step, as the hardware does; [`WeightMode::Cached`] materializes them once.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed_point::{Accumulator, FxFormat, FxMatrix, FxValue};
use crate::lfsr::{self, mask_threshold, sparsity_mask, StreamRole, WeightGenConfig};

/// Signal format shared by inputs, states and outputs.
pub const SIGNAL: FxFormat = FxFormat::SQ3_12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReservoirConfig {
    pub n_i: usize,
    pub n_r: usize,
    /// Fraction of recurrent fan-in kept (1/κ).
    pub sparsity: f64,
    /// Leak rate δ.
    pub delta: f64,
    #[serde(default)]
    pub feedback_enabled: bool,
    /// Width of the fed-back output vector; ignored unless feedback is enabled.
    #[serde(default)]
    pub n_feedback: usize,
    pub weight_gen: WeightGenConfig,
}

impl Default for ReservoirConfig {
    fn default() -> Self {
        ReservoirConfig {
            n_i: 3,
            n_r: 128,
            sparsity: 0.1,
            delta: 0.25,
            feedback_enabled: false,
            n_feedback: 0,
            weight_gen: WeightGenConfig::default(),
        }
    }
}

impl ReservoirConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_r == 0 {
            return Err(Error::Config("n_r must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::Config(format!("delta {} outside [0, 1]", self.delta)));
        }
        if !(self.sparsity > 0.0 && self.sparsity <= 1.0) {
            return Err(Error::Config(format!(
                "sparsity {} outside (0, 1]",
                self.sparsity
            )));
        }
        self.weight_gen.validate()
    }
}

/// Piecewise-linear tanh: identity on [-1, 1], clipped outside.
#[inline]
pub fn pw_tanh(z: FxValue) -> FxValue {
    let one = z.format().one_raw();
    z.clamp_raw(-one, one)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    Streaming,
    #[default]
    Cached,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReservoirState {
    pub x: Vec<FxValue>,
    pub x_hat: Vec<FxValue>,
    pub y_prev: Vec<FxValue>,
}

impl ReservoirState {
    fn zeros(n_r: usize, n_o: usize) -> Self {
        ReservoirState {
            x: vec![FxValue::zero(SIGNAL); n_r],
            x_hat: vec![FxValue::zero(SIGNAL); n_r],
            y_prev: vec![FxValue::zero(SIGNAL); n_o],
        }
    }
}

#[derive(Clone, Debug)]
struct NeuronWeights {
    input: Vec<i64>,
    recurrent: Vec<(u32, i64)>,
    feedback: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct Reservoir {
    cfg: ReservoirConfig,
    mode: WeightMode,
    threshold: u32,
    delta: FxValue,
    one_minus_delta: FxValue,
    state: ReservoirState,
    cache: Option<Vec<NeuronWeights>>,
}

impl Reservoir {
    pub fn new(cfg: ReservoirConfig, mode: WeightMode) -> Result<Self> {
        cfg.validate()?;
        let delta = FxValue::quantize(cfg.delta, SIGNAL);
        let one_minus_delta = FxValue::one(SIGNAL).sub(delta)?;
        let n_fb = if cfg.feedback_enabled { cfg.n_feedback } else { 0 };
        let mut r = Reservoir {
            threshold: mask_threshold(cfg.sparsity),
            state: ReservoirState::zeros(cfg.n_r, n_fb),
            cfg,
            mode,
            delta,
            one_minus_delta,
            cache: None,
        };
        r.rebuild_cache();
        Ok(r)
    }

    pub fn config(&self) -> &ReservoirConfig {
        &self.cfg
    }

    pub fn mode(&self) -> WeightMode {
        self.mode
    }

    pub fn n_r(&self) -> usize {
        self.cfg.n_r
    }

    pub fn state(&self) -> &ReservoirState {
        &self.state
    }

    pub fn x(&self) -> &[FxValue] {
        &self.state.x
    }

    /// Quantized leak rate δ and 1 − δ.
    pub fn leak_terms(&self) -> (FxValue, FxValue) {
        (self.delta, self.one_minus_delta)
    }

    pub fn reset(&mut self) {
        let n_fb = self.state.y_prev.len();
        self.state = ReservoirState::zeros(self.cfg.n_r, n_fb);
    }

    /// Overwrite x(t−1); components are converted to the signal format and clipped to [−1, 1].
    pub fn set_state(&mut self, x: &[FxValue]) -> Result<()> {
        check_len("reservoir state", self.cfg.n_r, x.len())?;
        for (dst, &src) in self.state.x.iter_mut().zip(x) {
            *dst = pw_tanh(src.convert(SIGNAL));
        }
        Ok(())
    }

    /// Latch ŷ(t−1) for the feedback path. No-op when feedback is disabled.
    pub fn set_feedback(&mut self, y_hat: &[FxValue]) -> Result<()> {
        if !self.cfg.feedback_enabled {
            return Ok(());
        }
        check_len("feedback vector", self.cfg.n_feedback, y_hat.len())?;
        for (dst, &src) in self.state.y_prev.iter_mut().zip(y_hat) {
            *dst = src.convert(SIGNAL);
        }
        Ok(())
    }

    fn acc_frac(&self) -> u32 {
        self.cfg.weight_gen.weight_format.frac_bits() + SIGNAL.frac_bits()
    }

    /// Compute x̂ from the current input and the stored previous state.
    pub fn pre_activation(&self, u: &[FxValue]) -> Result<Vec<FxValue>> {
        check_len("input vector", self.cfg.n_i, u.len())?;
        let u_raw: Vec<i64> = u.iter().map(|v| v.convert(SIGNAL).raw()).collect();
        let frac = self.acc_frac();
        let x_prev = &self.state.x;
        let y_prev = &self.state.y_prev;
        let x_hat = match &self.cache {
            Some(cache) => cache
                .iter()
                .map(|nw| {
                    let mut acc = Accumulator::new(frac);
                    for (&w, &ui) in nw.input.iter().zip(&u_raw) {
                        acc.mac_raw(w, ui);
                    }
                    for &(k, w) in &nw.recurrent {
                        acc.mac_raw(w, x_prev[k as usize].raw());
                    }
                    for (&w, y) in nw.feedback.iter().zip(y_prev) {
                        acc.mac_raw(w, y.raw());
                    }
                    pw_tanh(acc.finish(SIGNAL))
                })
                .collect(),
            None => (0..self.cfg.n_r)
                .map(|j| {
                    let g = &self.cfg.weight_gen;
                    let mut acc = Accumulator::new(frac);
                    let mut ff = g.lfsr(StreamRole::Input, j);
                    for &ui in &u_raw {
                        acc.mac_raw(g.gen_input_weight(&mut ff).raw(), ui);
                    }
                    let mut fb = g.lfsr(StreamRole::Recurrent, j);
                    let mut sel = g.lfsr(StreamRole::Sparsity, j);
                    for xk in x_prev {
                        let w = g.gen_recurrent_weight(&mut fb);
                        if sparsity_mask(&mut sel, self.threshold) {
                            acc.mac_raw(w.raw(), xk.raw());
                        }
                    }
                    if self.cfg.feedback_enabled {
                        let mut fw = g.lfsr(StreamRole::Feedback, j);
                        for y in y_prev {
                            acc.mac_raw(g.gen_input_weight(&mut fw).raw(), y.raw());
                        }
                    }
                    pw_tanh(acc.finish(SIGNAL))
                })
                .collect(),
        };
        Ok(x_hat)
    }

    /// x(t) = (1 − δ)·x(t−1) + δ·x̂(t), one rounding per component.
    pub fn leaky_update(&mut self, x_hat: Vec<FxValue>) -> Result<()> {
        check_len("pre-activation", self.cfg.n_r, x_hat.len())?;
        let frac = 2 * SIGNAL.frac_bits();
        for (x, xh) in self.state.x.iter_mut().zip(&x_hat) {
            let mut acc = Accumulator::new(frac);
            acc.mac(self.one_minus_delta, *x);
            acc.mac(self.delta, *xh);
            *x = acc.finish(SIGNAL);
        }
        self.state.x_hat = x_hat;
        Ok(())
    }

    /// One full timestep; returns the new state x(t).
    pub fn step(&mut self, u: &[FxValue]) -> Result<&[FxValue]> {
        let x_hat = self.pre_activation(u)?;
        self.leaky_update(x_hat)?;
        Ok(&self.state.x)
    }

    /// Add `n_new` neurons. Existing streams are untouched; new neurons start at 0.
    pub fn grow(&mut self, n_new: usize) {
        if n_new == 0 {
            return;
        }
        self.cfg.n_r += n_new;
        self.state
            .x
            .extend(std::iter::repeat_n(FxValue::zero(SIGNAL), n_new));
        self.state
            .x_hat
            .extend(std::iter::repeat_n(FxValue::zero(SIGNAL), n_new));
        self.rebuild_cache();
    }

    fn rebuild_cache(&mut self) {
        self.cache = match self.mode {
            WeightMode::Streaming => None,
            WeightMode::Cached => {
                let (w_in, w_r, w_f) = self.materialize();
                Some(
                    (0..self.cfg.n_r)
                        .map(|j| NeuronWeights {
                            input: (0..w_in.cols()).map(|i| w_in.get(j, i).raw()).collect(),
                            recurrent: (0..w_r.cols())
                                .filter_map(|k| {
                                    let w = w_r.get(j, k).raw();
                                    (w != 0).then_some((k as u32, w))
                                })
                                .collect(),
                            feedback: (0..w_f.cols()).map(|o| w_f.get(j, o).raw()).collect(),
                        })
                        .collect(),
                )
            }
        };
    }

    /// Materialize (W_ri, W_r, W_f) from the LFSR streams.
    pub fn materialize(&self) -> (FxMatrix, FxMatrix, FxMatrix) {
        let g = &self.cfg.weight_gen;
        let w_in = lfsr::build_input_matrix(g, self.cfg.n_r, self.cfg.n_i);
        let w_r = lfsr::build_reservoir_matrix(g, self.cfg.n_r, self.cfg.sparsity);
        let n_fb = if self.cfg.feedback_enabled {
            self.cfg.n_feedback
        } else {
            0
        };
        let mut w_f = FxMatrix::zeros(self.cfg.n_r, n_fb, g.weight_format);
        for j in 0..self.cfg.n_r {
            let mut fw = g.lfsr(StreamRole::Feedback, j);
            for o in 0..n_fb {
                w_f.set(j, o, g.gen_input_weight(&mut fw));
            }
        }
        (w_in, w_r, w_f)
    }
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(v: f64) -> FxValue {
        FxValue::quantize(v, SIGNAL)
    }

    fn cfg(n_r: usize) -> ReservoirConfig {
        ReservoirConfig {
            n_i: 3,
            n_r,
            weight_gen: WeightGenConfig::from_global_seed(11),
            ..ReservoirConfig::default()
        }
    }

    #[test]
    fn pw_tanh_branches() {
        assert_eq!(pw_tanh(sq(0.5)), sq(0.5));
        assert_eq!(pw_tanh(sq(1.5)), sq(1.0));
        assert_eq!(pw_tanh(sq(-2.0)), sq(-1.0));
        assert_eq!(pw_tanh(sq(1.0)), sq(1.0));
    }

    #[test]
    fn zero_in_zero_out() {
        let r = Reservoir::new(cfg(16), WeightMode::Streaming).unwrap();
        let xh = r.pre_activation(&[sq(0.0); 3]).unwrap();
        assert!(xh.iter().all(|v| v.raw() == 0));
    }

    #[test]
    fn single_mac_case() {
        let mut c = cfg(1);
        c.n_i = 1;
        // threshold 0 accepts nothing; sparsity must stay positive
        c.sparsity = 1e-4;
        let r = Reservoir::new(c.clone(), WeightMode::Streaming).unwrap();
        let mut ff = c.weight_gen.lfsr(StreamRole::Input, 0);
        let w = c.weight_gen.gen_input_weight(&mut ff);
        let expected = pw_tanh(w.mul(sq(0.5), SIGNAL));
        assert_eq!(r.pre_activation(&[sq(0.5)]).unwrap(), vec![expected]);
    }

    #[test]
    fn dimension_mismatch() {
        let r = Reservoir::new(cfg(8), WeightMode::Cached).unwrap();
        assert!(matches!(
            r.pre_activation(&[sq(0.0); 2]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn leaky_update_examples() {
        let mut c = cfg(4);
        c.delta = 1.0;
        let mut r = Reservoir::new(c.clone(), WeightMode::Cached).unwrap();
        r.set_state(&[sq(0.3); 4]).unwrap();
        let xh = vec![sq(0.7), sq(-0.2), sq(0.0), sq(1.0)];
        r.leaky_update(xh.clone()).unwrap();
        assert_eq!(r.x(), &xh[..]);

        c.delta = 0.0;
        let mut r = Reservoir::new(c.clone(), WeightMode::Cached).unwrap();
        r.set_state(&[sq(0.3); 4]).unwrap();
        r.leaky_update(xh.clone()).unwrap();
        assert_eq!(r.x(), &[sq(0.3); 4][..]);

        c.delta = 0.5;
        let mut r = Reservoir::new(c, WeightMode::Cached).unwrap();
        r.set_state(&[sq(0.2); 4]).unwrap();
        r.leaky_update(vec![sq(0.6); 4]).unwrap();
        for v in r.x() {
            assert!((v.to_f64() - 0.4).abs() <= SIGNAL.resolution());
        }
    }

    #[test]
    fn streaming_equals_cached() {
        let mut c = cfg(24);
        c.feedback_enabled = true;
        c.n_feedback = 2;
        let mut a = Reservoir::new(c.clone(), WeightMode::Streaming).unwrap();
        let mut b = Reservoir::new(c, WeightMode::Cached).unwrap();
        for t in 0..30 {
            let u: Vec<_> = (0..3)
                .map(|i| sq(((t * 7 + i * 3) % 11) as f64 / 5.0 - 1.0))
                .collect();
            let fb = [sq((t % 3) as f64 / 3.0), sq(0.5)];
            a.set_feedback(&fb).unwrap();
            b.set_feedback(&fb).unwrap();
            assert_eq!(a.step(&u).unwrap(), b.step(&u).unwrap());
        }
    }

    #[test]
    fn feedback_changes_trajectory() {
        let mut c = cfg(16);
        let plain = Reservoir::new(c.clone(), WeightMode::Cached).unwrap();
        c.feedback_enabled = true;
        c.n_feedback = 2;
        let mut fed = Reservoir::new(c, WeightMode::Cached).unwrap();
        fed.set_feedback(&[sq(1.0), sq(-1.0)]).unwrap();
        let u = [sq(0.1); 3];
        assert_ne!(
            plain.pre_activation(&u).unwrap(),
            fed.pre_activation(&u).unwrap()
        );
    }

    #[test]
    fn grow_zero_is_noop() {
        let mut a = Reservoir::new(cfg(10), WeightMode::Cached).unwrap();
        let mut b = a.clone();
        b.grow(0);
        for t in 0..20 {
            let u = [sq(t as f64 / 20.0), sq(-0.3), sq(0.9)];
            assert_eq!(a.step(&u).unwrap(), b.step(&u).unwrap());
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let mut c = cfg(4);
        c.delta = 1.5;
        assert!(Reservoir::new(c, WeightMode::Cached).is_err());
        let mut c = cfg(4);
        c.sparsity = 0.0;
        assert!(Reservoir::new(c, WeightMode::Cached).is_err());
        let mut c = cfg(4);
        c.n_r = 0;
        assert!(Reservoir::new(c, WeightMode::Cached).is_err());
    }
}
