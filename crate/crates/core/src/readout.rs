//! Readout layer: weighted sum, piecewise sigmoid and on-chip SGD.
//!
//! The training rule is the plain delta rule
//! `W_or ← W_or − α (ŷ − y) xᵀ` with `α = 2^-alpha_shift` and one sample
//! per update. There is no sigmoid-derivative factor.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed_point::{rescale, Accumulator, FxFormat, FxValue};
use crate::lfsr::{derive_seed, mask_threshold, sparsity_mask, Lfsr};
use crate::reservoir::SIGNAL;

/// Words per output neuron consumed by initialization are 16-bit.
const INIT_LFSR_WIDTH: u32 = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseReadout {
    /// Fraction of reservoir outputs that reach the readout.
    pub level: f64,
    pub seed: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutConfig {
    pub n_o: usize,
    /// Learning rate α = 2^-alpha_shift.
    pub alpha_shift: u32,
    pub init_seed: u32,
    /// Initial weights lie in [−2^-init_shift, 2^-init_shift].
    #[serde(default = "default_init_shift")]
    pub init_shift: u32,
    pub weight_format: FxFormat,
    #[serde(default)]
    pub sparse: Option<SparseReadout>,
}

fn default_init_shift() -> u32 {
    4
}

impl Default for ReadoutConfig {
    fn default() -> Self {
        ReadoutConfig {
            n_o: 4,
            alpha_shift: 5,
            init_seed: 0x5EED,
            init_shift: default_init_shift(),
            weight_format: FxFormat::READOUT_24,
            sparse: None,
        }
    }
}

/// Piecewise-linear sigmoid: `z/4 + 0.5` on [−2, 2], clipped to [0, 1].
pub fn pw_sigmoid(z: FxValue) -> FxValue {
    let z = z.convert(SIGNAL);
    let two = 2 * SIGNAL.one_raw();
    let raw = if z.raw() > two {
        SIGNAL.one_raw()
    } else if z.raw() < -two {
        0
    } else {
        (z.raw() >> 2) + SIGNAL.one_raw() / 2
    };
    FxValue::from_raw(raw, SIGNAL)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub y_hat: Vec<FxValue>,
    pub class: usize,
}

impl Prediction {
    pub fn from_outputs(y_hat: Vec<FxValue>) -> Self {
        let class = argmax(y_hat.iter().map(|v| v.raw()));
        Prediction { y_hat, class }
    }
}

/// Index of the largest element; ties go to the lowest index.
pub fn argmax<T: PartialOrd>(values: impl IntoIterator<Item = T>) -> usize {
    let mut best: Option<(usize, T)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match &best {
            Some((_, b)) if !(v > *b) => {}
            _ => best = Some((i, v)),
        }
    }
    best.map_or(0, |(i, _)| i)
}

/// One-hot target vector with 0/1 entries in the signal format.
pub fn one_hot(class: usize, n_o: usize) -> Vec<FxValue> {
    (0..n_o)
        .map(|o| {
            if o == class {
                FxValue::one(SIGNAL)
            } else {
                FxValue::zero(SIGNAL)
            }
        })
        .collect()
}

/// Running record of per-element weight deltas.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GradientStats {
    pub updates: u64,
    /// Deltas that survived rounding into the weight format.
    pub nonzero: u64,
    /// Nonzero error·activation products that rounded to a zero delta.
    pub underflow: u64,
    /// Weight writes clipped by saturation.
    pub saturated: u64,
    /// Smallest and largest nonzero |delta|, in weight-format raw units.
    pub min_nonzero_raw: Option<u64>,
    pub max_raw: u64,
    /// Count of nonzero |delta| per floor(log2(raw)) bucket.
    pub log2_histogram: Vec<u64>,
}

impl GradientStats {
    fn record(&mut self, delta_raw: i64, product_nonzero: bool) {
        if delta_raw == 0 {
            if product_nonzero {
                self.underflow += 1;
            }
            return;
        }
        let mag = delta_raw.unsigned_abs();
        self.nonzero += 1;
        self.min_nonzero_raw = Some(self.min_nonzero_raw.map_or(mag, |m| m.min(mag)));
        self.max_raw = self.max_raw.max(mag);
        let bucket = 63 - mag.leading_zeros() as usize;
        if self.log2_histogram.len() <= bucket {
            self.log2_histogram.resize(bucket + 1, 0);
        }
        self.log2_histogram[bucket] += 1;
    }
}

#[derive(Clone, Debug)]
pub struct Readout {
    cfg: ReadoutConfig,
    n_r: usize,
    /// Row-major `n_o × n_r` raw weights.
    weights: Vec<i64>,
    mask: Option<Vec<bool>>,
    stats: GradientStats,
}

impl Readout {
    /// Fill `W_or` from the dedicated per-output LFSR streams.
    pub fn init(cfg: ReadoutConfig, n_r: usize) -> Result<Self> {
        if cfg.n_o == 0 {
            return Err(Error::Config("readout needs at least one output".into()));
        }
        let mut r = Readout {
            weights: Vec::new(),
            mask: None,
            stats: GradientStats::default(),
            n_r: 0,
            cfg,
        };
        r.weights = (0..r.cfg.n_o).flat_map(|o| r.init_row(o, 0, n_r)).collect();
        r.n_r = n_r;
        r.rebuild_mask();
        Ok(r)
    }

    fn init_row(&self, o: usize, from: usize, to: usize) -> Vec<i64> {
        let seed = derive_seed(self.cfg.init_seed, o, INIT_LFSR_WIDTH);
        let mut lfsr = Lfsr::with_default_taps(seed, INIT_LFSR_WIDTH).expect("nonzero seed");
        let frac = self.cfg.weight_format.frac_bits() as i32;
        let exponent = frac - (INIT_LFSR_WIDTH as i32 - 1) - self.cfg.init_shift as i32;
        let sign_bit = 1u32 << (INIT_LFSR_WIDTH - 1);
        (0..to)
            .map(|_| {
                let word = lfsr.next_word();
                let mag = i64::from(word & (sign_bit - 1));
                let mag = if exponent >= 0 {
                    mag << exponent
                } else {
                    mag >> -exponent
                };
                let raw = if word & sign_bit != 0 { -mag } else { mag };
                self.cfg.weight_format.saturate(i128::from(raw))
            })
            .skip(from)
            .collect()
    }

    fn rebuild_mask(&mut self) {
        self.mask = self.cfg.sparse.as_ref().map(|sp| {
            let threshold = mask_threshold(sp.level);
            let seed = derive_seed(sp.seed, 0, INIT_LFSR_WIDTH);
            let mut lfsr = Lfsr::with_default_taps(seed, INIT_LFSR_WIDTH).expect("nonzero seed");
            (0..self.n_r)
                .map(|_| sparsity_mask(&mut lfsr, threshold))
                .collect()
        });
    }

    pub fn config(&self) -> &ReadoutConfig {
        &self.cfg
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_o(&self) -> usize {
        self.cfg.n_o
    }

    pub fn weight(&self, o: usize, j: usize) -> FxValue {
        FxValue::from_raw(self.weights[o * self.n_r + j], self.cfg.weight_format)
    }

    pub fn raw_weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn gradient_stats(&self) -> &GradientStats {
        &self.stats
    }

    /// Reservoir outputs that reach the readout; `None` means dense.
    pub fn connection_mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn set_weight(&mut self, o: usize, j: usize, w: FxValue) {
        self.weights[o * self.n_r + j] = w.convert(self.cfg.weight_format).raw();
    }

    /// Switch between dense and sparse connection mode.
    pub fn set_sparse_mode(&mut self, sparse: Option<SparseReadout>) {
        self.cfg.sparse = sparse;
        self.rebuild_mask();
    }

    /// Extend `W_or` with `n_new` columns initialized from the same streams.
    pub fn grow(&mut self, n_new: usize) {
        if n_new == 0 {
            return;
        }
        let new_n = self.n_r + n_new;
        let mut weights = Vec::with_capacity(self.cfg.n_o * new_n);
        for o in 0..self.cfg.n_o {
            weights.extend_from_slice(&self.weights[o * self.n_r..(o + 1) * self.n_r]);
            weights.extend(self.init_row(o, self.n_r, new_n));
        }
        self.weights = weights;
        self.n_r = new_n;
        self.rebuild_mask();
    }

    #[inline]
    fn accepted(&self, j: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[j])
    }

    /// ŷ = sigmoid_pw(W_or x) over accepted reservoir outputs.
    pub fn forward(&self, x: &[FxValue]) -> Result<Prediction> {
        self.check_len(x.len())?;
        let frac = self.cfg.weight_format.frac_bits() + SIGNAL.frac_bits();
        let y_hat = self
            .weights
            .chunks_exact(self.n_r)
            .map(|row| {
                let mut acc = Accumulator::new(frac);
                for (j, (&w, xj)) in row.iter().zip(x).enumerate() {
                    if self.accepted(j) {
                        acc.mac_raw(w, xj.convert(SIGNAL).raw());
                    }
                }
                pw_sigmoid(acc.finish(SIGNAL))
            })
            .collect();
        Ok(Prediction::from_outputs(y_hat))
    }

    /// W_or[o,j] ← W_or[o,j] − ((ŷ_o − y_o)·x_j) >> alpha_shift.
    ///
    /// The shift acts on the full-precision product; the result is rounded
    /// once into the weight format.
    pub fn sgd_update(
        &mut self,
        prediction: &Prediction,
        target: &[FxValue],
        x: &[FxValue],
    ) -> Result<()> {
        self.check_len(x.len())?;
        for (what, got) in [("prediction", prediction.y_hat.len()), ("target", target.len())] {
            if got != self.cfg.n_o {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: self.cfg.n_o,
                    got,
                });
            }
        }
        let fmt = self.cfg.weight_format;
        let product_frac = 2 * SIGNAL.frac_bits();
        let x_raw: Vec<i64> = x.iter().map(|v| v.convert(SIGNAL).raw()).collect();
        self.stats.updates += 1;
        for o in 0..self.cfg.n_o {
            let err = i128::from(prediction.y_hat[o].convert(SIGNAL).raw())
                - i128::from(target[o].convert(SIGNAL).raw());
            for (j, &xj) in x_raw.iter().enumerate() {
                if !self.accepted(j) {
                    continue;
                }
                let product = err * i128::from(xj);
                let delta = rescale(product >> self.cfg.alpha_shift, product_frac, fmt.frac_bits());
                let delta = fmt.saturate(delta);
                self.stats.record(delta, product != 0);
                if delta == 0 {
                    continue;
                }
                let w = &mut self.weights[o * self.n_r + j];
                let updated = i128::from(*w) - i128::from(delta);
                let clipped = fmt.saturate(updated);
                if i128::from(clipped) != updated {
                    if self.stats.saturated == 0 {
                        log::warn!("readout weight saturated at {fmt} bounds");
                    }
                    self.stats.saturated += 1;
                }
                *w = clipped;
            }
        }
        Ok(())
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n_r {
            return Err(Error::DimensionMismatch {
                what: "reservoir output",
                expected: self.n_r,
                got,
            });
        }
        Ok(())
    }

    /// Write the binary weight file at `path` and a JSON sidecar next to it.
    ///
    /// `extra` is stored verbatim in the sidecar under `"experiment"`.
    pub fn save_snapshot(&self, path: &Path, extra: &serde_json::Value) -> Result<()> {
        let bytes = encode_weights(&self.cfg.weight_format, self.cfg.n_o, self.n_r, &self.weights);
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&bytes).map_err(|e| Error::io(path, e))?;
        let sidecar = Sidecar {
            readout: self.cfg.clone(),
            n_r: self.n_r,
            experiment: extra.clone(),
        };
        let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
        let side = sidecar_path(path);
        fs::write(&side, json + "\n").map_err(|e| Error::io(&side, e))
    }

    /// Read a snapshot written by [`Readout::save_snapshot`].
    pub fn load_snapshot(path: &Path) -> Result<(Readout, serde_json::Value)> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let side = sidecar_path(path);
        let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
        let sidecar: Sidecar = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: side.clone(),
            line: e.line() as u64,
            message: e.to_string(),
        })?;
        let (format, n_o, n_r, weights) = decode_weights(&bytes).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message,
        })?;
        if format != sidecar.readout.weight_format || n_o != sidecar.readout.n_o || n_r != sidecar.n_r
        {
            return Err(Error::Config(format!(
                "{}: header disagrees with sidecar",
                path.display()
            )));
        }
        let mut readout = Readout {
            cfg: sidecar.readout,
            n_r,
            weights,
            mask: None,
            stats: GradientStats::default(),
        };
        readout.rebuild_mask();
        Ok((readout, sidecar.experiment))
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    readout: ReadoutConfig,
    n_r: usize,
    #[serde(default)]
    experiment: serde_json::Value,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Magic bytes opening a weight snapshot.
pub const SNAPSHOT_MAGIC: [u8; 4] = *b"ESNW";
pub const SNAPSHOT_VERSION: u8 = 1;
const HEADER_LEN: usize = 16;

/// Layout: magic, version, endianness (0 = little), total bits, fractional
/// bits, `n_o` u32, `n_r` u32, then `n_o·n_r` row-major i32 raw weights.
/// All integers little-endian.
pub fn encode_weights(format: &FxFormat, n_o: usize, n_r: usize, raw: &[i64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * raw.len());
    out.extend_from_slice(&SNAPSHOT_MAGIC);
    out.push(SNAPSHOT_VERSION);
    out.push(0);
    out.push(format.total_bits() as u8);
    out.push(format.frac_bits() as u8);
    out.extend_from_slice(&(n_o as u32).to_le_bytes());
    out.extend_from_slice(&(n_r as u32).to_le_bytes());
    for &w in raw {
        out.extend_from_slice(&(w as i32).to_le_bytes());
    }
    out
}

pub fn decode_weights(bytes: &[u8]) -> std::result::Result<(FxFormat, usize, usize, Vec<i64>), String> {
    if bytes.len() < HEADER_LEN {
        return Err("truncated header".into());
    }
    if bytes[..4] != SNAPSHOT_MAGIC {
        return Err("bad magic".into());
    }
    if bytes[4] != SNAPSHOT_VERSION {
        return Err(format!("unsupported version {}", bytes[4]));
    }
    if bytes[5] != 0 {
        return Err("only little-endian snapshots are supported".into());
    }
    let format = FxFormat::new(u32::from(bytes[6]), u32::from(bytes[7])).map_err(|e| e.to_string())?;
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (n_o, n_r) = (u32_at(8), u32_at(12));
    let body = &bytes[HEADER_LEN..];
    if body.len() != 4 * n_o * n_r {
        return Err(format!(
            "expected {} weight bytes, found {}",
            4 * n_o * n_r,
            body.len()
        ));
    }
    let weights = body
        .chunks_exact(4)
        .map(|c| {
            let raw = i64::from(i32::from_le_bytes(c.try_into().unwrap()));
            if raw < format.min_raw() || raw > format.max_raw() {
                Err(format!("weight {raw} outside {format}"))
            } else {
                Ok(raw)
            }
        })
        .collect::<std::result::Result<_, _>>()?;
    Ok((format, n_o, n_r, weights))
}
