//! Linear-feedback shift registers for on-the-fly weight generation.
//!
//! Registers are Fibonacci form: the feedback bit is the parity of the
//! tapped bits (tap `t` reads bit `t - 1`), the register shifts left and the
//! feedback enters at bit 0. A word is produced by clocking the register
//! `width` times so every bit of the returned register is fresh.
//!
//! Each neuron owns one register per role. Seeds are derived from a
//! per-role base seed and the neuron index, so weights never need storing:
//! reseeding the register replays the same stream.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed_point::{FxFormat, FxMatrix, FxValue};

/// Primitive feedback polynomials, indexed by register width.
const DEFAULT_TAPS: &[&[u8]] = &[
    &[],
    &[],
    &[2, 1],
    &[3, 2],
    &[4, 3],
    &[5, 3],
    &[6, 5],
    &[7, 6],
    &[8, 6, 5, 4],
    &[9, 5],
    &[10, 7],
    &[11, 9],
    &[12, 6, 4, 1],
    &[13, 4, 3, 1],
    &[14, 5, 3, 1],
    &[15, 14],
    &[16, 15, 13, 4],
    &[17, 14],
    &[18, 11],
    &[19, 6, 2, 1],
    &[20, 17],
    &[21, 19],
    &[22, 21],
    &[23, 18],
    &[24, 23, 22, 17],
    &[25, 22],
    &[26, 6, 2, 1],
    &[27, 5, 2, 1],
    &[28, 25],
    &[29, 27],
    &[30, 6, 4, 1],
    &[31, 28],
    &[32, 22, 2, 1],
];

/// Maximal-length taps for a register of `width` bits (2..=32).
pub fn default_taps(width: u32) -> Option<&'static [u8]> {
    DEFAULT_TAPS
        .get(width as usize)
        .copied()
        .filter(|t| !t.is_empty())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lfsr {
    register: u32,
    tap_mask: u32,
    width: u32,
}

impl Lfsr {
    pub fn new(seed: u32, width: u32, taps: &[u8]) -> Result<Self> {
        if !(2..=32).contains(&width) {
            return Err(Error::UnsupportedLfsrWidth(width));
        }
        let mut tap_mask = 0u32;
        for &t in taps {
            let t = u32::from(t);
            if t == 0 || t > width {
                return Err(Error::InvalidArgument(format!(
                    "tap {t} outside a {width}-bit register"
                )));
            }
            tap_mask |= 1 << (t - 1);
        }
        let register = seed & width_mask(width);
        if register == 0 {
            return Err(Error::ZeroLfsrState);
        }
        Ok(Lfsr {
            register,
            tap_mask,
            width,
        })
    }

    pub fn with_default_taps(seed: u32, width: u32) -> Result<Self> {
        let taps = default_taps(width).ok_or(Error::UnsupportedLfsrWidth(width))?;
        Self::new(seed, width, taps)
    }

    pub fn register(&self) -> u32 {
        self.register
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Clock once; returns the feedback bit shifted in.
    #[inline]
    pub fn step(&mut self) -> bool {
        let fb = (self.register & self.tap_mask).count_ones() & 1;
        self.register = ((self.register << 1) | fb) & width_mask(self.width);
        fb == 1
    }

    /// Clock `width` times and return the resulting register.
    #[inline]
    pub fn next_word(&mut self) -> u32 {
        for _ in 0..self.width {
            self.step();
        }
        self.register
    }
}

#[inline]
fn width_mask(width: u32) -> u32 {
    if width >= 32 {
        u32::MAX
    } else {
        (1u32 << width) - 1
    }
}

/// Resolution of the sparsity comparator, in bits.
pub const MASK_BITS: u32 = 10;

/// Comparator level for a connection probability: `floor(level * 2^10)`.
pub fn mask_threshold(level: f64) -> u32 {
    let full = 1u32 << MASK_BITS;
    ((level.clamp(0.0, 1.0) * f64::from(full)).floor() as u32).min(full)
}

/// Accept when the low [`MASK_BITS`] bits of the next word fall below `threshold`.
#[inline]
pub fn sparsity_mask(lfsr: &mut Lfsr, threshold: u32) -> bool {
    (lfsr.next_word() & ((1 << MASK_BITS) - 1)) < threshold
}

/// What a register stream is used for. Each role has its own base seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StreamRole {
    /// Input-to-reservoir weights.
    Input,
    /// Recurrent reservoir weights.
    Recurrent,
    /// Recurrent fan-in selection.
    Sparsity,
    /// Output-to-reservoir feedback weights.
    Feedback,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightGenConfig {
    pub ff_seed: u32,
    pub fb_seed: u32,
    pub s_seed: u32,
    pub feedback_seed: u32,
    /// Right shift applied to recurrent weights to keep the spectral radius below one.
    pub esp_shift: u32,
    /// Right shift applied to input weights.
    #[serde(default)]
    pub input_shift: u32,
    pub weight_format: FxFormat,
    pub lfsr_width: u32,
}

impl Default for WeightGenConfig {
    fn default() -> Self {
        Self::from_global_seed(1)
    }
}

impl WeightGenConfig {
    /// Independent role seeds fanned out from one global seed.
    pub fn from_global_seed(seed: u64) -> Self {
        let width = 16;
        let mut seeds = [0u32; 4];
        let mut state = seed;
        let mut i = 0;
        while i < seeds.len() {
            let s = (splitmix64(&mut state) as u32) & width_mask(width);
            if s != 0 && !seeds[..i].contains(&s) {
                seeds[i] = s;
                i += 1;
            }
        }
        WeightGenConfig {
            ff_seed: seeds[0],
            fb_seed: seeds[1],
            s_seed: seeds[2],
            feedback_seed: seeds[3],
            esp_shift: 2,
            input_shift: 0,
            weight_format: FxFormat::SQ0_15,
            lfsr_width: width,
        }
    }

    pub fn validate(&self) -> Result<()> {
        default_taps(self.lfsr_width).ok_or(Error::UnsupportedLfsrWidth(self.lfsr_width))?;
        let mask = width_mask(self.lfsr_width);
        let seeds = [
            self.ff_seed & mask,
            self.fb_seed & mask,
            self.s_seed & mask,
            self.feedback_seed & mask,
        ];
        if seeds.contains(&0) {
            return Err(Error::ZeroLfsrState);
        }
        for i in 0..seeds.len() {
            if seeds[i + 1..].contains(&seeds[i]) {
                return Err(Error::Config(
                    "LFSR role seeds must be pairwise distinct".into(),
                ));
            }
        }
        Ok(())
    }

    fn base_seed(&self, role: StreamRole) -> u32 {
        match role {
            StreamRole::Input => self.ff_seed,
            StreamRole::Recurrent => self.fb_seed,
            StreamRole::Sparsity => self.s_seed,
            StreamRole::Feedback => self.feedback_seed,
        }
    }

    /// Freshly seeded register for neuron `index` in the given role.
    pub fn lfsr(&self, role: StreamRole, index: usize) -> Lfsr {
        let seed = derive_seed(self.base_seed(role), index, self.lfsr_width);
        Lfsr::with_default_taps(seed, self.lfsr_width).expect("derived seeds are nonzero")
    }

    /// Draw one weight and scale it by `shift`.
    ///
    /// The word's MSB is the sign; the remaining bits are the magnitude in
    /// raw units of `weight_format`.
    #[inline]
    pub fn gen_weight(&self, lfsr: &mut Lfsr, shift: u32) -> FxValue {
        let word = lfsr.next_word();
        let sign_bit = 1u32 << (self.lfsr_width - 1);
        let magnitude = i64::from(word & (sign_bit - 1));
        let raw = if word & sign_bit != 0 {
            -magnitude
        } else {
            magnitude
        };
        FxValue::from_raw(raw, self.weight_format).shift_right(shift)
    }

    pub fn gen_input_weight(&self, lfsr: &mut Lfsr) -> FxValue {
        self.gen_weight(lfsr, self.input_shift)
    }

    pub fn gen_recurrent_weight(&self, lfsr: &mut Lfsr) -> FxValue {
        self.gen_weight(lfsr, self.esp_shift)
    }
}

/// Per-neuron seed: `((base + index * K) mod (2^w - 1)) + 1`.
///
/// `K` is the first value at or above a fixed odd constant that is coprime
/// with `2^w - 1`, so indices below the period never collide and the result
/// is never zero.
pub fn derive_seed(base: u32, index: usize, width: u32) -> u32 {
    let period = u64::from(width_mask(width));
    let mut k = 0x9E37_79B1u64 % period;
    while gcd(k, period) != 1 {
        k += 1;
    }
    let mixed = (u64::from(base) + (index as u64 % period) * k) % period;
    (mixed + 1) as u32
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Materialize the recurrent weight matrix `W_r` exactly as the streaming
/// reservoir consumes it: row `j` is neuron `j`'s fan-in.
pub fn build_reservoir_matrix(cfg: &WeightGenConfig, n_r: usize, sparsity: f64) -> FxMatrix {
    let threshold = mask_threshold(sparsity);
    let mut m = FxMatrix::zeros(n_r, n_r, cfg.weight_format);
    for j in 0..n_r {
        let mut fb = cfg.lfsr(StreamRole::Recurrent, j);
        let mut sel = cfg.lfsr(StreamRole::Sparsity, j);
        for k in 0..n_r {
            let w = cfg.gen_recurrent_weight(&mut fb);
            if sparsity_mask(&mut sel, threshold) {
                m.set(j, k, w);
            }
        }
    }
    m
}

/// Materialize the input weight matrix `W_ri` (`n_r × n_i`).
pub fn build_input_matrix(cfg: &WeightGenConfig, n_r: usize, n_i: usize) -> FxMatrix {
    let mut m = FxMatrix::zeros(n_r, n_i, cfg.weight_format);
    for j in 0..n_r {
        let mut ff = cfg.lfsr(StreamRole::Input, j);
        for i in 0..n_i {
            m.set(j, i, cfg.gen_input_weight(&mut ff));
        }
    }
    m
}
