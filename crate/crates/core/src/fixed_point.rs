//! Saturating two's-complement fixed-point arithmetic.
//!
//! Every datapath on the chip is modelled with [`FxValue`]: a raw integer
//! tagged with its [`FxFormat`]. All operations saturate at the format
//! bounds and round to nearest with ties away from zero. Weighted sums go
//! through [`Accumulator`], which keeps the exact sum of full-precision
//! products and rounds once on writeback.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Width description of a signed fixed-point number.
///
/// `total_bits` includes the sign bit; integer bits are
/// `total_bits - 1 - frac_bits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawFormat", into = "RawFormat")]
pub struct FxFormat {
    total_bits: u8,
    frac_bits: u8,
}

#[derive(Serialize, Deserialize)]
struct RawFormat {
    total_bits: u32,
    frac_bits: u32,
}

impl TryFrom<RawFormat> for FxFormat {
    type Error = Error;

    fn try_from(raw: RawFormat) -> Result<Self> {
        FxFormat::new(raw.total_bits, raw.frac_bits)
    }
}

impl From<FxFormat> for RawFormat {
    fn from(f: FxFormat) -> Self {
        RawFormat {
            total_bits: f.total_bits(),
            frac_bits: f.frac_bits(),
        }
    }
}

impl FxFormat {
    /// Signals: 1 sign, 3 integer and 12 fractional bits.
    pub const SQ3_12: FxFormat = FxFormat {
        total_bits: 16,
        frac_bits: 12,
    };
    /// LFSR-generated reservoir weights, magnitude in (-1, 1).
    pub const SQ0_15: FxFormat = FxFormat {
        total_bits: 16,
        frac_bits: 15,
    };
    /// Readout weights: 24 bits with 2^-21 resolution.
    pub const READOUT_24: FxFormat = FxFormat {
        total_bits: 24,
        frac_bits: 21,
    };

    pub fn new(total_bits: u32, frac_bits: u32) -> Result<Self> {
        if !(2..=32).contains(&total_bits) || frac_bits >= total_bits {
            return Err(Error::InvalidFormat {
                total_bits,
                frac_bits,
            });
        }
        Ok(FxFormat {
            total_bits: total_bits as u8,
            frac_bits: frac_bits as u8,
        })
    }

    pub fn total_bits(self) -> u32 {
        u32::from(self.total_bits)
    }

    pub fn frac_bits(self) -> u32 {
        u32::from(self.frac_bits)
    }

    pub fn max_raw(self) -> i64 {
        (1i64 << (self.total_bits - 1)) - 1
    }

    pub fn min_raw(self) -> i64 {
        -(1i64 << (self.total_bits - 1))
    }

    /// Raw encoding of 1.0, saturated if the format cannot represent it.
    pub fn one_raw(self) -> i64 {
        (1i64 << self.frac_bits).min(self.max_raw())
    }

    /// Value of one unit in the last place.
    pub fn resolution(self) -> f64 {
        (-f64::from(self.frac_bits)).exp2()
    }

    pub fn max_value(self) -> f64 {
        self.max_raw() as f64 * self.resolution()
    }

    pub fn min_value(self) -> f64 {
        self.min_raw() as f64 * self.resolution()
    }

    /// Clamp a wide raw integer into this format.
    #[inline]
    pub fn saturate(self, raw: i128) -> i64 {
        raw.clamp(i128::from(self.min_raw()), i128::from(self.max_raw())) as i64
    }
}

impl fmt::Display for FxFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let int_bits = self.total_bits - 1 - self.frac_bits;
        write!(f, "SQ{}.{}", int_bits, self.frac_bits)
    }
}

/// Divide by `2^shift`, rounding to nearest with ties away from zero.
#[inline]
pub fn round_shift(value: i128, shift: u32) -> i128 {
    if shift == 0 {
        return value;
    }
    let half = 1i128 << (shift - 1);
    if value >= 0 {
        (value + half) >> shift
    } else {
        -((-value + half) >> shift)
    }
}

/// Re-express `raw` with `from_frac` fractional bits at `to_frac` bits, rounding.
#[inline]
pub fn rescale(raw: i128, from_frac: u32, to_frac: u32) -> i128 {
    if from_frac >= to_frac {
        round_shift(raw, from_frac - to_frac)
    } else {
        raw << (to_frac - from_frac)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FxValue {
    raw: i64,
    format: FxFormat,
}

impl FxValue {
    /// Build from a raw integer, saturating it into range.
    pub fn from_raw(raw: i64, format: FxFormat) -> Self {
        FxValue {
            raw: format.saturate(i128::from(raw)),
            format,
        }
    }

    pub fn zero(format: FxFormat) -> Self {
        FxValue { raw: 0, format }
    }

    pub fn one(format: FxFormat) -> Self {
        FxValue {
            raw: format.one_raw(),
            format,
        }
    }

    pub fn max(format: FxFormat) -> Self {
        FxValue {
            raw: format.max_raw(),
            format,
        }
    }

    pub fn min(format: FxFormat) -> Self {
        FxValue {
            raw: format.min_raw(),
            format,
        }
    }

    /// Nearest representable value, ties away from zero, saturating.
    /// NaN maps to zero.
    pub fn quantize(real: f64, format: FxFormat) -> Self {
        if real.is_nan() {
            return Self::zero(format);
        }
        let scaled = (real * f64::from(format.frac_bits()).exp2()).round();
        let raw = if scaled >= format.max_raw() as f64 {
            format.max_raw()
        } else if scaled <= format.min_raw() as f64 {
            format.min_raw()
        } else {
            scaled as i64
        };
        FxValue { raw, format }
    }

    #[inline]
    pub fn raw(self) -> i64 {
        self.raw
    }

    #[inline]
    pub fn format(self) -> FxFormat {
        self.format
    }

    pub fn to_f64(self) -> f64 {
        self.raw as f64 * self.format.resolution()
    }

    pub fn is_saturated(self) -> bool {
        self.raw == self.format.max_raw() || self.raw == self.format.min_raw()
    }

    /// Saturating sum of two values in the same format.
    pub fn add(self, rhs: FxValue) -> Result<FxValue> {
        self.check_format(rhs)?;
        Ok(self.add_unchecked(rhs))
    }

    /// Saturating difference of two values in the same format.
    pub fn sub(self, rhs: FxValue) -> Result<FxValue> {
        self.check_format(rhs)?;
        Ok(FxValue {
            raw: self
                .format
                .saturate(i128::from(self.raw) - i128::from(rhs.raw)),
            format: self.format,
        })
    }

    #[inline]
    fn add_unchecked(self, rhs: FxValue) -> FxValue {
        FxValue {
            raw: self
                .format
                .saturate(i128::from(self.raw) + i128::from(rhs.raw)),
            format: self.format,
        }
    }

    fn check_format(self, rhs: FxValue) -> Result<()> {
        if self.format != rhs.format {
            return Err(Error::FormatMismatch {
                left: self.format,
                right: rhs.format,
            });
        }
        Ok(())
    }

    /// Full-precision product rounded into `out`.
    pub fn mul(self, rhs: FxValue, out: FxFormat) -> FxValue {
        let product = i128::from(self.raw) * i128::from(rhs.raw);
        let frac = self.format.frac_bits() + rhs.format.frac_bits();
        FxValue {
            raw: out.saturate(rescale(product, frac, out.frac_bits())),
            format: out,
        }
    }

    /// Arithmetic right shift of the raw word (floor toward negative infinity).
    pub fn shift_right(self, shift: u32) -> FxValue {
        let shift = shift.min(63);
        FxValue {
            raw: self.raw >> shift,
            format: self.format,
        }
    }

    /// Re-express in another format, rounding and saturating as needed.
    pub fn convert(self, format: FxFormat) -> FxValue {
        let raw = rescale(
            i128::from(self.raw),
            self.format.frac_bits(),
            format.frac_bits(),
        );
        FxValue {
            raw: format.saturate(raw),
            format,
        }
    }

    /// Saturating negation.
    pub fn neg(self) -> FxValue {
        FxValue {
            raw: self.format.saturate(-i128::from(self.raw)),
            format: self.format,
        }
    }

    /// Clamp into `[lo, hi]`, both given in this value's format.
    pub fn clamp_raw(self, lo: i64, hi: i64) -> FxValue {
        FxValue {
            raw: self.raw.clamp(lo, hi),
            format: self.format,
        }
    }
}

impl fmt::Display for FxValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

/// Wide multiply-accumulate register.
///
/// Products are summed exactly at `frac_bits` fractional bits in an `i128`;
/// saturation only happens in [`Accumulator::finish`].
#[derive(Clone, Copy, Debug)]
pub struct Accumulator {
    sum: i128,
    frac_bits: u32,
}

impl Accumulator {
    pub fn new(frac_bits: u32) -> Self {
        Accumulator { sum: 0, frac_bits }
    }

    /// Accumulator sized for products of `a` and `b` formats.
    pub fn for_product(a: FxFormat, b: FxFormat) -> Self {
        Self::new(a.frac_bits() + b.frac_bits())
    }

    #[inline]
    pub fn mac(&mut self, a: FxValue, b: FxValue) {
        debug_assert_eq!(a.format.frac_bits() + b.format.frac_bits(), self.frac_bits);
        self.sum += i128::from(a.raw) * i128::from(b.raw);
    }

    /// Multiply-accumulate on raw words whose fractional bits sum to `frac_bits`.
    #[inline]
    pub fn mac_raw(&mut self, a: i64, b: i64) {
        self.sum += i128::from(a) * i128::from(b);
    }

    /// Add a value, aligning it to the accumulator's fractional bits.
    pub fn add(&mut self, v: FxValue) {
        self.sum += rescale(i128::from(v.raw), v.format.frac_bits(), self.frac_bits);
    }

    pub fn raw_sum(&self) -> i128 {
        self.sum
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    /// Round and saturate the exact sum into `format`.
    pub fn finish(self, format: FxFormat) -> FxValue {
        FxValue {
            raw: format.saturate(rescale(self.sum, self.frac_bits, format.frac_bits())),
            format,
        }
    }
}

/// Dense matrix of fixed-point weights, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FxMatrix {
    rows: usize,
    cols: usize,
    format: FxFormat,
    raw: Vec<i64>,
}

impl FxMatrix {
    pub fn zeros(rows: usize, cols: usize, format: FxFormat) -> Self {
        FxMatrix {
            rows,
            cols,
            format,
            raw: vec![0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn format(&self) -> FxFormat {
        self.format
    }

    pub fn get(&self, r: usize, c: usize) -> FxValue {
        FxValue::from_raw(self.raw[r * self.cols + c], self.format)
    }

    pub fn set(&mut self, r: usize, c: usize, v: FxValue) {
        debug_assert_eq!(v.format(), self.format);
        self.raw[r * self.cols + c] = v.raw();
    }

    pub fn count_nonzero(&self) -> usize {
        self.raw.iter().filter(|&&r| r != 0).count()
    }

    /// Real-valued copy for linear-algebra analysis.
    pub fn to_dmatrix(&self) -> nalgebra::DMatrix<f64> {
        let res = self.format.resolution();
        nalgebra::DMatrix::from_row_iterator(
            self.rows,
            self.cols,
            self.raw.iter().map(|&r| r as f64 * res),
        )
    }
}
