//! Four-tap FIR pre-filters.
//!
//! The low-pass is a Hamming-windowed sinc normalized to unity DC gain. The
//! high-pass is its complement around a one-sample delay, `δ[n−1] − h[n]`,
//! so its DC gain is exactly zero.

use crate::error::{Error, Result};
use crate::harness::config::FilterMode;
use crate::harness::data::Segment;

pub const FILTER_TAPS: usize = 4;
/// Cut-off used for both filters.
pub const CUTOFF_HZ: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterKind {
    Lpf,
    Hpf,
}

fn check_rate(fc: f64, fs: f64) -> Result<()> {
    if !(fs > 0.0 && fs.is_finite()) {
        return Err(Error::UnknownSampleRate);
    }
    if !(fc > 0.0 && fc < fs / 2.0) {
        return Err(Error::InvalidArgument(format!(
            "cut-off {fc} Hz must lie in (0, {}) Hz",
            fs / 2.0
        )));
    }
    Ok(())
}

pub fn design_lpf(fc: f64, fs: f64) -> Result<[f64; FILTER_TAPS]> {
    check_rate(fc, fs)?;
    let wc = 2.0 * fc / fs;
    let mid = (FILTER_TAPS - 1) as f64 / 2.0;
    let mut h = [0.0; FILTER_TAPS];
    for (n, tap) in h.iter_mut().enumerate() {
        let m = n as f64 - mid;
        let sinc = if m == 0.0 {
            1.0
        } else {
            (std::f64::consts::PI * wc * m).sin() / (std::f64::consts::PI * wc * m)
        };
        let window = 0.54
            - 0.46 * (2.0 * std::f64::consts::PI * n as f64 / (FILTER_TAPS - 1) as f64).cos();
        *tap = wc * sinc * window;
    }
    let sum: f64 = h.iter().sum();
    for tap in &mut h {
        *tap /= sum;
    }
    Ok(h)
}

pub fn design_hpf(fc: f64, fs: f64) -> Result<[f64; FILTER_TAPS]> {
    let lpf = design_lpf(fc, fs)?;
    let mut h = lpf.map(|v| -v);
    h[1] += 1.0;
    Ok(h)
}

pub fn design(kind: FilterKind, fc: f64, fs: f64) -> Result<[f64; FILTER_TAPS]> {
    match kind {
        FilterKind::Lpf => design_lpf(fc, fs),
        FilterKind::Hpf => design_hpf(fc, fs),
    }
}

/// Causal FIR with zero initial history.
pub fn fir(signal: &[f64], taps: &[f64]) -> Vec<f64> {
    (0..signal.len())
        .map(|n| {
            taps.iter()
                .enumerate()
                .take(n + 1)
                .map(|(k, &h)| h * signal[n - k])
                .sum()
        })
        .collect()
}

/// Causal FIR whose history is primed with the first sample, as if the
/// signal had been constant before the segment began. Avoids the start-up
/// transient a zero history produces on signals with a large offset.
pub fn fir_primed(signal: &[f64], taps: &[f64]) -> Vec<f64> {
    let Some(&first) = signal.first() else {
        return Vec::new();
    };
    (0..signal.len())
        .map(|n| {
            taps.iter()
                .enumerate()
                .map(|(k, &h)| h * if k <= n { signal[n - k] } else { first })
                .sum()
        })
        .collect()
}

/// Filter one feature stream.
pub fn fir_filter(signal: &[f64], kind: FilterKind, fs: Option<f64>) -> Result<Vec<f64>> {
    let taps = design(kind, CUTOFF_HZ, fs.ok_or(Error::UnknownSampleRate)?)?;
    Ok(fir(signal, &taps))
}

/// Replace the features of every segment according to `mode`. Each segment
/// is filtered independently, with primed history, since runs are not
/// contiguous in time.
pub fn apply_filters(segments: &mut [Segment], mode: FilterMode, fs: Option<f64>) -> Result<()> {
    if mode == FilterMode::None {
        return Ok(());
    }
    let fs = fs.ok_or(Error::UnknownSampleRate)?;
    let lpf = design_lpf(CUTOFF_HZ, fs)?;
    let hpf = design_hpf(CUTOFF_HZ, fs)?;
    for seg in segments {
        let Some(first) = seg.records.first() else {
            continue;
        };
        let n_raw = first.features.len();
        let columns: Vec<Vec<f64>> = (0..n_raw)
            .map(|f| seg.records.iter().map(|r| r.features[f]).collect())
            .collect();
        let low: Vec<Vec<f64>> = columns.iter().map(|c| fir_primed(c, &lpf)).collect();
        let high: Vec<Vec<f64>> = columns.iter().map(|c| fir_primed(c, &hpf)).collect();
        for (t, rec) in seg.records.iter_mut().enumerate() {
            let mut out = Vec::with_capacity(mode.n_inputs(n_raw));
            if mode == FilterMode::Augment {
                out.extend_from_slice(&rec.features);
            }
            out.extend(low.iter().map(|c| c[t]));
            out.extend(high.iter().map(|c| c[t]));
            rec.features = out;
        }
    }
    Ok(())
}
