use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Uniform,
    Gaussian,
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(NoiseKind::Uniform),
            "gaussian" | "normal" => Ok(NoiseKind::Gaussian),
            other => Err(Error::InvalidArgument(format!("unknown noise kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Target SNR in dB; `f64::INFINITY` disables the noise.
    pub snr_db: f64,
    pub kind: NoiseKind,
    /// Probability that a sample is corrupted.
    pub bernoulli_p: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            snr_db: f64::INFINITY,
            kind: NoiseKind::Gaussian,
            bernoulli_p: 0.5,
            seed: 0,
        }
    }
}

/// Corrupt each sample with probability `bernoulli_p`.
///
/// Noise is zero-mean and calibrated per feature so that the feature's mean
/// power over the whole signal divided by the noise variance equals the
/// target SNR. All features of a corrupted sample receive noise.
pub fn inject_noise(signal: &[Vec<f64>], spec: &NoiseSpec) -> Result<Vec<Vec<f64>>> {
    if !(0.0..=1.0).contains(&spec.bernoulli_p) {
        return Err(Error::InvalidArgument(format!(
            "bernoulli_p {} outside [0, 1]",
            spec.bernoulli_p
        )));
    }
    if spec.snr_db.is_nan() || spec.snr_db == f64::NEG_INFINITY {
        return Err(Error::InvalidArgument("SNR must be a number".into()));
    }
    let n_feat = signal.first().map_or(0, Vec::len);
    let powers: Vec<f64> = (0..n_feat)
        .map(|f| signal.iter().map(|s| s[f] * s[f]).sum::<f64>() / signal.len() as f64)
        .collect();
    if powers.iter().all(|&p| p == 0.0) {
        return Err(Error::ZeroPowerSignal);
    }
    if spec.snr_db == f64::INFINITY || spec.bernoulli_p == 0.0 {
        return Ok(signal.to_vec());
    }
    let ratio = 10f64.powf(spec.snr_db / 10.0);
    let sigmas: Vec<f64> = powers.iter().map(|p| (p / ratio).sqrt()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let unit_normal = Normal::new(0.0, 1.0).expect("valid normal");
    // unit variance: half-width sqrt(3)
    let unit_uniform = Uniform::new_inclusive(-3f64.sqrt(), 3f64.sqrt()).expect("valid range");
    Ok(signal
        .iter()
        .map(|sample| {
            if !rng.random_bool(spec.bernoulli_p) {
                return sample.clone();
            }
            sample
                .iter()
                .zip(&sigmas)
                .map(|(&v, &s)| {
                    let z = match spec.kind {
                        NoiseKind::Gaussian => unit_normal.sample(&mut rng),
                        NoiseKind::Uniform => unit_uniform.sample(&mut rng),
                    };
                    v + s * z
                })
                .collect()
        })
        .collect())
}

/// Empirical SNR in dB over the samples that differ between `clean` and `noisy`.
pub fn measure_snr_db(clean: &[Vec<f64>], noisy: &[Vec<f64>]) -> Option<f64> {
    let n_feat = clean.first()?.len();
    let signal: f64 = clean.iter().flatten().map(|v| v * v).sum::<f64>() / clean.len() as f64;
    let mut noise = 0.0;
    let mut corrupted = 0usize;
    for (c, n) in clean.iter().zip(noisy) {
        if c != n {
            corrupted += 1;
            noise += c.iter().zip(n).map(|(a, b)| (b - a) * (b - a)).sum::<f64>();
        }
    }
    if corrupted == 0 || n_feat == 0 {
        return None;
    }
    Some(10.0 * (signal / (noise / corrupted as f64)).log10())
}
