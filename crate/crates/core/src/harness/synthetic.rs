//! Stand-in generators that emit the same raw layout as the real recordings.
//!
//! HAR: a chest accelerometer in uncalibrated ADC units (≈400 counts per g
//! around a 1950 offset), seven labelled activities per subject, each class
//! with its own gravity orientation and gait oscillation.
//!
//! PFC: two EMG channels at 4 kHz, ten movements, six trials. Each movement
//! is a band-limited noise burst riding on a posture-dependent baseline.

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::data::{
    DatasetBuilder, RawDataset, SplitPolicy, HAR_DEFAULT_CLASSES, HAR_SAMPLE_RATE,
    PFC_DEFAULT_CLASSES, PFC_SAMPLE_RATE, PFC_TEST_TRIAL,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticHar {
    pub subjects: usize,
    /// Approximate number of rows per subject, excluded activities included.
    pub samples_per_subject: usize,
    pub seed: u64,
}

impl Default for SyntheticHar {
    fn default() -> Self {
        SyntheticHar {
            subjects: 10,
            samples_per_subject: 24_000,
            seed: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HarRow {
    pub seq: u64,
    pub xyz: [i64; 3],
    pub label: i64,
}

struct Activity {
    gravity: [f64; 3],
    gait_hz: f64,
    gait_amp: [f64; 3],
    jitter: f64,
}

fn activity(label: i64) -> Activity {
    let still = |gravity, jitter| Activity { gravity, gait_hz: 0.0, gait_amp: [0.0; 3], jitter };
    match label {
        // working at computer: seated, leaning forward
        1 => still([0.55, 0.55, 0.60], 0.015),
        // standing
        2 => still([0.00, 1.00, 0.05], 0.010),
        // walking
        3 => Activity {
            gravity: [0.30, 0.92, 0.20],
            gait_hz: 1.9,
            gait_amp: [0.12, 0.25, 0.10],
            jitter: 0.02,
        },
        // stairs
        4 => Activity {
            gravity: [0.05, 0.88, 0.50],
            gait_hz: 1.4,
            gait_amp: [0.18, 0.35, 0.18],
            jitter: 0.03,
        },
        // standing up / walking transitions
        5 => Activity {
            gravity: [0.08, 0.98, 0.14],
            gait_hz: 1.2,
            gait_amp: [0.08, 0.15, 0.08],
            jitter: 0.04,
        },
        // walking and talking
        6 => Activity {
            gravity: [0.10, 0.97, 0.18],
            gait_hz: 1.7,
            gait_amp: [0.10, 0.20, 0.10],
            jitter: 0.04,
        },
        // talking while standing
        _ => still([0.06, 0.99, 0.12], 0.035),
    }
}

fn normal(std: f64) -> Normal<f64> {
    Normal::new(0.0, std).expect("finite non-negative std")
}

/// Rows of one subject, in recording order.
pub fn har_subject(cfg: &SyntheticHar, subject: usize) -> Vec<HarRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (subject as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let unit = normal(1.0);
    let offset: [f64; 3] = std::array::from_fn(|_| 1950.0 + 10.0 * unit.sample(&mut rng));
    let gain = 400.0 * (1.0 + 0.03 * unit.sample(&mut rng));
    let tilt: [f64; 3] = std::array::from_fn(|_| 0.02 * unit.sample(&mut rng));
    let tempo = 1.0 + 0.05 * unit.sample(&mut rng);

    // two runs per kept activity, one short run per mixed activity
    let mut plan: Vec<(i64, f64)> = Vec::new();
    for label in 1..=4 {
        plan.push((label, 0.11));
        plan.push((label, 0.11));
    }
    for label in 5..=7 {
        plan.push((label, 0.04));
    }
    plan.shuffle(&mut rng);

    let mut rows = Vec::with_capacity(cfg.samples_per_subject + 64);
    let mut seq = 0u64;
    let sensor = normal(2.0);
    for (label, share) in plan {
        let a = activity(label);
        let len = (cfg.samples_per_subject as f64 * share * rng.random_range(0.8..1.2)).round() as usize;
        let posture: [f64; 3] = std::array::from_fn(|i| a.gravity[i] + tilt[i] + 0.02 * unit.sample(&mut rng));
        let mut phase = rng.random_range(0.0..2.0 * PI);
        let harmonic_phase = rng.random_range(0.0..2.0 * PI);
        let mut drift = [0.0f64; 3];
        for _ in 0..len {
            let f = a.gait_hz * tempo * (1.0 + 0.03 * unit.sample(&mut rng));
            phase += 2.0 * PI * f / HAR_SAMPLE_RATE;
            let mut xyz = [0i64; 3];
            for i in 0..3 {
                drift[i] = 0.995 * drift[i] + 0.1 * a.jitter * unit.sample(&mut rng);
                let gait = a.gait_amp[i] * (phase.sin() + 0.3 * (2.0 * phase + harmonic_phase).sin());
                let g = posture[i] + gait + drift[i] + a.jitter * unit.sample(&mut rng);
                xyz[i] = (offset[i] + gain * g + sensor.sample(&mut rng)).round() as i64;
            }
            rows.push(HarRow { seq, xyz, label });
            seq += 1;
        }
    }
    rows
}

/// In-memory dataset with the same mapping and exclusion rules as the loader.
pub fn synthetic_har(cfg: &SyntheticHar, classes: &[i64]) -> RawDataset {
    let classes = if classes.is_empty() { &HAR_DEFAULT_CLASSES[..] } else { classes };
    let mut b = DatasetBuilder::new(classes, 3);
    for s in 0..cfg.subjects {
        b.break_run();
        for r in har_subject(cfg, s) {
            b.push(s as u32, r.seq, r.xyz.map(|v| v as f64).to_vec(), r.label);
        }
    }
    b.finish(Some(HAR_SAMPLE_RATE), SplitPolicy::RunFraction)
}

/// Write one `seq,x,y,z,label` file per subject into `dir`.
pub fn write_har(dir: &Path, cfg: &SyntheticHar) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    (0..cfg.subjects)
        .map(|s| {
            let path = dir.join(format!("{}.csv", s + 1));
            let mut out = std::io::BufWriter::new(
                std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?,
            );
            for r in har_subject(cfg, s) {
                writeln!(out, "{},{},{},{},{}", r.seq, r.xyz[0], r.xyz[1], r.xyz[2], r.label)
                    .map_err(|e| Error::io(&path, e))?;
            }
            out.flush().map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticPfc {
    pub movements: usize,
    pub trials: u32,
    pub samples_per_burst: usize,
    pub seed: u64,
}

impl Default for SyntheticPfc {
    fn default() -> Self {
        SyntheticPfc {
            movements: 10,
            trials: 6,
            samples_per_burst: 1500,
            seed: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PfcRow {
    pub trial: u32,
    pub channels: [f64; 2],
    pub label: i64,
}

pub fn pfc_rows(cfg: &SyntheticPfc) -> Vec<PfcRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let unit = normal(1.0);
    // per-movement signature: burst centre frequency, channel gains, baselines
    let signatures: Vec<(f64, [f64; 2], [f64; 2])> = (0..cfg.movements)
        .map(|m| {
            let t = m as f64 / cfg.movements.max(1) as f64;
            let centre = 60.0 + 340.0 * t;
            let gains = [0.2 + 0.8 * (PI * t).sin(), 0.2 + 0.8 * (PI * t).cos().abs()];
            let base = [0.3 * (2.0 * PI * t).cos(), 0.3 * (2.0 * PI * t).sin()];
            (centre, gains, base)
        })
        .collect();
    let mut rows = Vec::new();
    for trial in 1..=cfg.trials {
        for (m, &(centre, gains, base)) in signatures.iter().enumerate() {
            // two-pole resonator driven by white noise gives band-limited bursts
            let r = 0.97;
            let w = 2.0 * PI * centre / PFC_SAMPLE_RATE;
            let (a1, a2) = (2.0 * r * w.cos(), -r * r);
            let mut hist = [[0.0f64; 2]; 2];
            let drift: [f64; 2] = std::array::from_fn(|_| 0.03 * unit.sample(&mut rng));
            for n in 0..cfg.samples_per_burst {
                let env = (PI * n as f64 / cfg.samples_per_burst as f64).sin();
                let mut ch = [0.0; 2];
                for c in 0..2 {
                    let y = a1 * hist[c][0] + a2 * hist[c][1] + unit.sample(&mut rng);
                    hist[c][1] = hist[c][0];
                    hist[c][0] = y;
                    ch[c] = base[c] + drift[c] + 0.02 * gains[c] * env * y + 0.01 * unit.sample(&mut rng);
                }
                rows.push(PfcRow {
                    trial,
                    channels: ch,
                    label: m as i64 + 1,
                });
            }
        }
    }
    rows
}

pub fn synthetic_pfc(cfg: &SyntheticPfc, classes: &[i64]) -> RawDataset {
    let classes = if classes.is_empty() { &PFC_DEFAULT_CLASSES[..] } else { classes };
    let mut b = DatasetBuilder::new(classes, 2);
    let mut last = None;
    for (seq, r) in pfc_rows(cfg).into_iter().enumerate() {
        if last != Some(r.trial) {
            b.break_run();
            last = Some(r.trial);
        }
        b.push(r.trial, seq as u64, r.channels.to_vec(), r.label);
    }
    b.finish(
        Some(PFC_SAMPLE_RATE),
        SplitPolicy::HeldOutGroups(vec![PFC_TEST_TRIAL]),
    )
}

/// Write `trial,ch1,ch2,label` rows to `path`.
pub fn write_pfc(path: &Path, cfg: &SyntheticPfc) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut out =
        std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    for r in pfc_rows(cfg) {
        writeln!(out, "{},{:.6},{:.6},{}", r.trial, r.channels[0], r.channels[1], r.label)
            .map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
