use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lfsr::{build_reservoir_matrix, WeightGenConfig};

const REL_TOL: f64 = 1e-6;
const MAX_ITERS: usize = 10_000;
/// Consecutive iterations within tolerance before declaring convergence.
const STABLE_ITERS: usize = 3;
const BLOCK: usize = 8;
const SCHUR_ITERS: usize = 1000;
const MAX_SHIFT: u32 = 15;
/// Shifts predicted within this factor of the margin are measured.
const GUARD_BAND: f64 = 1.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub radius: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximal |eigenvalue| by block power iteration.
///
/// A block of up to eight vectors is iterated and orthonormalized each
/// step; the radius estimate is the largest |Ritz value| of the projected
/// matrix, which also captures complex-conjugate dominant pairs that a
/// single-vector iteration cannot settle on.
pub fn spectral_radius(w: &DMatrix<f64>) -> Result<SpectralEstimate> {
    let n = w.nrows();
    if n != w.ncols() {
        return Err(Error::DimensionMismatch {
            what: "square matrix columns",
            expected: n,
            got: w.ncols(),
        });
    }
    if n == 0 || w.iter().all(|&v| v == 0.0) {
        return Ok(SpectralEstimate {
            radius: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let p = n.min(BLOCK);
    let mut state = 0x2545_F491_4F6C_DD1Du64;
    let start = DMatrix::from_fn(n, p, |_, _| {
        (crate::lfsr::splitmix64(&mut state) >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    });
    let mut q = start.qr().q();
    let mut prev = f64::NAN;
    let mut stable = 0;
    let mut radius = 0.0;
    for it in 1..=MAX_ITERS {
        let z = w * &q;
        let h = q.transpose() * &z;
        radius = ritz_radius(&h).unwrap_or_else(|| {
            // Schur can stall on clustered spectra; column growth is a safe stand-in
            z.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
        });
        if (radius - prev).abs() <= REL_TOL * radius.max(f64::MIN_POSITIVE) {
            stable += 1;
            if stable >= STABLE_ITERS {
                return Ok(SpectralEstimate {
                    radius,
                    iterations: it,
                    converged: true,
                });
            }
        } else {
            stable = 0;
        }
        prev = radius;
        if z.norm() == 0.0 {
            // nilpotent on the current block
            return Ok(SpectralEstimate {
                radius: 0.0,
                iterations: it,
                converged: true,
            });
        }
        q = z.qr().q();
    }
    log::warn!("spectral radius did not converge in {MAX_ITERS} iterations");
    Ok(SpectralEstimate {
        radius,
        iterations: MAX_ITERS,
        converged: false,
    })
}

/// Largest |eigenvalue| of a small dense matrix, `None` if Schur stalls.
fn ritz_radius(h: &DMatrix<f64>) -> Option<f64> {
    Schur::try_new(h.clone(), f64::EPSILON, SCHUR_ITERS).map(|s| {
        s.complex_eigenvalues()
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    })
}

/// Parameters of the echo-state shift search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EspSearch {
    pub n_r: usize,
    pub sparsity: f64,
    pub seeds: usize,
    /// Global seeds used are `seed_base..seed_base + seeds`.
    pub seed_base: u64,
    /// Target for the mean radius after shifting.
    pub margin: f64,
}

impl Default for EspSearch {
    fn default() -> Self {
        EspSearch {
            n_r: 128,
            sparsity: 0.1,
            seeds: 20,
            seed_base: 1,
            margin: 0.95,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EspCalibration {
    pub sparsity: f64,
    pub shift: u32,
    /// Mean radius before any shift.
    pub unshifted_mean: f64,
    /// Per-seed radii at the chosen shift.
    pub radii: Vec<f64>,
    pub mean: f64,
    /// Coefficient of variation of `radii`.
    pub cv: f64,
}

/// Per-seed spectral radii of `W_r` at a given shift.
pub fn reservoir_radii(search: &EspSearch, shift: u32) -> Result<Vec<f64>> {
    (0..search.seeds)
        .into_par_iter()
        .map(|s| {
            let mut cfg = WeightGenConfig::from_global_seed(search.seed_base + s as u64);
            cfg.esp_shift = shift;
            let m = build_reservoir_matrix(&cfg, search.n_r, search.sparsity);
            spectral_radius(&m.to_dmatrix()).map(|e| e.radius)
        })
        .collect()
}

fn mean_cv(values: &[f64]) -> (f64, f64) {
    let n = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let cv = if mean > 0.0 { var.sqrt() / mean } else { 0.0 };
    (mean, cv)
}

/// Smallest right shift whose mean spectral radius over the seed battery is
/// below `margin`.
pub fn esp_shift_for_sparsity(search: &EspSearch) -> Result<EspCalibration> {
    if search.seeds == 0 {
        return Err(Error::InvalidArgument("at least one seed is required".into()));
    }
    let unshifted = reservoir_radii(search, 0)?;
    let (unshifted_mean, _) = mean_cv(&unshifted);
    // Shifting halves every weight, so the radius at shift s is close to
    // unshifted/2^s. Start from that guess and only re-measure the shifts
    // whose prediction lies near the margin; truncation only shrinks weights.
    let predicted = |s: u32| unshifted_mean / f64::from(1u32 << s);
    let mut shift = 0u32;
    while shift < MAX_SHIFT && predicted(shift) >= search.margin {
        shift += 1;
    }
    while shift > 0 && predicted(shift - 1) < search.margin * GUARD_BAND {
        shift -= 1;
    }
    let mut radii = if shift == 0 {
        unshifted
    } else {
        reservoir_radii(search, shift)?
    };
    loop {
        let (mean, cv) = mean_cv(&radii);
        if mean < search.margin || shift >= MAX_SHIFT {
            return Ok(EspCalibration {
                sparsity: search.sparsity,
                shift,
                unshifted_mean,
                radii,
                mean,
                cv,
            });
        }
        shift += 1;
        radii = reservoir_radii(search, shift)?;
    }
}
