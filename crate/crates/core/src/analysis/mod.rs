//! Measurement and verification tools: spectral radius and echo-state
//! calibration, Lyapunov exponent, the ridge-regression oracle, noise
//! injection and classification metrics.

mod lyapunov;
mod metrics;
mod noise;
mod ridge;
mod spectral;

pub use lyapunov::{lyapunov_exponent, LyapunovConfig, LyapunovResult};
pub use metrics::{compute_metrics, Metrics};
pub use noise::{inject_noise, measure_snr_db, NoiseKind, NoiseSpec};
pub use ridge::{ridge_classify, ridge_readout};
pub use spectral::{
    esp_shift_for_sparsity, reservoir_radii, spectral_radius, EspCalibration, EspSearch, SpectralEstimate,
};
