//! Fixed-point echo state network with LFSR-generated weights, an online
//! SGD readout and latency models for on-chip interconnects.

pub mod analysis;
pub mod cli;
pub mod dataflow;
pub mod error;
pub mod fixed_point;
pub mod harness;
pub mod lfsr;
pub mod readout;
pub mod reference;
pub mod reservoir;

pub use error::{Error, Result};
pub use fixed_point::{Accumulator, FxFormat, FxMatrix, FxValue};
pub use lfsr::{Lfsr, WeightGenConfig};
pub use readout::{Prediction, Readout, ReadoutConfig};
pub use reservoir::{Reservoir, ReservoirConfig, WeightMode};
