//! Serialization-latency and throughput models for the three interconnects.
//!
//! * SH-Tree: one H-Tree shared by every transfer, `ℓ = n_r (⌊n_r/κ⌋ + 1)`.
//! * Local rings: row-wise rings, `ℓ = n_rows (⌊n_r/κ⌋ + n_o − 1)`.
//! * MH-Tree: σ H-Trees plus direct readout buses,
//!   `ℓ = ⌊n_r² / (σκ)⌋ + n_rows (n_o − 1)`.
//!
//! Throughput adds a compute budget of `⌈n_r / n_rows⌉ + 8` cycles per
//! sample. A pipelined MH-Tree overlaps that budget with data movement.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum neurons served by each H-Tree when the reservoir is split.
pub const MIN_NEURONS_PER_TREE: usize = 64;

pub fn latency_sh_tree(n_r: usize, kappa: usize) -> Result<u64> {
    check_positive(&[("n_r", n_r), ("kappa", kappa)])?;
    let (n_r, kappa) = (n_r as u64, kappa as u64);
    Ok(n_r * (n_r / kappa + 1))
}

pub fn latency_local_rings(n_rows: usize, n_r: usize, kappa: usize, n_o: usize) -> Result<u64> {
    check_positive(&[("n_rows", n_rows), ("n_r", n_r), ("kappa", kappa), ("n_o", n_o)])?;
    let (n_rows, n_r, kappa, n_o) = (n_rows as u64, n_r as u64, kappa as u64, n_o as u64);
    Ok(n_rows * (n_r / kappa + n_o - 1))
}

pub fn latency_mh_tree(
    n_r: usize,
    sigma: usize,
    kappa: usize,
    n_rows: usize,
    n_o: usize,
) -> Result<u64> {
    check_positive(&[
        ("n_r", n_r),
        ("sigma", sigma),
        ("kappa", kappa),
        ("n_rows", n_rows),
        ("n_o", n_o),
    ])?;
    if sigma > 1 && n_r / sigma < MIN_NEURONS_PER_TREE {
        return Err(Error::InvalidTopology(format!(
            "n_r/sigma = {}/{} is below {MIN_NEURONS_PER_TREE}",
            n_r, sigma
        )));
    }
    let (n_r, sigma, kappa, n_rows, n_o) = (
        n_r as u64,
        sigma as u64,
        kappa as u64,
        n_rows as u64,
        n_o as u64,
    );
    Ok(n_r * n_r / (sigma * kappa) + n_rows * (n_o - 1))
}

fn check_positive(values: &[(&str, usize)]) -> Result<()> {
    for (name, v) in values {
        if *v == 0 {
            return Err(Error::InvalidTopology(format!("{name} must be at least 1")));
        }
    }
    Ok(())
}

/// Largest H-Tree count keeping at least 64 neurons per tree.
pub fn default_sigma(n_r: usize) -> usize {
    (n_r / MIN_NEURONS_PER_TREE).max(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    ShTree,
    LocalRings,
    MhTree,
}

impl Topology {
    pub const ALL: [Topology; 3] = [Topology::ShTree, Topology::LocalRings, Topology::MhTree];

    pub fn name(self) -> &'static str {
        match self {
            Topology::ShTree => "sh-tree",
            Topology::LocalRings => "local-rings",
            Topology::MhTree => "mh-tree",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "sh-tree" | "sh" => Ok(Topology::ShTree),
            "local-rings" | "rings" => Ok(Topology::LocalRings),
            "mh-tree" | "mh" => Ok(Topology::MhTree),
            other => Err(Error::InvalidTopology(format!("unknown topology {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologySpec {
    pub kind: Topology,
    pub n_r: usize,
    /// Recurrent fan-in divisor; sparsity is 1/κ.
    pub kappa: usize,
    pub n_o: usize,
    pub n_rows: usize,
    /// Number of H-Trees (MH-Tree only).
    pub sigma: usize,
    pub channel_bits: u32,
    pub clock_hz: f64,
    /// Overlap training with data movement (MH-Tree only).
    pub pipelined: bool,
    /// Fixed part of the per-sample compute budget.
    #[serde(default = "default_overhead")]
    pub overhead_cycles: u64,
}

fn default_overhead() -> u64 {
    8
}

impl Default for TopologySpec {
    fn default() -> Self {
        TopologySpec {
            kind: Topology::MhTree,
            n_r: 128,
            kappa: 10,
            n_o: 4,
            n_rows: 32,
            sigma: 2,
            channel_bits: 16,
            clock_hz: 50e6,
            pipelined: true,
            overhead_cycles: default_overhead(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub topology: Topology,
    pub serialization_cycles: u64,
    pub compute_cycles: u64,
    pub cycles_per_sample: u64,
    pub samples_per_sec: f64,
}

impl TopologySpec {
    /// Recurrent fan-in divisor κ for a kept-connection fraction.
    pub fn kappa_for_sparsity(sparsity: f64) -> usize {
        (1.0 / sparsity).round().max(1.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.clock_hz > 0.0 && self.clock_hz.is_finite()) {
            return Err(Error::InvalidTopology("clock must be positive".into()));
        }
        check_positive(&[("n_rows", self.n_rows), ("sigma", self.sigma)])?;
        self.serialization_cycles().map(|_| ())
    }

    pub fn serialization_cycles(&self) -> Result<u64> {
        match self.kind {
            Topology::ShTree => latency_sh_tree(self.n_r, self.kappa),
            Topology::LocalRings => latency_local_rings(self.n_rows, self.n_r, self.kappa, self.n_o),
            Topology::MhTree => {
                latency_mh_tree(self.n_r, self.sigma, self.kappa, self.n_rows, self.n_o)
            }
        }
    }

    /// Column-parallel MAC/activation/update budget.
    pub fn compute_cycles(&self) -> u64 {
        self.n_r.div_ceil(self.n_rows.max(1)) as u64 + self.overhead_cycles
    }

    pub fn throughput(&self) -> Result<LatencyReport> {
        self.validate()?;
        let serialization_cycles = self.serialization_cycles()?;
        let compute_cycles = self.compute_cycles();
        let cycles_per_sample = if self.kind == Topology::MhTree && self.pipelined {
            serialization_cycles.max(compute_cycles)
        } else {
            serialization_cycles + compute_cycles
        };
        Ok(LatencyReport {
            topology: self.kind,
            serialization_cycles,
            compute_cycles,
            cycles_per_sample,
            samples_per_sec: self.clock_hz / cycles_per_sample as f64,
        })
    }
}

pub const CSV_HEADER: &str = "topology,n_r,kappa,sigma,n_rows,n_o,cycles,samples_per_sec";

/// One CSV row matching [`CSV_HEADER`].
pub fn csv_row(spec: &TopologySpec, report: &LatencyReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{:.3}",
        spec.kind,
        spec.n_r,
        spec.kappa,
        spec.sigma,
        spec.n_rows,
        spec.n_o,
        report.serialization_cycles,
        report.samples_per_sec
    )
}
