//! Experiment configuration, read from TOML with `section.key=value` overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::NoiseSpec;
use crate::dataflow::{default_sigma, Topology, TopologySpec};
use crate::error::{Error, Result};
use crate::fixed_point::FxFormat;
use crate::lfsr::{splitmix64, WeightGenConfig};
use crate::readout::{ReadoutConfig, SparseReadout};
use crate::reservoir::{ReservoirConfig, WeightMode};

/// Environment variable consulted for relative dataset paths.
pub const DATA_ROOT_ENV: &str = "ESN_DATA_ROOT";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    Har,
    Pfc,
    Csv,
    /// Generated in memory; `path` is ignored.
    SyntheticHar,
    SyntheticPfc,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterMode {
    /// Raw features only.
    #[default]
    None,
    /// LPF and HPF outputs of every raw feature.
    Concat,
    /// Raw features followed by their LPF and HPF outputs.
    Augment,
}

impl FilterMode {
    pub fn n_inputs(self, raw_features: usize) -> usize {
        match self {
            FilterMode::None => raw_features,
            FilterMode::Concat => 2 * raw_features,
            FilterMode::Augment => 3 * raw_features,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub kind: DatasetKind,
    pub path: Option<PathBuf>,
    /// Raw labels kept, in class order; empty means the loader default.
    pub classes: Vec<i64>,
    /// Overrides the loader's nominal rate (required for `csv` with filters).
    pub sample_rate: Option<f64>,
    /// Per-subject sample budget for synthetic HAR.
    pub synthetic_samples_per_subject: usize,
    pub synthetic_subjects: usize,
    /// Seed of the synthetic generators; independent of the experiment seed
    /// so seed sweeps vary the chip, not the data.
    pub synthetic_seed: u64,
    /// Keep at most this many records per split (0 = all).
    pub max_train: usize,
    pub max_test: usize,
}

impl Default for DatasetSection {
    fn default() -> Self {
        DatasetSection {
            kind: DatasetKind::SyntheticHar,
            path: None,
            classes: Vec::new(),
            sample_rate: None,
            synthetic_samples_per_subject: 24_000,
            synthetic_subjects: 10,
            synthetic_seed: 1,
            max_train: 0,
            max_test: 0,
        }
    }
}

impl DatasetSection {
    /// Dataset path with relative paths resolved against `$ESN_DATA_ROOT`.
    pub fn resolved_path(&self) -> Result<PathBuf> {
        let path = self
            .path
            .clone()
            .ok_or_else(|| Error::Config(format!("dataset kind {:?} needs a path", self.kind)))?;
        if path.is_relative() {
            if let Ok(root) = std::env::var(DATA_ROOT_ENV) {
                return Ok(Path::new(&root).join(path));
            }
        }
        Ok(path)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReservoirSection {
    pub n_r: usize,
    pub sparsity: f64,
    pub delta: f64,
    /// Fixed ESP shift; when absent it is calibrated for `n_r` and `sparsity`.
    pub esp_shift: Option<u32>,
    /// Seeds used when calibrating the shift.
    pub esp_seeds: usize,
    pub input_shift: u32,
    pub lfsr_width: u32,
    pub feedback: bool,
    pub mode: WeightMode,
}

impl Default for ReservoirSection {
    fn default() -> Self {
        ReservoirSection {
            n_r: 128,
            sparsity: 0.1,
            delta: 0.1,
            esp_shift: None,
            esp_seeds: 5,
            input_shift: 1,
            lfsr_width: 16,
            feedback: false,
            mode: WeightMode::Cached,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReadoutSection {
    pub alpha_shift: u32,
    pub init_shift: u32,
    pub total_bits: u32,
    pub frac_bits: u32,
    /// Fraction of reservoir outputs wired to the readout (1 = dense).
    pub sparse_level: f64,
}

impl Default for ReadoutSection {
    fn default() -> Self {
        ReadoutSection {
            alpha_shift: 9,
            init_shift: 4,
            total_bits: FxFormat::READOUT_24.total_bits(),
            frac_bits: FxFormat::READOUT_24.frac_bits(),
            sparse_level: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologySection {
    pub kind: Topology,
    pub n_rows: usize,
    /// H-Tree count; defaults to the largest value keeping 64 neurons per tree.
    pub sigma: Option<usize>,
    pub channel_bits: u32,
    pub clock_hz: f64,
    pub pipelined: bool,
}

impl Default for TopologySection {
    fn default() -> Self {
        let t = TopologySpec::default();
        TopologySection {
            kind: t.kind,
            n_rows: t.n_rows,
            sigma: None,
            channel_bits: t.channel_bits,
            clock_hz: t.clock_hz,
            pipelined: t.pipelined,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub snr_db: Option<f64>,
    pub kind: crate::analysis::NoiseKind,
    pub bernoulli_p: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection {
            snr_db: None,
            kind: crate::analysis::NoiseKind::Gaussian,
            bernoulli_p: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub global_seed: u64,
    pub epochs: usize,
    /// Fraction of every contiguous labelled run used for training.
    pub train_fraction: f64,
    pub filters: FilterMode,
    /// Training records are presented in shuffled blocks of this many
    /// consecutive samples; 0 keeps the recorded order.
    pub shuffle_block: usize,
    pub dataset: DatasetSection,
    pub reservoir: ReservoirSection,
    pub readout: ReadoutSection,
    pub topology: TopologySection,
    pub noise: NoiseSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "har".into(),
            global_seed: 1,
            epochs: 1,
            train_fraction: 0.7,
            filters: FilterMode::Concat,
            shuffle_block: 52,
            dataset: DatasetSection::default(),
            reservoir: ReservoirSection::default(),
            readout: ReadoutSection::default(),
            topology: TopologySection::default(),
            noise: NoiseSection::default(),
        }
    }
}

/// Sub-seed salts so each consumer of the global seed gets its own stream.
#[derive(Clone, Copy, Debug)]
pub enum SeedRole {
    Reservoir = 1,
    ReadoutInit = 2,
    ReadoutMask = 3,
    Noise = 4,
    Pso = 5,
    Shuffle = 6,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        let cfg: ExperimentConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, overrides).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction {} outside (0, 1)",
                self.train_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.readout.sparse_level) {
            return Err(Error::Config("readout.sparse_level outside [0, 1]".into()));
        }
        FxFormat::new(self.readout.total_bits, self.readout.frac_bits)?;
        if let Some(s) = self.noise.snr_db {
            if s.is_nan() {
                return Err(Error::Config("noise.snr_db is NaN".into()));
            }
        }
        Ok(())
    }

    pub fn seed_for(&self, role: SeedRole) -> u64 {
        let mut s = self.global_seed ^ ((role as u64) << 56);
        splitmix64(&mut s)
    }

    /// Reservoir configuration for `n_i` inputs and `n_o` classes with the
    /// given ESP shift.
    pub fn reservoir_config(&self, n_i: usize, n_o: usize, esp_shift: u32) -> ReservoirConfig {
        let r = &self.reservoir;
        let mut weight_gen = WeightGenConfig::from_global_seed(self.seed_for(SeedRole::Reservoir));
        weight_gen.esp_shift = esp_shift;
        weight_gen.input_shift = r.input_shift;
        weight_gen.lfsr_width = r.lfsr_width;
        if r.lfsr_width != 16 {
            // reseat seeds inside the narrower state space
            let mask = if r.lfsr_width >= 32 { u32::MAX } else { (1u32 << r.lfsr_width) - 1 };
            for s in [
                &mut weight_gen.ff_seed,
                &mut weight_gen.fb_seed,
                &mut weight_gen.s_seed,
                &mut weight_gen.feedback_seed,
            ] {
                *s = (*s & mask).max(1);
            }
        }
        ReservoirConfig {
            n_i,
            n_r: r.n_r,
            sparsity: r.sparsity,
            delta: r.delta,
            feedback_enabled: r.feedback,
            n_feedback: if r.feedback { n_o } else { 0 },
            weight_gen,
        }
    }

    pub fn readout_config(&self, n_o: usize) -> Result<ReadoutConfig> {
        let r = &self.readout;
        let init_seed = (self.seed_for(SeedRole::ReadoutInit) as u32).max(1);
        let sparse = (r.sparse_level < 1.0).then(|| SparseReadout {
            level: r.sparse_level,
            seed: (self.seed_for(SeedRole::ReadoutMask) as u32).max(1),
        });
        Ok(ReadoutConfig {
            n_o,
            alpha_shift: r.alpha_shift,
            init_seed,
            init_shift: r.init_shift,
            weight_format: FxFormat::new(r.total_bits, r.frac_bits)?,
            sparse,
        })
    }

    pub fn topology_spec(&self, n_o: usize) -> TopologySpec {
        let t = &self.topology;
        let n_r = self.reservoir.n_r;
        TopologySpec {
            kind: t.kind,
            n_r,
            kappa: TopologySpec::kappa_for_sparsity(self.reservoir.sparsity),
            n_o,
            n_rows: t.n_rows,
            sigma: t.sigma.unwrap_or_else(|| default_sigma(n_r)),
            channel_bits: t.channel_bits,
            clock_hz: t.clock_hz,
            pipelined: t.pipelined,
            overhead_cycles: 8,
        }
    }

    pub fn noise_spec(&self) -> Option<NoiseSpec> {
        self.noise.snr_db.map(|snr_db| NoiseSpec {
            snr_db,
            kind: self.noise.kind,
            bernoulli_p: self.noise.bernoulli_p,
            seed: self.seed_for(SeedRole::Noise),
        })
    }
}

/// Apply `a.b.c=value`; the value is parsed as TOML and falls back to a string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {assignment:?} is not key=value")))?;
    let value: toml::Value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, parents) = parts.split_last().expect("split yields at least one part");
    let mut cur = table;
    for p in parents {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("{p} in {key} is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
