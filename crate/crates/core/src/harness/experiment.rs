//! End-to-end train/evaluate loops.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{compute_metrics, esp_shift_for_sparsity, inject_noise, EspSearch, Metrics, NoiseSpec};
use crate::dataflow::LatencyReport;
use crate::error::{Error, Result};
use crate::fixed_point::FxValue;
use crate::harness::config::{DatasetKind, ExperimentConfig, SeedRole};
use crate::harness::data::{
    load_csv, load_har, load_pfc, quantize, split, Normalizer, RawDataset, SampleRecord, Segment,
};
use crate::harness::filter::apply_filters;
use crate::harness::synthetic::{synthetic_har, synthetic_pfc, SyntheticHar, SyntheticPfc};
use crate::readout::{one_hot, GradientStats, Readout};
use crate::reservoir::Reservoir;

/// Load or generate the dataset named by the configuration.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<RawDataset> {
    let d = &cfg.dataset;
    let mut ds = match d.kind {
        DatasetKind::Har => load_har(&d.resolved_path()?, &d.classes)?,
        DatasetKind::Pfc => load_pfc(&d.resolved_path()?, &d.classes)?,
        DatasetKind::Csv => load_csv(&d.resolved_path()?, &d.classes, d.sample_rate)?,
        DatasetKind::SyntheticHar => synthetic_har(
            &SyntheticHar {
                subjects: d.synthetic_subjects,
                samples_per_subject: d.synthetic_samples_per_subject,
                seed: d.synthetic_seed,
            },
            &d.classes,
        ),
        DatasetKind::SyntheticPfc => synthetic_pfc(
            &SyntheticPfc {
                seed: d.synthetic_seed,
                ..SyntheticPfc::default()
            },
            &d.classes,
        ),
    };
    if let Some(fs) = d.sample_rate {
        ds.sample_rate = Some(fs);
    }
    if ds.n_records() == 0 {
        return Err(Error::EmptyInput("dataset has no records in the selected classes"));
    }
    Ok(ds)
}

/// Quantized train and test streams.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub n_inputs: usize,
    pub n_classes: usize,
    pub sample_rate: Option<f64>,
    pub normalizer: Normalizer,
    pub train: Vec<SampleRecord>,
    pub test: Vec<SampleRecord>,
    pub excluded: BTreeMap<i64, u64>,
}

fn add_noise(segments: &mut [Segment], spec: &NoiseSpec) -> Result<()> {
    let flat: Vec<Vec<f64>> = segments
        .iter()
        .flat_map(|s| s.records.iter().map(|r| r.features.clone()))
        .collect();
    if flat.is_empty() {
        return Ok(());
    }
    let mut noisy = inject_noise(&flat, spec)?.into_iter();
    for rec in segments.iter_mut().flat_map(|s| s.records.iter_mut()) {
        rec.features = noisy.next().expect("same length as input");
    }
    Ok(())
}

/// Split, corrupt the test split, filter, normalize every network input with
/// training statistics only, and quantize.
pub fn prepare(raw: &RawDataset, cfg: &ExperimentConfig, noise: Option<&NoiseSpec>) -> Result<Prepared> {
    let (mut train, mut test) = split(raw, cfg.train_fraction);
    if let Some(spec) = noise {
        add_noise(&mut test, spec)?;
    }
    apply_filters(&mut train, cfg.filters, raw.sample_rate)?;
    apply_filters(&mut test, cfg.filters, raw.sample_rate)?;
    let normalizer = Normalizer::fit(&train)?;
    let mut train = quantize(&train, &normalizer, cfg.dataset.max_train);
    shuffle_blocks(&mut train, cfg.shuffle_block, cfg.seed_for(SeedRole::Shuffle));
    let test = quantize(&test, &normalizer, cfg.dataset.max_test);
    if test.is_empty() {
        return Err(Error::EmptyInput("test split"));
    }
    Ok(Prepared {
        n_inputs: cfg.filters.n_inputs(raw.n_features),
        n_classes: raw.n_classes,
        sample_rate: raw.sample_rate,
        normalizer,
        train,
        test,
        excluded: raw.excluded.clone(),
    })
}

/// Permute consecutive blocks of `block` samples; order inside a block is kept.
pub fn shuffle_blocks<T>(samples: &mut Vec<T>, block: usize, seed: u64) {
    if block == 0 || samples.len() <= block {
        return;
    }
    let mut order: Vec<usize> = (0..samples.len().div_ceil(block)).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut slots: Vec<Option<T>> = std::mem::take(samples).into_iter().map(Some).collect();
    let n = slots.len();
    *samples = order
        .into_iter()
        .flat_map(|b| b * block..((b + 1) * block).min(n))
        .map(|i| slots[i].take().expect("each index visited once"))
        .collect();
}

/// ESP shift from the config, or calibrated over a small seed battery.
pub fn resolve_esp_shift(cfg: &ExperimentConfig) -> Result<u32> {
    if let Some(s) = cfg.reservoir.esp_shift {
        return Ok(s);
    }
    let cal = esp_shift_for_sparsity(&EspSearch {
        n_r: cfg.reservoir.n_r,
        sparsity: cfg.reservoir.sparsity,
        seeds: cfg.reservoir.esp_seeds.max(1),
        seed_base: cfg.seed_for(SeedRole::Reservoir),
        margin: EspSearch::default().margin,
    })?;
    log::info!(
        "calibrated ESP shift {} (mean radius {:.3} -> {:.3})",
        cal.shift,
        cal.unshifted_mean,
        cal.mean
    );
    Ok(cal.shift)
}

/// Reservoir plus readout: the whole trainable chip state.
#[derive(Clone, Debug)]
pub struct Model {
    pub reservoir: Reservoir,
    pub readout: Readout,
}

impl Model {
    pub fn build(cfg: &ExperimentConfig, n_inputs: usize, n_classes: usize, esp_shift: u32) -> Result<Self> {
        let rcfg = cfg.reservoir_config(n_inputs, n_classes, esp_shift);
        let reservoir = Reservoir::new(rcfg, cfg.reservoir.mode)?;
        let readout = Readout::init(cfg.readout_config(n_classes)?, cfg.reservoir.n_r)?;
        Ok(Model { reservoir, readout })
    }

    fn forward_step(&mut self, u: &[FxValue]) -> Result<(Vec<FxValue>, crate::readout::Prediction)> {
        let x = self.reservoir.step(u)?.to_vec();
        let pred = self.readout.forward(&x)?;
        if self.reservoir.config().feedback_enabled {
            self.reservoir.set_feedback(&pred.y_hat)?;
        }
        Ok((x, pred))
    }

    /// One pass of per-sample SGD over `samples`, starting from a zero state.
    ///
    /// `on_state` sees every reservoir state together with its label.
    pub fn train_epoch(
        &mut self,
        samples: &[SampleRecord],
        mut on_state: impl FnMut(&[FxValue], usize),
    ) -> Result<()> {
        self.reservoir.reset();
        let n_o = self.readout.n_o();
        for s in samples {
            let (x, pred) = self.forward_step(&s.features)?;
            on_state(&x, s.label);
            self.readout.sgd_update(&pred, &one_hot(s.label, n_o), &x)?;
        }
        Ok(())
    }

    /// Predicted classes for `samples`, starting from a zero state.
    pub fn predict(
        &mut self,
        samples: &[SampleRecord],
        mut on_state: impl FnMut(&[FxValue], usize),
    ) -> Result<Vec<usize>> {
        self.reservoir.reset();
        samples
            .iter()
            .map(|s| {
                let (x, pred) = self.forward_step(&s.features)?;
                on_state(&x, s.label);
                Ok(pred.class)
            })
            .collect()
    }

    pub fn evaluate(&mut self, samples: &[SampleRecord]) -> Result<Metrics> {
        let preds = self.predict(samples, |_, _| {})?;
        let labels: Vec<usize> = samples.iter().map(|s| s.label).collect();
        compute_metrics(&preds, &labels, self.readout.n_o())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub esp_shift: u32,
    pub n_inputs: usize,
    pub n_classes: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub excluded: BTreeMap<i64, u64>,
    pub metrics: Metrics,
    pub latency: LatencyReport,
    /// Whether the modelled chip keeps up with the dataset's sample rate.
    pub realtime_feasible: Option<bool>,
    pub gradient: GradientStats,
}

#[derive(Clone, Debug)]
pub struct TrainingOutcome {
    pub model: Model,
    pub prepared: Prepared,
    pub summary: TrainingSummary,
}

/// Train on the configured dataset and evaluate on its test split.
pub fn run_training(cfg: &ExperimentConfig) -> Result<TrainingOutcome> {
    let raw = load_dataset(cfg)?;
    run_training_on(cfg, &raw)
}

pub fn run_training_on(cfg: &ExperimentConfig, raw: &RawDataset) -> Result<TrainingOutcome> {
    let prepared = prepare(raw, cfg, cfg.noise_spec().as_ref())?;
    let esp_shift = resolve_esp_shift(cfg)?;
    train_prepared(cfg, prepared, esp_shift)
}

pub fn train_prepared(cfg: &ExperimentConfig, prepared: Prepared, esp_shift: u32) -> Result<TrainingOutcome> {
    let mut model = Model::build(cfg, prepared.n_inputs, prepared.n_classes, esp_shift)?;
    for epoch in 0..cfg.epochs {
        model.train_epoch(&prepared.train, |_, _| {})?;
        log::debug!("epoch {} done", epoch + 1);
    }
    let metrics = model.evaluate(&prepared.test)?;
    let latency = cfg.topology_spec(prepared.n_classes).throughput()?;
    let realtime_feasible = prepared.sample_rate.map(|fs| latency.samples_per_sec >= fs);
    log::info!(
        "accuracy {:.4} on {} test samples ({} train)",
        metrics.accuracy,
        prepared.test.len(),
        prepared.train.len()
    );
    let summary = TrainingSummary {
        esp_shift,
        n_inputs: prepared.n_inputs,
        n_classes: prepared.n_classes,
        n_train: prepared.train.len(),
        n_test: prepared.test.len(),
        excluded: prepared.excluded.clone(),
        metrics,
        latency,
        realtime_feasible,
        gradient: model.readout.gradient_stats().clone(),
    };
    Ok(TrainingOutcome {
        model,
        prepared,
        summary,
    })
}
