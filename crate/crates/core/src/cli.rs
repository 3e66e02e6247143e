//! Command-line front end.
//!
//! [`run`] parses arguments, executes one subcommand and returns the process
//! exit code: 0 on success, 2 on usage errors and 1 on any other failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{Metrics, NoiseKind};
use crate::dataflow::{self, default_sigma, Topology, TopologySpec};
use crate::error::{Error, Result};
use crate::harness::report::{csv_text, emit, to_json};
use crate::harness::studies::{
    eigen_study, lyapunov_study, noise_sweep, reference_run, ridge_vs_sgd, EigenReport,
    LyapunovReport, OracleReport, DEFAULT_BETAS, NOISE_CSV_HEADER,
};
use crate::harness::{
    load_dataset, prepare, pso_tune, run_training_on, ExperimentConfig, Model, PsoConfig,
    TrainingSummary,
};
use crate::readout::Readout;
use crate::reference::Activation;

#[derive(Parser, Debug)]
#[command(name = "esn-chip", version, about = "Fixed-point echo state network chip simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a model and report test metrics.
    Train(TrainArgs),
    /// Evaluate saved readout weights on the test split.
    Eval(EvalArgs),
    /// Serialization latency and throughput of an interconnect.
    Latency(LatencyArgs),
    /// Spectral, Lyapunov, ridge-oracle and float-reference studies.
    Analyze(AnalyzeArgs),
    /// Accuracy under additive input noise.
    Noise(NoiseArgs),
    /// Particle-swarm hyperparameter search.
    Tune(TuneArgs),
}

#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    /// TOML experiment configuration.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set reservoir.n_r=64`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Shorthand for `--set global_seed=N`.
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut overrides = self.overrides.clone();
        if let Some(s) = self.seed {
            overrides.push(format!("global_seed={s}"));
        }
        match &self.config {
            Some(p) => ExperimentConfig::load(p, &overrides),
            None => ExperimentConfig::from_toml_str("", &overrides),
        }
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// JSON report destination (stdout when absent).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Save the trained readout here (a `.json` sidecar is written next to it).
    #[arg(long)]
    weights: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Weight file written by `train --weights`.
    #[arg(long)]
    weights: PathBuf,
    /// Overrides applied on top of the configuration stored with the weights.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LatencyArgs {
    #[arg(long, default_value = "mh-tree", value_parser = parse_topology)]
    topology: Topology,
    #[arg(long = "nr", default_value_t = 128)]
    n_r: usize,
    #[arg(long, default_value_t = 10)]
    kappa: usize,
    #[arg(long = "nrows", default_value_t = 32)]
    n_rows: usize,
    #[arg(long = "no", default_value_t = 4)]
    n_o: usize,
    /// H-Tree count; defaults to one tree per 64 neurons.
    #[arg(long)]
    sigma: Option<usize>,
    #[arg(long, default_value_t = 50e6)]
    clock: f64,
    /// Disable overlap of training and data movement on the MH-Tree.
    #[arg(long)]
    no_pipeline: bool,
    #[arg(long, value_enum, default_value_t = LatencyFormat::Cycles)]
    format: LatencyFormat,
    /// Report every topology instead of only `--topology`.
    #[arg(long)]
    all: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum LatencyFormat {
    /// Serialization cycles only, one number per line.
    Cycles,
    Csv,
    Json,
}

fn parse_topology(s: &str) -> std::result::Result<Topology, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Spectral radius calibration over a seed battery.
    #[arg(long)]
    eigen: bool,
    /// Largest Lyapunov exponent of the fixed-point and float reservoirs.
    #[arg(long)]
    lyapunov: bool,
    /// Ridge-regression readout on the same reservoir states.
    #[arg(long)]
    oracle: bool,
    /// Double-precision twin trained with the same rule.
    #[arg(long)]
    reference: bool,
    #[arg(long, default_value_t = 20)]
    esp_seeds: usize,
    #[arg(long, default_value_t = 2000)]
    lyapunov_samples: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Gaussian,
    Uniform,
    Both,
}

impl KindArg {
    fn kinds(self) -> Vec<NoiseKind> {
        match self {
            KindArg::Gaussian => vec![NoiseKind::Gaussian],
            KindArg::Uniform => vec![NoiseKind::Uniform],
            KindArg::Both => vec![NoiseKind::Gaussian, NoiseKind::Uniform],
        }
    }
}

#[derive(Args, Debug)]
struct NoiseArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Evaluate these saved weights instead of training from the config.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// SNR grid in dB; `inf` gives the clean baseline.
    #[arg(long, value_delimiter = ',', required = true)]
    snr: Vec<f64>,
    #[arg(long, value_enum, default_value_t = KindArg::Gaussian)]
    kind: KindArg,
    /// CSV destination (stdout when absent).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TuneArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    particles: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Also write the best configuration as TOML.
    #[arg(long)]
    best_config: Option<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

/// Metadata stored in the weight sidecar so `eval` and `noise` can rebuild
/// the reservoir that produced the weights.
#[derive(Serialize, Deserialize)]
struct SavedModel {
    config: ExperimentConfig,
    esp_shift: u32,
    n_inputs: usize,
}

#[derive(Serialize)]
struct AnalyzeResult {
    training: TrainingSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    eigen: Option<EigenReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lyapunov: Option<LyapunovReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<Metrics>,
}

#[derive(Serialize)]
struct EvalResult {
    esp_shift: u32,
    n_test: usize,
    metrics: Metrics,
}

/// Parse `argv` (including the program name) and run the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Latency(a) => latency(a),
        Command::Analyze(a) => analyze(a),
        Command::Noise(a) => noise(a),
        Command::Tune(a) => tune(a),
    }
}

fn train(a: TrainArgs) -> Result<()> {
    let cfg = a.config.resolve()?;
    let raw = load_dataset(&cfg)?;
    let outcome = run_training_on(&cfg, &raw)?;
    if let Some(w) = &a.weights {
        save_model(w, &cfg, &outcome.model, &outcome.summary)?;
    }
    emit(a.out.as_deref(), &to_json("train", Some(&cfg), &outcome.summary))
}

fn save_model(path: &Path, cfg: &ExperimentConfig, model: &Model, s: &TrainingSummary) -> Result<()> {
    if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let saved = SavedModel {
        config: cfg.clone(),
        esp_shift: s.esp_shift,
        n_inputs: s.n_inputs,
    };
    let extra = serde_json::to_value(&saved).expect("config serializes");
    model.readout.save_snapshot(path, &extra)
}

fn load_model(path: &Path, overrides: &[String]) -> Result<(ExperimentConfig, Model)> {
    let (readout, extra) = Readout::load_snapshot(path)?;
    let saved: SavedModel = serde_json::from_value(extra).map_err(|e| {
        Error::Config(format!("{}: sidecar lacks model metadata: {e}", path.display()))
    })?;
    let cfg = if overrides.is_empty() {
        saved.config
    } else {
        ExperimentConfig::from_toml_str(&saved.config.to_toml_string(), overrides)?
    };
    let mut model = Model::build(&cfg, saved.n_inputs, readout.n_o(), saved.esp_shift)?;
    if readout.n_r() != model.reservoir.n_r() {
        return Err(Error::DimensionMismatch {
            what: "saved readout width",
            expected: model.reservoir.n_r(),
            got: readout.n_r(),
        });
    }
    model.readout = readout;
    Ok((cfg, model))
}

fn eval(a: EvalArgs) -> Result<()> {
    let (cfg, mut model) = load_model(&a.weights, &a.overrides)?;
    let raw = load_dataset(&cfg)?;
    let prepared = prepare(&raw, &cfg, cfg.noise_spec().as_ref())?;
    check_inputs(&model, prepared.n_inputs)?;
    let metrics = model.evaluate(&prepared.test)?;
    let result = EvalResult {
        esp_shift: model.reservoir.config().weight_gen.esp_shift,
        n_test: prepared.test.len(),
        metrics,
    };
    emit(a.out.as_deref(), &to_json("eval", Some(&cfg), &result))
}

fn check_inputs(model: &Model, n_inputs: usize) -> Result<()> {
    let expected = model.reservoir.config().n_i;
    if expected != n_inputs {
        return Err(Error::DimensionMismatch {
            what: "dataset inputs for saved model",
            expected,
            got: n_inputs,
        });
    }
    Ok(())
}

fn latency(a: LatencyArgs) -> Result<()> {
    let base = TopologySpec {
        kind: a.topology,
        n_r: a.n_r,
        kappa: a.kappa,
        n_o: a.n_o,
        n_rows: a.n_rows,
        sigma: a.sigma.unwrap_or_else(|| default_sigma(a.n_r)),
        clock_hz: a.clock,
        pipelined: !a.no_pipeline,
        ..TopologySpec::default()
    };
    let kinds: Vec<Topology> = if a.all { Topology::ALL.to_vec() } else { vec![a.topology] };
    let mut rows = Vec::new();
    for kind in kinds {
        let spec = TopologySpec { kind, ..base.clone() };
        let report = spec.throughput()?;
        rows.push((spec, report));
    }
    let text = match a.format {
        LatencyFormat::Cycles => rows
            .iter()
            .map(|(_, r)| format!("{}\n", r.serialization_cycles))
            .collect(),
        LatencyFormat::Csv => csv_text(
            dataflow::CSV_HEADER,
            &rows.iter().map(|(s, r)| dataflow::csv_row(s, r)).collect::<Vec<_>>(),
        ),
        LatencyFormat::Json => {
            let reports: Vec<_> = rows.into_iter().map(|(_, r)| r).collect();
            to_json("latency", None, &reports)
        }
    };
    emit(a.out.as_deref(), &text)
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let cfg = a.config.resolve()?;
    let all = !(a.eigen || a.lyapunov || a.oracle || a.reference);
    let raw = load_dataset(&cfg)?;
    let outcome = run_training_on(&cfg, &raw)?;
    let (n_i, n_o, shift) = (
        outcome.prepared.n_inputs,
        outcome.prepared.n_classes,
        outcome.summary.esp_shift,
    );
    let eigen = if all || a.eigen {
        Some(eigen_study(&cfg, &outcome.model, a.esp_seeds)?)
    } else {
        None
    };
    let lyapunov = if all || a.lyapunov {
        Some(lyapunov_study(&outcome.model, &outcome.prepared, a.lyapunov_samples)?)
    } else {
        None
    };
    let oracle = if all || a.oracle {
        let mut fresh = Model::build(&cfg, n_i, n_o, shift)?;
        Some(ridge_vs_sgd(&mut fresh, &outcome.prepared, cfg.epochs, &DEFAULT_BETAS)?)
    } else {
        None
    };
    let reference = if all || a.reference {
        let fresh = Model::build(&cfg, n_i, n_o, shift)?;
        Some(reference_run(&fresh, &outcome.prepared, cfg.epochs, Activation::Piecewise)?)
    } else {
        None
    };
    let result = AnalyzeResult {
        training: outcome.summary,
        eigen,
        lyapunov,
        oracle,
        reference,
    };
    emit(a.out.as_deref(), &to_json("analyze", Some(&cfg), &result))
}

fn noise(a: NoiseArgs) -> Result<()> {
    let (cfg, model) = match &a.weights {
        Some(w) => {
            let mut overrides = a.config.overrides.clone();
            if let Some(s) = a.config.seed {
                overrides.push(format!("global_seed={s}"));
            }
            load_model(w, &overrides)?
        }
        None => {
            let cfg = a.config.resolve()?;
            let raw = load_dataset(&cfg)?;
            let outcome = run_training_on(&cfg, &raw)?;
            (cfg, outcome.model)
        }
    };
    let raw = load_dataset(&cfg)?;
    let points = noise_sweep(&cfg, &raw, &model, &a.kind.kinds(), &a.snr)?;
    let rows: Vec<String> = points.iter().map(|p| p.csv_row()).collect();
    emit(a.out.as_deref(), &csv_text(NOISE_CSV_HEADER, &rows))
}

fn tune(a: TuneArgs) -> Result<()> {
    let cfg = a.config.resolve()?;
    let mut pcfg = PsoConfig::default();
    if let Some(p) = a.particles {
        pcfg.particles = p;
    }
    if let Some(i) = a.iterations {
        pcfg.iterations = i;
    }
    let raw = load_dataset(&cfg)?;
    let result = pso_tune(&pcfg, &cfg, &raw)?;
    if let Some(p) = &a.best_config {
        emit(Some(p), &result.best.to_toml_string())?;
    }
    emit(a.out.as_deref(), &to_json("tune", Some(&cfg), &result))
}
