//! Experiment orchestration: datasets, filters, training loops, tuning and reports.

pub mod config;
pub mod data;
pub mod experiment;
pub mod filter;
pub mod pso;
pub mod report;
pub mod studies;
pub mod synthetic;

pub use config::{DatasetKind, ExperimentConfig, FilterMode};
pub use experiment::{load_dataset, prepare, run_training, run_training_on, Model, Prepared, TrainingOutcome, TrainingSummary};
pub use pso::{optimize, pso_tune, Dimension, PsoConfig, PsoParams, PsoResult, TuneResult};
