//! Global-best particle swarm optimizer and the hyperparameter tuner built on it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, SeedRole};
use crate::harness::data::{split, RawDataset, SplitPolicy};
use crate::harness::experiment::{prepare, resolve_esp_shift, train_prepared};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dimension {
    pub lo: f64,
    pub hi: f64,
    /// Positions are rounded to integers before evaluation.
    pub integer: bool,
}

impl Dimension {
    pub fn real(lo: f64, hi: f64) -> Self {
        Dimension { lo, hi, integer: false }
    }

    pub fn integer(lo: f64, hi: f64) -> Self {
        Dimension { lo, hi, integer: true }
    }

    fn clamp(&self, v: f64) -> f64 {
        let v = v.clamp(self.lo, self.hi);
        if self.integer {
            v.round().clamp(self.lo.ceil(), self.hi.floor())
        } else {
            v
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsoParams {
    pub particles: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Velocity bound as a fraction of each dimension's range.
    pub max_velocity: f64,
    pub seed: u64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            particles: 50,
            iterations: 20,
            inertia: 0.72,
            cognitive: 1.49,
            social: 1.49,
            max_velocity: 0.5,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsoResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub evaluations: usize,
    /// Global-best fitness after initialization and after every iteration.
    pub history: Vec<f64>,
}

/// Maximize `fitness` over the box `dims`.
///
/// Random draws happen on the calling thread in a fixed order, and fitness
/// values are gathered in particle order, so the result depends only on
/// `params.seed` even though particles are evaluated in parallel.
pub fn optimize<F>(dims: &[Dimension], params: &PsoParams, fitness: F) -> Result<PsoResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if params.particles == 0 {
        return Err(Error::InvalidArgument("PSO needs at least one particle".into()));
    }
    if let Some(d) = dims.iter().find(|d| !(d.lo <= d.hi)) {
        return Err(Error::InvalidArgument(format!("empty bound [{}, {}]", d.lo, d.hi)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let vmax: Vec<f64> = dims.iter().map(|d| params.max_velocity * (d.hi - d.lo)).collect();
    let mut pos: Vec<Vec<f64>> = (0..params.particles)
        .map(|_| dims.iter().map(|d| d.clamp(d.lo + rng.random::<f64>() * (d.hi - d.lo))).collect())
        .collect();
    let mut vel: Vec<Vec<f64>> = (0..params.particles)
        .map(|_| vmax.iter().map(|&v| (2.0 * rng.random::<f64>() - 1.0) * 0.1 * v).collect())
        .collect();
    let eval = |pos: &[Vec<f64>]| -> Vec<f64> {
        pos.par_iter()
            .map(|p| {
                let f = fitness(p);
                if f.is_nan() { f64::NEG_INFINITY } else { f }
            })
            .collect()
    };
    let mut fit = eval(&pos);
    let mut evaluations = fit.len();
    let mut pbest = pos.clone();
    let mut pbest_fit = fit.clone();
    let mut g = best_index(&pbest_fit);
    let mut history = vec![pbest_fit[g]];

    for _ in 0..params.iterations {
        for i in 0..params.particles {
            for (d, dim) in dims.iter().enumerate() {
                let (r1, r2): (f64, f64) = (rng.random(), rng.random());
                let v = params.inertia * vel[i][d]
                    + params.cognitive * r1 * (pbest[i][d] - pos[i][d])
                    + params.social * r2 * (pbest[g][d] - pos[i][d]);
                vel[i][d] = v.clamp(-vmax[d], vmax[d]);
                pos[i][d] = dim.clamp(pos[i][d] + vel[i][d]);
            }
        }
        fit = eval(&pos);
        evaluations += fit.len();
        for i in 0..params.particles {
            if fit[i] > pbest_fit[i] {
                pbest_fit[i] = fit[i];
                pbest[i].clone_from(&pos[i]);
            }
        }
        g = best_index(&pbest_fit);
        history.push(pbest_fit[g]);
    }
    Ok(PsoResult {
        best_position: pbest[g].clone(),
        best_fitness: pbest_fit[g],
        evaluations,
        history,
    })
}

/// First index of the maximum.
fn best_index(values: &[f64]) -> usize {
    crate::readout::argmax(values.iter().copied())
}

/// Search space and schedule of the hyperparameter tuner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoConfig {
    pub particles: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub delta: (f64, f64),
    pub alpha_shift: (u32, u32),
    pub n_r: (usize, usize),
    pub sparsity: (f64, f64),
    /// Tail of each training run held out for fitness evaluation.
    pub validation_fraction: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        let p = PsoParams::default();
        PsoConfig {
            particles: p.particles,
            iterations: p.iterations,
            inertia: p.inertia,
            cognitive: p.cognitive,
            social: p.social,
            delta: (0.05, 1.0),
            alpha_shift: (2, 10),
            n_r: (32, 512),
            sparsity: (0.02, 0.5),
            validation_fraction: 0.2,
        }
    }
}

impl PsoConfig {
    fn dimensions(&self) -> [Dimension; 4] {
        [
            Dimension::real(self.delta.0, self.delta.1),
            Dimension::integer(self.alpha_shift.0 as f64, self.alpha_shift.1 as f64),
            Dimension::integer(self.n_r.0 as f64, self.n_r.1 as f64),
            Dimension::real(self.sparsity.0, self.sparsity.1),
        ]
    }

    /// Apply a particle position to a copy of `base`.
    pub fn apply(&self, base: &ExperimentConfig, p: &[f64]) -> ExperimentConfig {
        let mut cfg = base.clone();
        cfg.reservoir.delta = p[0];
        cfg.reservoir.sparsity = p[3];
        cfg.reservoir.n_r = p[2] as usize;
        cfg.readout.alpha_shift = p[1] as u32;
        // the shift must follow the new size and sparsity
        if base.reservoir.esp_shift.is_some() {
            cfg.reservoir.esp_shift = None;
        }
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best: ExperimentConfig,
    pub validation_accuracy: f64,
    pub pso: PsoResult,
}

/// Tune δ, α, n_r and sparsity for validation accuracy.
pub fn pso_tune(pcfg: &PsoConfig, base: &ExperimentConfig, raw: &RawDataset) -> Result<TuneResult> {
    if !(pcfg.validation_fraction > 0.0 && pcfg.validation_fraction < 1.0) {
        return Err(Error::Config("validation_fraction outside (0, 1)".into()));
    }
    let (train, _) = split(raw, base.train_fraction);
    let inner = RawDataset {
        segments: train,
        split: SplitPolicy::RunFraction,
        ..raw.clone()
    };
    let mut vcfg = base.clone();
    vcfg.train_fraction = 1.0 - pcfg.validation_fraction;
    let prepared = prepare(&inner, &vcfg, None)?;
    let params = PsoParams {
        particles: pcfg.particles,
        iterations: pcfg.iterations,
        inertia: pcfg.inertia,
        cognitive: pcfg.cognitive,
        social: pcfg.social,
        seed: base.seed_for(SeedRole::Pso),
        ..PsoParams::default()
    };
    let pso = optimize(&pcfg.dimensions(), &params, |p| {
        let cfg = pcfg.apply(&vcfg, p);
        let run = resolve_esp_shift(&cfg).and_then(|s| train_prepared(&cfg, prepared.clone(), s));
        match run {
            Ok(out) => out.summary.metrics.accuracy,
            Err(e) => {
                log::warn!("particle {p:?} failed: {e}");
                f64::NEG_INFINITY
            }
        }
    })?;
    let mut best = pcfg.apply(base, &pso.best_position);
    best.reservoir.esp_shift = Some(resolve_esp_shift(&best)?);
    Ok(TuneResult {
        best,
        validation_accuracy: pso.best_fitness,
        pso,
    })
}
