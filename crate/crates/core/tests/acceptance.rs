//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report reads as a checklist.
//! Exits nonzero when any criterion fails.

mod common;

use std::process::Command;
use std::time::Instant;

use esn_chip::analysis::{esp_shift_for_sparsity, lyapunov_exponent, EspSearch, LyapunovConfig};
use esn_chip::dataflow::{latency_local_rings, latency_mh_tree, latency_sh_tree, Topology, TopologySpec};
use esn_chip::harness::studies::{lyapunov_study, noise_sweep, reference_run, ridge_vs_sgd, DEFAULT_BETAS};
use esn_chip::harness::{load_dataset, run_training_on, Model, TrainingOutcome};
use esn_chip::reference::Activation;

// pinned tolerances
const MIN_ACCURACY: f64 = 0.90;
const MIN_SAMPLES: usize = 200_000;
const MAX_REFERENCE_GAP: f64 = 0.03;
const TARGET_THROUGHPUT: f64 = 6e4;
const THROUGHPUT_TOL: f64 = 0.15;
const MIN_MH_SH_RATIO: f64 = 1.5;
const ESP_SEEDS: usize = 20;
const MAX_CV: f64 = 0.05;
const MAX_RIDGE_GAP: f64 = 0.03;
const MAX_GRADIENT_ERROR: f64 = 1e-6;
const MAX_DROP_AT_26DB: f64 = 0.05;
const LYAPUNOV_TOL: f64 = 1e-9;
const FIXED_POINT_CASES: usize = 100_000;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

struct Flagship {
    outcome: TrainingOutcome,
    raw: esn_chip::harness::data::RawDataset,
    cfg: esn_chip::harness::ExperimentConfig,
}

impl Flagship {
    fn fresh_model(&self) -> Model {
        let p = &self.outcome.prepared;
        Model::build(&self.cfg, p.n_inputs, p.n_classes, self.outcome.summary.esp_shift).unwrap()
    }
}

fn flagship() -> Flagship {
    let cfg = common::flagship(&[]);
    let raw = load_dataset(&cfg).unwrap();
    let outcome = run_training_on(&cfg, &raw).unwrap();
    Flagship { outcome, raw, cfg }
}

fn c1_classification(f: &Flagship) -> Verdict {
    let s = &f.outcome.summary;
    let n = s.n_train + s.n_test;
    let reference = reference_run(&f.fresh_model(), &f.outcome.prepared, f.cfg.epochs, Activation::Piecewise).unwrap();
    let gap = (reference.accuracy - s.metrics.accuracy).abs();
    verdict(
        s.metrics.accuracy >= MIN_ACCURACY && gap <= MAX_REFERENCE_GAP && n >= MIN_SAMPLES && s.n_classes == 4,
        format!(
            "n_r=128, {} epoch(s), {n} samples: accuracy {:.4} (>= {MIN_ACCURACY}), float reference {:.4}, gap {:.4} (<= {MAX_REFERENCE_GAP})",
            f.cfg.epochs, s.metrics.accuracy, reference.accuracy, gap
        ),
    )
}

fn c2_latency() -> Verdict {
    let rings = latency_local_rings(32, 128, 10, 4).unwrap();
    let sh = latency_sh_tree(128, 10).unwrap();
    let mh = latency_mh_tree(128, 2, 10, 32, 4).unwrap();
    verdict(
        rings == 480 && sh == 1664 && mh == 915,
        format!(
            "local rings {rings} (480), SH-Tree {sh} (1664), MH-Tree {mh} (915); \
             the quoted 1408 and 864 do not follow from the closed forms, which are authoritative"
        ),
    )
}

fn c3_throughput() -> Verdict {
    let mh = TopologySpec::default().throughput().unwrap();
    let sh = TopologySpec {
        kind: Topology::ShTree,
        ..TopologySpec::default()
    }
    .throughput()
    .unwrap();
    let rel = (mh.samples_per_sec - TARGET_THROUGHPUT).abs() / TARGET_THROUGHPUT;
    let ratio = mh.samples_per_sec / sh.samples_per_sec;
    verdict(
        rel <= THROUGHPUT_TOL && ratio >= MIN_MH_SH_RATIO,
        format!(
            "MH-Tree pipelined {:.0} samples/s ({:+.1}% vs 6e4, tol ±15%); MH/SH ratio {ratio:.2} (>= {MIN_MH_SH_RATIO})",
            mh.samples_per_sec,
            100.0 * (mh.samples_per_sec - TARGET_THROUGHPUT) / TARGET_THROUGHPUT
        ),
    )
}

fn c4_echo_state() -> Verdict {
    let cal = esp_shift_for_sparsity(&EspSearch {
        n_r: 128,
        sparsity: 0.1,
        seeds: ESP_SEEDS,
        seed_base: 1,
        ..EspSearch::default()
    })
    .unwrap();
    let stable = cal.radii.iter().filter(|&&r| r < 1.0).count();
    let max = cal.radii.iter().copied().fold(0.0, f64::max);
    verdict(
        stable == ESP_SEEDS && cal.cv < MAX_CV,
        format!(
            "sparsity 0.1, n_r=128, seeds 1..=20: shift {}, {stable}/{ESP_SEEDS} below 1 (max {max:.3}), CV {:.2}% (< {:.0}%)",
            cal.shift,
            100.0 * cal.cv,
            100.0 * MAX_CV
        ),
    )
}

fn c5_oracle(f: &Flagship) -> Verdict {
    let mut model = f.fresh_model();
    let o = ridge_vs_sgd(&mut model, &f.outcome.prepared, f.cfg.epochs, &DEFAULT_BETAS).unwrap();
    verdict(
        o.sgd_accuracy >= o.best_accuracy - MAX_RIDGE_GAP,
        format!(
            "SGD {:.4} vs best ridge {:.4} at beta {:e} (SGD may trail by <= {MAX_RIDGE_GAP})",
            o.sgd_accuracy, o.best_accuracy, o.best_beta
        ),
    )
}

fn c6_gradient() -> Verdict {
    let err = common::delta_rule_gradient_error(500, 6);
    verdict(
        err <= MAX_GRADIENT_ERROR,
        format!("500 instances, n_o<=3, n_r<=5: max relative error {err:.2e} (<= {MAX_GRADIENT_ERROR:e})"),
    )
}

fn c7_noise(f: &Flagship) -> Verdict {
    let snrs = [f64::INFINITY, 26.0, 20.0, 15.0, 10.0];
    let points = noise_sweep(&f.cfg, &f.raw, &f.outcome.model, &common::BOTH_KINDS, &snrs).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in common::BOTH_KINDS {
        let acc = |snr: Option<f64>| {
            points
                .iter()
                .find(|p| p.kind == kind && p.snr_db == snr)
                .map(|p| p.accuracy)
                .unwrap()
        };
        let clean = acc(None);
        let drop26 = clean - acc(Some(26.0));
        let below: Vec<f64> = [20.0, 15.0, 10.0].iter().map(|&s| clean - acc(Some(s))).collect();
        pass &= drop26 <= MAX_DROP_AT_26DB && below.iter().all(|&d| d > drop26);
        parts.push(format!(
            "{kind:?}: clean {clean:.4}, drop@26 {drop26:.4}, drop@20/15/10 {:.4}/{:.4}/{:.4}",
            below[0], below[1], below[2]
        ));
    }
    verdict(pass, format!("{} (drop@26 <= {MAX_DROP_AT_26DB}, larger below)", parts.join("; ")))
}

fn c8_lyapunov(f: &Flagship) -> Verdict {
    let u: Vec<Vec<f64>> = (0..64)
        .map(|t| vec![(t as f64 * 0.37).sin(), (t as f64 * 0.11).cos(), t as f64 * 0.01])
        .collect();
    let scaled = |c: f64| -> Vec<Vec<f64>> { u.iter().map(|v| v.iter().map(|a| a * c).collect()).collect() };
    let cfg = LyapunovConfig::default();
    let n = u.len() as f64;
    let id = lyapunov_exponent(&u, &u, &cfg).unwrap().lambda;
    let dbl = lyapunov_exponent(&u, &scaled(2.0), &cfg).unwrap();
    let half = lyapunov_exponent(&u, &scaled(0.5), &cfg).unwrap();
    let e_dbl = (dbl.lambda - dbl.k * n * 2f64.ln()).abs();
    let e_half = (half.lambda - half.k * n * 0.5f64.ln()).abs();
    let study = lyapunov_study(&f.outcome.model, &f.outcome.prepared, 2000).unwrap();
    let (q, r) = (study.quantized.lambda, study.reference.lambda);
    verdict(
        id == 0.0 && e_dbl <= LYAPUNOV_TOL && e_half <= LYAPUNOV_TOL && q.is_finite() && r.is_finite(),
        format!(
            "identity {id}, doubling err {e_dbl:.1e}, halving err {e_half:.1e} (<= {LYAPUNOV_TOL:e}); \
             flagship over {} samples: fixed point {q:+.4}, float {r:+.4}",
            study.samples
        ),
    )
}

fn c9_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let weights = path("model.bin");
    let small = ["--set", "dataset.synthetic_samples_per_subject=2000", "--seed", "3"];
    let mut cases: Vec<(&str, Vec<String>)> = vec![
        ("train", vec!["--weights".into(), weights.clone()]),
        ("eval", vec!["--weights".into(), weights.clone()]),
        ("latency", vec!["--all".into(), "--format".into(), "json".into()]),
        (
            "analyze",
            ["--esp-seeds", "3", "--lyapunov-samples", "300"].map(String::from).to_vec(),
        ),
        ("noise", ["--snr", "inf,26,10", "--kind", "both"].map(String::from).to_vec()),
        ("tune", ["--particles", "2", "--iterations", "1"].map(String::from).to_vec()),
    ];
    for (cmd, args) in &mut cases {
        if !matches!(*cmd, "latency" | "eval") {
            args.extend(small.map(String::from));
        }
    }
    let mut failed = Vec::new();
    for (cmd, args) in &cases {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = path(&format!("{cmd}-{rep}.out"));
            let status = Command::new(env!("CARGO_BIN_EXE_esn-chip"))
                .arg(cmd)
                .args(args)
                .args(["--out", &out])
                .output()
                .unwrap();
            if !status.status.success() {
                failed.push(format!("{cmd} exited {:?}", status.status.code()));
            }
            outputs.push(std::fs::read(&out).unwrap_or_default());
        }
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            failed.push(format!("{cmd} reports differ"));
        }
    }
    let names: Vec<&str> = cases.iter().map(|(c, _)| *c).collect();
    if failed.is_empty() {
        verdict(true, format!("byte-identical reports for {}", names.join(", ")))
    } else {
        verdict(false, failed.join("; "))
    }
}

fn c10_fixed_point() -> Verdict {
    let run = common::fixed_point_battery(FIXED_POINT_CASES, 0xACCE97);
    verdict(
        run.mismatches.is_empty(),
        format!(
            "{} cases vs exact rational arithmetic: {} mismatches{}",
            run.cases,
            run.mismatches.len(),
            run.mismatches.first().map(|m| format!(" (first: {m})")).unwrap_or_default()
        ),
    )
}

type Check<'a> = Box<dyn Fn() -> Verdict + 'a>;

fn main() {
    let start = Instant::now();
    let f = flagship();
    let checks: Vec<(u32, &str, Check)> = vec![
        (1, "HAR classification", Box::new(|| c1_classification(&f))),
        (2, "latency golden values", Box::new(c2_latency)),
        (3, "throughput", Box::new(c3_throughput)),
        (4, "echo state property", Box::new(c4_echo_state)),
        (5, "ridge oracle equivalence", Box::new(|| c5_oracle(&f))),
        (6, "gradient check", Box::new(c6_gradient)),
        (7, "noise robustness shape", Box::new(|| c7_noise(&f))),
        (8, "Lyapunov sanity", Box::new(|| c8_lyapunov(&f))),
        (9, "determinism", Box::new(c9_determinism)),
        (10, "fixed-point property suite", Box::new(c10_fixed_point)),
    ];
    let mut failures = 0;
    for (id, name, check) in &checks {
        let v = check();
        if !v.pass {
            failures += 1;
        }
        println!("{} {id:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!(
        "acceptance: {}/{} passed in {:.1}s",
        checks.len() - failures,
        checks.len(),
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
