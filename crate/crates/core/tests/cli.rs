use std::path::Path;
use std::process::Command;

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_esn-chip"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = cli().args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

const SMALL: [&str; 2] = ["--set", "dataset.synthetic_samples_per_subject=1500"];

#[test]
fn latency_prints_golden_cycle_count() {
    let (code, out, _) = run(&["latency", "--topology", "local-rings", "--nr", "128", "--kappa", "10", "--nrows", "32", "--no", "4"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "480");
    let (_, out, _) = run(&["latency", "--all", "--format", "csv"]);
    assert!(out.contains("sh-tree,128,10,2,32,4,1664,"));
    assert!(out.contains("mh-tree,128,10,2,32,4,915,"));
}

#[test]
fn missing_config_names_the_path() {
    let (code, _, err) = run(&["train", "--config", "missing.file"]);
    assert_ne!(code, 0);
    assert!(err.contains("missing.file"), "{err}");
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [&["frobnicate"][..], &["train", "--bogus"], &[]] {
        let (code, _, err) = run(args);
        assert_eq!(code, 2, "{args:?}");
        assert!(err.contains("Usage"), "{err}");
    }
    let (code, _, err) = run(&["latency", "--topology", "torus"]);
    assert_eq!(code, 2);
    assert!(err.contains("torus"), "{err}");
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    for sub in ["train", "eval", "latency", "analyze", "noise", "tune"] {
        assert!(out.contains(sub), "help lacks {sub}");
    }
}

#[test]
fn bad_override_is_a_runtime_error() {
    let (code, _, err) = run(&["train", "--set", "reservoir.n_r=\"many\""]);
    assert_eq!(code, 1);
    assert!(err.contains("error"), "{err}");
}

#[test]
fn train_eval_and_noise_share_a_model() {
    let dir = tempfile::tempdir().unwrap();
    let weights = dir.path().join("w").join("model.bin");
    let report = dir.path().join("train.json");
    let w = weights.to_str().unwrap();
    let mut args = vec!["train", "--weights", w, "--out", report.to_str().unwrap()];
    args.extend(SMALL);
    let (code, _, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    assert!(Path::new(&format!("{w}.json")).exists());

    let train: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let (code, out, err) = run(&["eval", "--weights", w]);
    assert_eq!(code, 0, "{err}");
    let eval: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(train["result"]["metrics"], eval["result"]["metrics"]);
    assert_eq!(train["config"], eval["config"]);

    let (code, out, err) = run(&["noise", "--weights", w, "--snr", "26", "--kind", "gaussian"]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "kind,snr_db,accuracy,macro_f1");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("gaussian,26,"), "{}", lines[1]);
}

#[test]
fn equal_seeds_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let cases: Vec<Vec<&str>> = vec![
        vec!["train"],
        vec!["analyze", "--eigen", "--lyapunov", "--esp-seeds", "3", "--lyapunov-samples", "300"],
        vec!["noise", "--snr", "inf,20", "--kind", "both"],
        vec!["tune", "--particles", "2", "--iterations", "1"],
        vec!["latency", "--all", "--format", "json"],
    ];
    for (i, case) in cases.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = path(&format!("{i}-{rep}.out"));
            let mut args = case.clone();
            args.extend(["--out", out.as_str()]);
            if case[0] != "latency" {
                args.extend(SMALL);
                args.extend(["--seed", "5"]);
            }
            let (code, _, err) = run(&args);
            assert_eq!(code, 0, "{case:?}: {err}");
            outputs.push(std::fs::read(&out).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{case:?} differs between runs");
        assert!(!outputs[0].is_empty());
    }
}

#[test]
fn config_file_and_overrides_compose() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        "global_seed = 3\n[reservoir]\nn_r = 48\n[dataset]\nsynthetic_samples_per_subject = 1500\n",
    )
    .unwrap();
    let (code, out, err) = run(&["train", "--config", cfg.to_str().unwrap(), "--set", "reservoir.n_r=40"]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["config"]["global_seed"], 3);
    assert_eq!(v["config"]["reservoir"]["n_r"], 40);
}
