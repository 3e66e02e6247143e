//! JSON and CSV report emission.
//!
//! Every JSON report carries the resolved configuration so a run can be
//! reproduced from its output alone. Reports contain no timestamps or host
//! data, which keeps equal-seed runs byte-identical.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;

#[derive(Serialize)]
pub struct Report<'a, T: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<&'a ExperimentConfig>,
    pub result: &'a T,
}

pub fn to_json<T: Serialize>(command: &str, config: Option<&ExperimentConfig>, result: &T) -> String {
    let report = Report {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config,
        result,
    };
    serde_json::to_string_pretty(&report).expect("reports serialize") + "\n"
}

/// Write `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            std::fs::write(p, text).map_err(|e| Error::io(p, e))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Comma-separated text with a header line.
pub fn csv_text(header: &str, rows: &[String]) -> String {
    let mut out = String::with_capacity(header.len() + rows.iter().map(|r| r.len() + 1).sum::<usize>() + 1);
    out.push_str(header);
    out.push('\n');
    for r in rows {
        out.push_str(r);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_embeds_config() {
        let cfg = ExperimentConfig::default();
        let text = to_json("train", Some(&cfg), &42);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["command"], "train");
        assert_eq!(v["result"], 42);
        assert_eq!(v["config"]["reservoir"]["n_r"], 128);
        assert_eq!(text, to_json("train", Some(&cfg), &42));
    }

    #[test]
    fn csv_layout() {
        assert_eq!(csv_text("a,b", &["1,2".into()]), "a,b\n1,2\n");
    }

    #[test]
    fn emit_creates_parent_dirs() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x/y/report.json");
        emit(Some(&p), "{}\n").unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), "{}\n");
    }
}
