//! Dataset ingestion, splitting and normalization.
//!
//! Loaders keep records grouped in contiguous runs of one label so that the
//! split and the filters can respect temporal order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed_point::FxValue;
use crate::reservoir::SIGNAL;

/// Nominal accelerometer rate of the HAR recordings.
pub const HAR_SAMPLE_RATE: f64 = 52.0;
/// Nominal EMG rate of the finger-movement recordings.
pub const PFC_SAMPLE_RATE: f64 = 4000.0;
/// Raw HAR labels kept by default, in class order.
pub const HAR_DEFAULT_CLASSES: [i64; 4] = [1, 2, 3, 4];
pub const PFC_DEFAULT_CLASSES: [i64; 4] = [1, 2, 3, 4];
/// Trial held out for testing in the finger-movement data.
pub const PFC_TEST_TRIAL: u32 = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct RawRecord {
    pub seq: u64,
    pub features: Vec<f64>,
}

/// Contiguous run of records sharing one class.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    /// Subject index (HAR) or trial number (PFC).
    pub group: u32,
    pub label: usize,
    pub records: Vec<RawRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitPolicy {
    /// Leading fraction of every run trains, the rest tests.
    RunFraction,
    /// Whole groups are routed to the test split.
    HeldOutGroups(Vec<u32>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawDataset {
    pub n_features: usize,
    pub n_classes: usize,
    pub sample_rate: Option<f64>,
    pub segments: Vec<Segment>,
    /// Raw label → number of rows dropped.
    pub excluded: BTreeMap<i64, u64>,
    pub split: SplitPolicy,
}

impl RawDataset {
    pub fn n_records(&self) -> usize {
        self.segments.iter().map(|s| s.records.len()).sum()
    }

    pub fn n_excluded(&self) -> u64 {
        self.excluded.values().sum()
    }
}

/// Quantized sample ready for the chip model.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleRecord {
    pub features: Vec<FxValue>,
    pub label: usize,
    pub timestamp: u64,
}

/// Incremental builder shared by all loaders and the synthetic generators.
#[derive(Debug)]
pub struct DatasetBuilder {
    classes: Vec<i64>,
    n_features: usize,
    segments: Vec<Segment>,
    excluded: BTreeMap<i64, u64>,
    open: bool,
}

impl DatasetBuilder {
    pub fn new(classes: &[i64], n_features: usize) -> Self {
        DatasetBuilder {
            classes: classes.to_vec(),
            n_features,
            segments: Vec::new(),
            excluded: BTreeMap::new(),
            open: false,
        }
    }

    /// Start a new file, subject or trial; runs never span groups.
    pub fn break_run(&mut self) {
        self.open = false;
    }

    pub fn push(&mut self, group: u32, seq: u64, features: Vec<f64>, raw_label: i64) {
        debug_assert_eq!(features.len(), self.n_features);
        let Some(label) = self.classes.iter().position(|&c| c == raw_label) else {
            *self.excluded.entry(raw_label).or_insert(0) += 1;
            self.open = false;
            return;
        };
        match self.segments.last_mut() {
            Some(seg) if self.open && seg.label == label && seg.group == group => {
                seg.records.push(RawRecord { seq, features });
            }
            _ => {
                self.segments.push(Segment {
                    group,
                    label,
                    records: vec![RawRecord { seq, features }],
                });
                self.open = true;
            }
        }
    }

    pub fn finish(self, sample_rate: Option<f64>, split: SplitPolicy) -> RawDataset {
        RawDataset {
            n_features: self.n_features,
            n_classes: self.classes.len(),
            sample_rate,
            segments: self.segments,
            excluded: self.excluded,
            split,
        }
    }
}

/// CSV files under `path` in name order, or `path` itself if it is a file.
pub fn csv_files(path: &Path) -> Result<Vec<PathBuf>> {
    let meta = std::fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if meta.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort();
    Ok(files)
}

/// Numeric rows of a header-optional CSV file, with 1-based line numbers.
fn numeric_rows(path: &Path, expected_cols: Option<usize>) -> Result<Vec<(u64, Vec<f64>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
    let mut rows = Vec::new();
    for (idx, rec) in reader.records().enumerate() {
        let parse_err = |line: u64, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(idx as u64 + 1, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(idx as u64 + 1, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            // a non-numeric first line is a header
            Err(_) if idx == 0 => continue,
            Err(e) => return Err(parse_err(line, format!("non-numeric field: {e}"))),
        };
        if let Some(n) = expected_cols {
            if values.len() != n {
                return Err(parse_err(line, format!("expected {n} columns, found {}", values.len())));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(parse_err(line, "non-finite value".into()));
        }
        rows.push((line, values));
    }
    Ok(rows)
}

fn integral_label(path: &Path, line: u64, v: f64) -> Result<i64> {
    if v.fract() != 0.0 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("label {v} is not an integer"),
        });
    }
    Ok(v as i64)
}

/// Accelerometer recordings: one `seq,x,y,z,label` file per subject.
pub fn load_har(path: &Path, classes: &[i64]) -> Result<RawDataset> {
    let classes = if classes.is_empty() { &HAR_DEFAULT_CLASSES[..] } else { classes };
    let mut b = DatasetBuilder::new(classes, 3);
    for (subject, file) in csv_files(path)?.iter().enumerate() {
        b.break_run();
        for (line, row) in numeric_rows(file, Some(5))? {
            let label = integral_label(file, line, row[4])?;
            b.push(subject as u32, row[0] as u64, row[1..4].to_vec(), label);
        }
    }
    Ok(b.finish(Some(HAR_SAMPLE_RATE), SplitPolicy::RunFraction))
}

/// Two-channel EMG: `trial,ch1,ch2,label` rows; trial 6 is the test split.
pub fn load_pfc(path: &Path, classes: &[i64]) -> Result<RawDataset> {
    let classes = if classes.is_empty() { &PFC_DEFAULT_CLASSES[..] } else { classes };
    let mut b = DatasetBuilder::new(classes, 2);
    for file in csv_files(path)? {
        b.break_run();
        let mut seq = 0u64;
        let mut last_trial = None;
        for (line, row) in numeric_rows(&file, Some(4))? {
            let trial = integral_label(&file, line, row[0])?;
            if !(1..=u32::MAX as i64).contains(&trial) {
                return Err(Error::Parse {
                    path: file.clone(),
                    line,
                    message: format!("trial {trial} out of range"),
                });
            }
            if last_trial != Some(trial) {
                b.break_run();
                last_trial = Some(trial);
            }
            let label = integral_label(&file, line, row[3])?;
            b.push(trial as u32, seq, row[1..3].to_vec(), label);
            seq += 1;
        }
    }
    Ok(b.finish(
        Some(PFC_SAMPLE_RATE),
        SplitPolicy::HeldOutGroups(vec![PFC_TEST_TRIAL]),
    ))
}

/// Generic numeric CSV: feature columns followed by an integer label.
///
/// With no class list every distinct label is kept in ascending order.
pub fn load_csv(path: &Path, classes: &[i64], sample_rate: Option<f64>) -> Result<RawDataset> {
    let files = csv_files(path)?;
    let mut tables = Vec::new();
    let mut width = None;
    for file in &files {
        let rows = numeric_rows(file, width)?;
        if let Some((line, row)) = rows.first() {
            if row.len() < 2 {
                return Err(Error::Parse {
                    path: file.clone(),
                    line: *line,
                    message: "need at least one feature and a label".into(),
                });
            }
            width = Some(row.len());
        }
        tables.push((file, rows));
    }
    let mut labels = Vec::new();
    for (file, rows) in &tables {
        for (line, row) in rows {
            labels.push(integral_label(file, *line, row[row.len() - 1])?);
        }
    }
    let classes: Vec<i64> = if classes.is_empty() {
        labels.sort_unstable();
        labels.dedup();
        labels
    } else {
        classes.to_vec()
    };
    let n_features = width.map_or(0, |w| w - 1);
    let mut b = DatasetBuilder::new(&classes, n_features);
    for (group, (_, rows)) in tables.iter().enumerate() {
        b.break_run();
        for (seq, (_, row)) in rows.iter().enumerate() {
            let (label, feats) = row.split_last().expect("rows have at least two columns");
            b.push(group as u32, seq as u64, feats.to_vec(), *label as i64);
        }
    }
    Ok(b.finish(sample_rate, SplitPolicy::RunFraction))
}

/// Split segments into (train, test) according to the dataset's policy.
pub fn split(ds: &RawDataset, train_fraction: f64) -> (Vec<Segment>, Vec<Segment>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for seg in &ds.segments {
        match &ds.split {
            SplitPolicy::RunFraction => {
                let k = (seg.records.len() as f64 * train_fraction).round() as usize;
                let (a, b) = seg.records.split_at(k.min(seg.records.len()));
                for (part, out) in [(a, &mut train), (b, &mut test)] {
                    if !part.is_empty() {
                        out.push(Segment {
                            group: seg.group,
                            label: seg.label,
                            records: part.to_vec(),
                        });
                    }
                }
            }
            SplitPolicy::HeldOutGroups(groups) => {
                if groups.contains(&seg.group) {
                    test.push(seg.clone());
                } else {
                    train.push(seg.clone());
                }
            }
        }
    }
    (train, test)
}

/// Per-feature affine map of the training range onto [−1, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Normalizer {
    pub fn fit(segments: &[Segment]) -> Result<Self> {
        let n = segments
            .iter()
            .flat_map(|s| s.records.first())
            .map(|r| r.features.len())
            .next()
            .ok_or(Error::EmptyInput("training split"))?;
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for r in segments.iter().flat_map(|s| &s.records) {
            for (i, &v) in r.features.iter().enumerate() {
                lo[i] = lo[i].min(v);
                hi[i] = hi[i].max(v);
            }
        }
        Ok(Normalizer { lo, hi })
    }

    pub fn apply(&self, features: &[f64]) -> Vec<f64> {
        features
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&v, (&lo, &hi))| {
                if hi > lo {
                    2.0 * (v - lo) / (hi - lo) - 1.0
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Normalize and quantize segments into a flat sample stream, keeping at
/// most `limit` records (0 = no limit).
pub fn quantize(segments: &[Segment], norm: &Normalizer, limit: usize) -> Vec<SampleRecord> {
    let iter = segments.iter().flat_map(|s| {
        s.records.iter().map(move |r| SampleRecord {
            features: norm
                .apply(&r.features)
                .into_iter()
                .map(|v| FxValue::quantize(v, SIGNAL))
                .collect(),
            label: s.label,
            timestamp: r.seq,
        })
    });
    if limit == 0 {
        iter.collect()
    } else {
        iter.take(limit).collect()
    }
}
