//! Sampling, splitting, normalization and CSV interchange of regression data.
//!
//! A dataset file holds one row per sample with header `x1,x2,target,split`,
//! training rows first. Values are the normalized inputs and targets written
//! with 17 significant digits. The scaling parameters that produced them live
//! in a JSON sidecar next to the CSV (same stem, `.json` extension).

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{Domain, FunctionSpec, Interval};
use crate::rng::{derive_seed_str, rng_from_seed};

pub const DEFAULT_SAMPLES: usize = 5000;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.75;
pub const CSV_HEADER: [&str; 4] = ["x1", "x2", "target", "split"];

#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub function_id: u32,
    pub domain: Domain,
    pub points: Vec<[f64; 2]>,
    pub targets: Vec<f64>,
    pub sample_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub x1_lo: f64,
    pub x1_hi: f64,
    pub x2_lo: f64,
    pub x2_hi: f64,
    pub out_min: f64,
    pub out_max: f64,
}

impl ScalingParams {
    pub fn input_domain(&self) -> Domain {
        [
            Interval::new(self.x1_lo, self.x1_hi),
            Interval::new(self.x2_lo, self.x2_hi),
        ]
    }

    pub fn normalize_input(&self, x: [f64; 2]) -> [f64; 2] {
        let d = self.input_domain();
        [
            2.0 * (x[0] - d[0].lo) / d[0].width() - 1.0,
            2.0 * (x[1] - d[1].lo) / d[1].width() - 1.0,
        ]
    }

    pub fn normalize_target(&self, y: f64) -> f64 {
        (y - self.out_min) / (self.out_max - self.out_min)
    }

    pub fn denormalize_target(&self, t: f64) -> f64 {
        t * (self.out_max - self.out_min) + self.out_min
    }

    /// Scaling for data that is already in normalized units.
    pub fn identity() -> Self {
        ScalingParams {
            x1_lo: -1.0,
            x1_hi: 1.0,
            x2_lo: -1.0,
            x2_hi: 1.0,
            out_min: 0.0,
            out_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDataset {
    pub function_id: u32,
    pub train_inputs: Vec<[f64; 2]>,
    pub train_targets: Vec<f64>,
    pub test_inputs: Vec<[f64; 2]>,
    pub test_targets: Vec<f64>,
    pub scaling: ScalingParams,
    pub split_seed: u64,
}

impl RegressionDataset {
    pub fn len(&self) -> usize {
        self.train_targets.len() + self.test_targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn train_flat(&self) -> &[f64] {
        self.train_inputs.as_flattened()
    }

    pub fn test_flat(&self) -> &[f64] {
        self.test_inputs.as_flattened()
    }
}

/// Draws `n` points uniformly from the function's domain.
pub fn generate(spec: &FunctionSpec, n: usize, seed: u64) -> Result<RawDataset> {
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let mut rng = rng_from_seed(seed);
    let [a, b] = spec.domain;
    let points: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.random_range(a.lo..=a.hi), rng.random_range(b.lo..=b.hi)])
        .collect();
    let targets = points
        .iter()
        .map(|&p| spec.evaluate(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(RawDataset {
        function_id: spec.id,
        domain: spec.domain,
        points,
        targets,
        sample_seed: seed,
    })
}

/// Shuffles under `split_seed`, takes the first `ceil(train_fraction * n)`
/// samples for training, and normalizes inputs by domain and outputs by the
/// training-target range.
pub fn split_and_normalize(
    raw: &RawDataset,
    train_fraction: f64,
    split_seed: u64,
) -> Result<RegressionDataset> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::BadTrainFraction(train_fraction));
    }
    let n = raw.points.len();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let n_train = ((train_fraction * n as f64).ceil() as usize).clamp(1, n - 1);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(split_seed));
    let (train_idx, test_idx) = order.split_at(n_train);

    let (out_min, out_max) = train_idx
        .iter()
        .map(|&i| raw.targets[i])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| {
            (lo.min(y), hi.max(y))
        });
    if !(out_min < out_max) {
        return Err(Error::DegenerateScaling(out_min));
    }
    let [d1, d2] = raw.domain;
    let scaling = ScalingParams {
        x1_lo: d1.lo,
        x1_hi: d1.hi,
        x2_lo: d2.lo,
        x2_hi: d2.hi,
        out_min,
        out_max,
    };

    let take = |idx: &[usize]| -> (Vec<[f64; 2]>, Vec<f64>) {
        idx.iter()
            .map(|&i| {
                (
                    scaling.normalize_input(raw.points[i]),
                    scaling.normalize_target(raw.targets[i]),
                )
            })
            .unzip()
    };
    let (train_inputs, train_targets) = take(train_idx);
    let (test_inputs, test_targets) = take(test_idx);

    Ok(RegressionDataset {
        function_id: raw.function_id,
        train_inputs,
        train_targets,
        test_inputs,
        test_targets,
        scaling,
        split_seed,
    })
}

/// Generates the full dataset for a function from one dataset seed. Sampling
/// and splitting draw from separate streams derived from it.
pub fn build_dataset(spec: &FunctionSpec, dataset_seed: u64) -> Result<RegressionDataset> {
    let raw = generate(spec, DEFAULT_SAMPLES, derive_seed_str(dataset_seed, "sample"))?;
    split_and_normalize(&raw, DEFAULT_TRAIN_FRACTION, derive_seed_str(dataset_seed, "split"))
}

/// File name for a function's dataset, `f<ID>_<name>.csv`.
pub fn file_name(spec: &FunctionSpec) -> String {
    format!("f{}_{}.csv", spec.id, spec.slug())
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    function_id: u32,
    split_seed: u64,
    scaling: ScalingParams,
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn export_csv(ds: &RegressionDataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let csv_err = |e: csv::Error| Error::Format(format!("{}: {e}", path.display()));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    let rows = ds
        .train_inputs
        .iter()
        .zip(&ds.train_targets)
        .map(|(x, t)| (x, t, "train"))
        .chain(
            ds.test_inputs
                .iter()
                .zip(&ds.test_targets)
                .map(|(x, t)| (x, t, "test")),
        );
    for (x, t, split) in rows {
        w.write_record([
            format_float(x[0]),
            format_float(x[1]),
            format_float(*t),
            split.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path.display().to_string(), e))?;

    let sidecar = Sidecar {
        function_id: ds.function_id,
        split_seed: ds.split_seed,
        scaling: ds.scaling,
    };
    let json = serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Format(e.to_string()))?;
    let side = sidecar_path(path);
    fs::write(&side, json + "\n").map_err(|e| Error::io(side.display().to_string(), e))
}

/// Reads a dataset CSV. Without a sidecar the values are taken as already
/// normalized and the scaling is [`ScalingParams::identity`].
pub fn import_csv(path: &Path) -> Result<RegressionDataset> {
    let parse_err = |row: usize, column: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        row,
        column,
        message,
    };
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| parse_err(0, 0, e.to_string()))?;

    let mut ds = RegressionDataset {
        function_id: 0,
        train_inputs: Vec::new(),
        train_targets: Vec::new(),
        test_inputs: Vec::new(),
        test_targets: Vec::new(),
        scaling: ScalingParams::identity(),
        split_seed: 0,
    };

    let mut saw_header = false;
    for (i, rec) in r.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| parse_err(row, 0, e.to_string()))?;
        if rec.len() != CSV_HEADER.len() {
            return Err(parse_err(
                row,
                rec.len().min(CSV_HEADER.len()) + 1,
                format!("expected {} columns, found {}", CSV_HEADER.len(), rec.len()),
            ));
        }
        if !saw_header {
            for (c, (got, want)) in rec.iter().zip(CSV_HEADER).enumerate() {
                if got.trim() != want {
                    return Err(parse_err(row, c + 1, format!("header `{got}`, expected `{want}`")));
                }
            }
            saw_header = true;
            continue;
        }
        let mut vals = [0.0; 3];
        for (c, v) in vals.iter_mut().enumerate() {
            let cell = &rec[c];
            *v = cell
                .trim()
                .parse()
                .map_err(|_| parse_err(row, c + 1, format!("`{cell}` is not a number")))?;
        }
        let x = [vals[0], vals[1]];
        match rec[3].trim() {
            "train" => {
                ds.train_inputs.push(x);
                ds.train_targets.push(vals[2]);
            }
            "test" => {
                ds.test_inputs.push(x);
                ds.test_targets.push(vals[2]);
            }
            other => {
                return Err(parse_err(row, 4, format!("split `{other}` is neither train nor test")))
            }
        }
    }
    if !saw_header {
        return Err(parse_err(1, 1, "missing header".into()));
    }
    if ds.train_targets.is_empty() {
        return Err(parse_err(0, 4, "no training rows".into()));
    }

    let side = sidecar_path(path);
    if side.exists() {
        let text = fs::read_to_string(&side).map_err(|e| Error::io(side.display().to_string(), e))?;
        let meta: Sidecar = serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("{}: {e}", side.display())))?;
        ds.function_id = meta.function_id;
        ds.split_seed = meta.split_seed;
        ds.scaling = meta.scaling;
    }
    Ok(ds)
}
