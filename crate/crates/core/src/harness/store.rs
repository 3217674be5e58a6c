//! Result storage.
//!
//! On disk a store is a directory:
//!
//! ```text
//! plan.toml                         the plan that produced the results
//! store.json                        format version, completeness, failed cells
//! runs/<f20_Tanh1>/<PSO>/rep000.csv  checkpoints: fe,best_train_mse,test_mse
//! runs/<f20_Tanh1>/<PSO>/rep000.json run metadata and final parameters
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::plan::{CellKey, ExperimentPlan};
use crate::error::{Error, Result};
use crate::optimizers::{Checkpoint, RunRecord};

/// Bumped whenever the on-disk layout changes.
pub const FORMAT_VERSION: u32 = 1;

const CHECKPOINT_HEADER: [&str; 3] = ["fe", "best_train_mse", "test_mse"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub cell: CellKey,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultStore {
    pub plan: ExperimentPlan,
    pub records: BTreeMap<CellKey, RunRecord>,
    pub failures: Vec<CellFailure>,
}

#[derive(Serialize, Deserialize)]
struct StoreHeader {
    format_version: u32,
    crate_version: String,
    complete: bool,
    scored_quantity: String,
    failures: Vec<CellFailure>,
}

impl ResultStore {
    pub fn new(plan: ExperimentPlan) -> Self {
        ResultStore {
            plan,
            records: BTreeMap::new(),
            failures: Vec::new(),
        }
    }

    pub fn insert(&mut self, cell: CellKey, record: RunRecord) {
        self.records.insert(cell, record);
    }

    pub fn get(&self, cell: &CellKey) -> Option<&RunRecord> {
        self.records.get(cell)
    }

    /// Plan cells without a record.
    pub fn missing_cells(&self) -> Vec<CellKey> {
        self.plan
            .cells()
            .into_iter()
            .filter(|c| !self.records.contains_key(c))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.missing_cells().is_empty()
    }

    /// Errors unless every plan cell has a record.
    pub fn require_complete(&self) -> Result<()> {
        let missing = self.missing_cells();
        match missing.first() {
            None => Ok(()),
            Some(first) => Err(Error::IncompleteStore(format!(
                "{} of {} cells missing, first: {first}",
                missing.len(),
                self.plan.cells().len()
            ))),
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        write(&dir.join("plan.toml"), &self.plan.to_toml())?;
        let header = StoreHeader {
            format_version: FORMAT_VERSION,
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            complete: self.is_complete(),
            scored_quantity: super::scoring::SCORED_QUANTITY.to_string(),
            failures: self.failures.clone(),
        };
        write(&dir.join("store.json"), &to_json(&header)?)?;
        for (cell, record) in &self.records {
            let base = cell_base(dir, cell);
            let parent = base.parent().expect("cell path has a parent");
            fs::create_dir_all(parent).map_err(|e| Error::io(parent.display().to_string(), e))?;
            write(&base.with_extension("csv"), &checkpoints_csv(&record.checkpoints)?)?;
            write(&base.with_extension("json"), &to_json(record)?)?;
        }
        Ok(())
    }

    /// Loads a store written by [`ResultStore::save`]. Missing cells are
    /// allowed here; use [`ResultStore::require_complete`] to insist on them.
    pub fn load(dir: &Path) -> Result<Self> {
        let plan = ExperimentPlan::from_toml(&read(&dir.join("plan.toml"))?)?;
        let header_path = dir.join("store.json");
        let header: StoreHeader = serde_json::from_str(&read(&header_path)?)
            .map_err(|e| Error::Format(format!("{}: {e}", header_path.display())))?;
        if header.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "store format {} is not supported (expected {FORMAT_VERSION})",
                header.format_version
            )));
        }
        let mut store = ResultStore::new(plan);
        store.failures = header.failures;
        for cell in store.plan.cells() {
            let base = cell_base(dir, &cell);
            let meta = base.with_extension("json");
            if !meta.exists() {
                continue;
            }
            let mut record: RunRecord = serde_json::from_str(&read(&meta)?)
                .map_err(|e| Error::Format(format!("{}: {e}", meta.display())))?;
            record.checkpoints = parse_checkpoints(&base.with_extension("csv"))?;
            store.insert(cell, record);
        }
        Ok(store)
    }
}

fn cell_base(dir: &Path, cell: &CellKey) -> PathBuf {
    dir.join("runs")
        .join(cell.instance.replace('/', "_"))
        .join(cell.algorithm.name())
        .join(format!("rep{:03}", cell.repetition))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))
}

fn checkpoints_csv(checkpoints: &[Checkpoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(CHECKPOINT_HEADER).map_err(fail)?;
    for c in checkpoints {
        // Display for f64 is the shortest round-tripping form
        w.write_record([c.fe.to_string(), c.best_train_mse.to_string(), c.test_mse.to_string()])
            .map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn parse_checkpoints(path: &Path) -> Result<Vec<Checkpoint>> {
    let text = read(path)?;
    // rows and columns are 1-based, the header being row 1
    let err = |row: usize, column: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        row,
        column,
        message,
    };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| err(1, 0, e.to_string()))?.clone();
    if headers.iter().ne(CHECKPOINT_HEADER) {
        return Err(err(1, 0, format!("expected header {}", CHECKPOINT_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| err(line, 0, e.to_string()))?;
        let field = |k: usize| row.get(k).unwrap_or("");
        let fe = field(0)
            .parse::<usize>()
            .map_err(|e| err(line, 1, e.to_string()))?;
        let num = |k: usize| {
            field(k)
                .parse::<f64>()
                .map_err(|e| err(line, k + 1, e.to_string()))
        };
        out.push(Checkpoint {
            fe,
            best_train_mse: num(1)?,
            test_mse: num(2)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::FunctionRegistry;
    use crate::harness::run_experiment;
    use crate::optimizers::Algorithm;

    fn store() -> ResultStore {
        let mut p = ExperimentPlan::new(vec!["f5/Tanh1".into()], vec![Algorithm::PSO, Algorithm::DE]);
        p.repetitions = 2;
        p.budget = 35;
        p.stride = 10;
        run_experiment(&p, &FunctionRegistry::new(), 2).unwrap()
    }

    #[test]
    fn save_load_round_trip() {
        let s = store();
        let dir = tempfile::tempdir().unwrap();
        s.save(dir.path()).unwrap();
        assert!(dir.path().join("runs/f5_Tanh1/PSO/rep001.csv").exists());
        let csv = fs::read_to_string(dir.path().join("runs/f5_Tanh1/DE/rep000.csv")).unwrap();
        assert!(csv.starts_with("fe,best_train_mse,test_mse\n10,"));
        assert_eq!(csv.lines().count(), 5); // 10, 20, 30, 35
        let back = ResultStore::load(dir.path()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn incomplete_store_is_reported() {
        let s = store();
        let dir = tempfile::tempdir().unwrap();
        s.save(dir.path()).unwrap();
        fs::remove_file(dir.path().join("runs/f5_Tanh1/DE/rep001.json")).unwrap();
        let back = ResultStore::load(dir.path()).unwrap();
        assert!(!back.is_complete());
        assert!(matches!(back.require_complete(), Err(Error::IncompleteStore(_))));
    }

    #[test]
    fn corrupt_checkpoint_file_is_a_parse_error() {
        let s = store();
        let dir = tempfile::tempdir().unwrap();
        s.save(dir.path()).unwrap();
        let path = dir.path().join("runs/f5_Tanh1/PSO/rep000.csv");
        fs::write(&path, "fe,best_train_mse,test_mse\n10,abc,0.1\n").unwrap();
        match ResultStore::load(dir.path()) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, 2);
            }
            other => panic!("{other:?}"),
        }
    }
}
