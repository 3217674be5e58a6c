//! Pairwise scoring and the derived tables.
//!
//! At each checkpoint every pair of algorithms is compared on the test MSE of
//! their best-so-far candidates across repetitions. A significant win earns
//! 3 points, a draw 1 point each; the total is normalized by `3(n - 1)`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::plan::CellKey;
use super::store::ResultStore;
use crate::error::{Error, Result};
use crate::instance::parse_label;
use crate::network::Topology;
use crate::optimizers::Algorithm;
use crate::stats::{compare, Outcome, DEFAULT_ALPHA};

/// Recorded in the store header so downstream readers know what was ranked.
pub const SCORED_QUANTITY: &str = "test MSE of the best-so-far candidate by training MSE";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoringOptions {
    pub alpha: f64,
    /// Score incomplete grids by skipping missing cells.
    pub force: bool,
}

impl Default for ScoringOptions {
    fn default() -> Self {
        ScoringOptions {
            alpha: DEFAULT_ALPHA,
            force: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmScore {
    pub algorithm: Algorithm,
    pub points: u32,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub instance: String,
    pub topology: String,
    pub fe: usize,
    pub algorithm: Algorithm,
    pub points: u32,
    pub normalized: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreTable {
    pub rows: Vec<ScoreRow>,
    pub warnings: Vec<String>,
}

/// Test MSE samples per algorithm at one checkpoint, in plan order.
/// Aborted runs are left out with a warning.
fn samples_at(
    store: &ResultStore,
    instance: &str,
    fe: usize,
    opts: &ScoringOptions,
    warnings: &mut Vec<String>,
) -> Result<Vec<(Algorithm, Vec<f64>)>> {
    let plan = &store.plan;
    let mut out = Vec::with_capacity(plan.algorithms.len());
    for &algorithm in &plan.algorithms {
        let mut values = Vec::with_capacity(plan.repetitions);
        for repetition in 0..plan.repetitions {
            let cell = CellKey {
                instance: instance.to_string(),
                algorithm,
                repetition,
            };
            let Some(record) = store.get(&cell) else {
                if opts.force {
                    continue;
                }
                return Err(Error::IncompleteStore(format!("no record for {cell}")));
            };
            if !record.is_completed() {
                warnings.push(format!("{cell}: aborted run excluded from scoring"));
                continue;
            }
            let checkpoint = record.checkpoint_at(fe).ok_or_else(|| Error::MissingCheckpoint {
                cell: cell.to_string(),
                fe,
            })?;
            values.push(checkpoint.test_mse);
        }
        out.push((algorithm, values));
    }
    Ok(out)
}

fn score_samples(samples: &[(Algorithm, Vec<f64>)], alpha: f64) -> Result<Vec<AlgorithmScore>> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InvalidConfig("scoring needs at least two algorithms".into()));
    }
    let mut points = vec![0u32; n];
    for i in 0..n {
        for j in i + 1..n {
            let (pi, pj) = compare(&samples[i].1, &samples[j].1, alpha)?.points();
            points[i] += pi;
            points[j] += pj;
        }
    }
    let max = 3.0 * (n - 1) as f64;
    Ok(samples
        .iter()
        .zip(points)
        .map(|((algorithm, _), points)| AlgorithmScore {
            algorithm: *algorithm,
            points,
            normalized: points as f64 / max,
        })
        .collect())
}

/// Scores of every plan algorithm on `instance` at evaluation `fe`, in plan order.
pub fn score_checkpoint(
    store: &ResultStore,
    instance: &str,
    fe: usize,
    opts: &ScoringOptions,
) -> Result<Vec<AlgorithmScore>> {
    let samples = samples_at(store, instance, fe, opts, &mut Vec::new())?;
    score_samples(&samples, opts.alpha)
}

/// Checkpoint indices shared by the instance's runs: those of its first
/// completed record.
fn checkpoint_fes(store: &ResultStore, instance: &str) -> Result<Vec<usize>> {
    store
        .records
        .iter()
        .find(|(cell, rec)| cell.instance == instance && rec.is_completed())
        .map(|(_, rec)| rec.checkpoints.iter().map(|c| c.fe).collect())
        .ok_or_else(|| Error::IncompleteStore(format!("no completed runs for {instance}")))
}

fn checked(store: &ResultStore, opts: &ScoringOptions) -> Result<()> {
    if opts.force {
        Ok(())
    } else {
        store.require_complete()
    }
}

fn topology_of(label: &str) -> Result<Topology> {
    Ok(parse_label(label)?.1)
}

/// Scores at every stored checkpoint of every plan instance.
pub fn score_all(store: &ResultStore, opts: &ScoringOptions) -> Result<ScoreTable> {
    checked(store, opts)?;
    let mut table = ScoreTable::default();
    for instance in &store.plan.instances {
        let topology = topology_of(instance)?;
        for fe in checkpoint_fes(store, instance)? {
            let samples = samples_at(store, instance, fe, opts, &mut table.warnings)?;
            for s in score_samples(&samples, opts.alpha)? {
                table.rows.push(ScoreRow {
                    instance: instance.clone(),
                    topology: topology.name().to_string(),
                    fe,
                    algorithm: s.algorithm,
                    points: s.points,
                    normalized: s.normalized,
                });
            }
        }
    }
    table.warnings.sort();
    table.warnings.dedup();
    Ok(table)
}

pub fn scores_csv(table: &ScoreTable) -> String {
    let mut out = String::from("instance,topology,fe,algorithm,points,normalized\n");
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.instance, r.topology, r.fe, r.algorithm, r.points, r.normalized
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanScore {
    pub algorithm: Algorithm,
    pub fe: usize,
    pub mean: f64,
    /// Population standard deviation over instances.
    pub std_dev: f64,
    pub instances: usize,
}

/// Mean and standard deviation over the topology's instances of the
/// normalized score, per algorithm and checkpoint. Rows are algorithm-major
/// in plan order, then ascending `fe`.
pub fn aggregate_mean_scores(
    store: &ResultStore,
    topology: Topology,
    opts: &ScoringOptions,
) -> Result<Vec<MeanScore>> {
    checked(store, opts)?;
    let instances = instances_of(store, topology)?;
    let fes = checkpoint_fes(store, &instances[0])?;
    let mut per_alg: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); fes.len()]; store.plan.algorithms.len()];
    for instance in &instances {
        for (k, &fe) in fes.iter().enumerate() {
            for (a, s) in score_checkpoint(store, instance, fe, opts)?.into_iter().enumerate() {
                per_alg[a][k].push(s.normalized);
            }
        }
    }
    let mut out = Vec::new();
    for (a, &algorithm) in store.plan.algorithms.iter().enumerate() {
        for (k, &fe) in fes.iter().enumerate() {
            let v = &per_alg[a][k];
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
            out.push(MeanScore {
                algorithm,
                fe,
                mean,
                std_dev: var.sqrt(),
                instances: v.len(),
            });
        }
    }
    Ok(out)
}

fn instances_of(store: &ResultStore, topology: Topology) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for label in &store.plan.instances {
        if topology_of(label)? == topology {
            out.push(label.clone());
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig(format!("plan has no {topology} instances")));
    }
    Ok(out)
}

/// Final test MSE of every completed repetition of one cell group.
fn final_samples(store: &ResultStore, instance: &str, algorithm: Algorithm) -> Vec<f64> {
    (0..store.plan.repetitions)
        .filter_map(|repetition| {
            store.get(&CellKey {
                instance: instance.to_string(),
                algorithm,
                repetition,
            })
        })
        .filter(|r| r.is_completed())
        .filter_map(|r| r.final_test_mse())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub instance: String,
    pub algorithm: Algorithm,
    pub mean_final_test_mse: f64,
    pub runs: usize,
    /// Lowest mean on this instance; ties go to the earlier plan algorithm.
    pub best: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    /// Per instance, the algorithm with the lowest mean final test MSE.
    pub best: Vec<(String, Algorithm)>,
}

pub fn per_instance_summary(store: &ResultStore, topology: Topology, opts: &ScoringOptions) -> Result<Summary> {
    checked(store, opts)?;
    let mut summary = Summary::default();
    for instance in instances_of(store, topology)? {
        let start = summary.rows.len();
        for &algorithm in &store.plan.algorithms {
            let v = final_samples(store, &instance, algorithm);
            summary.rows.push(SummaryRow {
                instance: instance.clone(),
                algorithm,
                mean_final_test_mse: v.iter().sum::<f64>() / v.len() as f64,
                runs: v.len(),
                best: false,
            });
        }
        let rows = &mut summary.rows[start..];
        let mut best = 0;
        for (i, r) in rows.iter().enumerate() {
            if r.mean_final_test_mse < rows[best].mean_final_test_mse {
                best = i;
            }
        }
        rows[best].best = true;
        summary.best.push((instance, rows[best].algorithm));
    }
    Ok(summary)
}

pub fn summary_csv(summary: &Summary) -> String {
    let mut out = String::from("instance,algorithm,mean_final_test_mse,runs,best\n");
    for r in &summary.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.instance, r.algorithm, r.mean_final_test_mse, r.runs, r.best
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub instance: String,
    pub best_population: Algorithm,
    pub median_population: f64,
    pub median_adam: f64,
    /// `median_population - median_adam`; positive when Adam is better.
    pub median_difference: f64,
    pub population_samples: Vec<f64>,
    pub adam_samples: Vec<f64>,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Best population-based algorithm (lowest median final test MSE, ties to
/// plan order) against Adam on each instance, sorted ascending by the
/// median difference.
pub fn baseline_comparison(store: &ResultStore, topology: Topology, opts: &ScoringOptions) -> Result<Vec<BaselineRow>> {
    checked(store, opts)?;
    if !store.plan.algorithms.contains(&Algorithm::Adam) {
        return Err(Error::InvalidConfig("baseline comparison needs Adam runs".into()));
    }
    let population: Vec<Algorithm> = store
        .plan
        .algorithms
        .iter()
        .copied()
        .filter(|a| a.is_population_based())
        .collect();
    if population.is_empty() {
        return Err(Error::InvalidConfig(
            "baseline comparison needs a population-based algorithm".into(),
        ));
    }
    let mut rows = Vec::new();
    for instance in instances_of(store, topology)? {
        let adam_samples = final_samples(store, &instance, Algorithm::Adam);
        if adam_samples.is_empty() {
            return Err(Error::IncompleteStore(format!("no completed Adam runs for {instance}")));
        }
        let mut best: Option<(Algorithm, f64, Vec<f64>)> = None;
        for &a in &population {
            let s = final_samples(store, &instance, a);
            let m = median(&s);
            if best.as_ref().is_none_or(|(_, bm, _)| m < *bm) {
                best = Some((a, m, s));
            }
        }
        let (best_population, median_population, population_samples) = best.expect("non-empty");
        let median_adam = median(&adam_samples);
        rows.push(BaselineRow {
            instance,
            best_population,
            median_population,
            median_adam,
            median_difference: median_population - median_adam,
            population_samples,
            adam_samples,
        });
    }
    rows.sort_by(|a, b| a.median_difference.total_cmp(&b.median_difference));
    Ok(rows)
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

/// One row per instance; the two sample columns hold `;`-separated values.
pub fn baseline_csv(rows: &[BaselineRow]) -> String {
    let mut out = String::from(
        "instance,best_population,median_population,median_adam,median_difference,population_samples,adam_samples\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.instance,
            r.best_population,
            r.median_population,
            r.median_adam,
            r.median_difference,
            join(&r.population_samples),
            join(&r.adam_samples)
        );
    }
    out
}

/// Outcome of `a` against `b` at one checkpoint.
pub fn pairwise_outcome(store: &ResultStore, instance: &str, fe: usize, a: Algorithm, b: Algorithm) -> Result<Outcome> {
    let opts = ScoringOptions::default();
    let samples = samples_at(store, instance, fe, &opts, &mut Vec::new())?;
    let find = |alg: Algorithm| {
        samples
            .iter()
            .find(|(x, _)| *x == alg)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| Error::InvalidConfig(format!("{alg} is not in the plan")))
    };
    compare(find(a)?, find(b)?, opts.alpha)
}
