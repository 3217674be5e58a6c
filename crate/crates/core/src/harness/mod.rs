//! Experiment grids: running them, storing the results and scoring them.

mod plan;
mod scoring;
mod store;

use rayon::prelude::*;

pub use plan::{CellKey, ExperimentPlan, DEFAULT_REPETITIONS, DEFAULT_STRIDE, SUITE_KEYWORD};
pub use scoring::{
    aggregate_mean_scores, baseline_comparison, baseline_csv, pairwise_outcome, per_instance_summary, score_all,
    score_checkpoint, scores_csv, summary_csv, AlgorithmScore, BaselineRow, MeanScore, ScoreRow, ScoreTable,
    ScoringOptions, Summary, SummaryRow, SCORED_QUANTITY,
};
pub use store::{CellFailure, ResultStore, FORMAT_VERSION};

use crate::error::{Error, Result};
use crate::functions::FunctionRegistry;
use crate::instance::{build_instances, ProblemInstance};
use crate::optimizers::{run, OptimizerConfig, RunRecord};

/// Runs every cell of `plan` on `parallelism` worker threads.
///
/// Each cell's seed depends only on the plan and the cell key, so the
/// returned store is the same for any `parallelism`. A failing cell is
/// recorded in [`ResultStore::failures`] and the rest still run.
pub fn run_experiment(plan: &ExperimentPlan, registry: &FunctionRegistry, parallelism: usize) -> Result<ResultStore> {
    plan.validate()?;
    if parallelism == 0 {
        return Err(Error::InvalidConfig("parallelism must be at least 1".into()));
    }
    let instances = build_instances(registry, &plan.instances, plan.dataset_policy())?;
    let cells = plan.cells();
    let run_cell = |cell: &CellKey| -> std::result::Result<RunRecord, String> {
        let idx = plan.instances.iter().position(|l| *l == cell.instance).expect("cell from plan");
        run_one(&instances[idx], plan, cell).map_err(|e| e.to_string())
    };

    let outcomes: Vec<_> = if parallelism == 1 {
        cells.iter().map(run_cell).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| cells.par_iter().map(run_cell).collect())
    };

    let mut store = ResultStore::new(plan.clone());
    for (cell, outcome) in cells.into_iter().zip(outcomes) {
        match outcome {
            Ok(record) => store.insert(cell, record),
            Err(message) => store.failures.push(CellFailure { cell, message }),
        }
    }
    Ok(store)
}

fn run_one(instance: &ProblemInstance, plan: &ExperimentPlan, cell: &CellKey) -> Result<RunRecord> {
    let config = OptimizerConfig {
        hyperparameters: plan.hyperparameters(cell.algorithm),
        seed: plan.cell_seed(&cell.instance, cell.algorithm, cell.repetition),
    };
    let mut objective = instance.objective(plan.budget);
    run(&mut objective, &config, plan.stride)
}
