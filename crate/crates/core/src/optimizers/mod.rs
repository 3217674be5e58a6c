//! Baseline optimizers: random search, PSO, DE, CMA-ES and Adam.
//!
//! Every optimizer draws from its own seeded stream, charges one evaluation
//! per candidate (one per step for Adam), evaluates candidates in a fixed
//! order and stops exactly when the budget runs out. None of them bounds the
//! search space.

mod adam;
mod cmaes;
mod de;
mod pso;
mod random_search;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use adam::{run_adam, AdamParams};
pub use cmaes::{run_cmaes, CmaesParams};
pub use de::{run_de, DeParams};
pub use pso::{run_pso, PsoParams};
pub use random_search::run_random_search;

use crate::error::{Error, Result};
use crate::network::InitScheme;
use crate::objective::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    RandomSearch,
    PSO,
    DE,
    CMAES,
    Adam,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::RandomSearch,
        Algorithm::PSO,
        Algorithm::DE,
        Algorithm::CMAES,
        Algorithm::Adam,
    ];

    /// The three population-based methods compared against Adam.
    pub const POPULATION: [Algorithm; 3] = [Algorithm::PSO, Algorithm::DE, Algorithm::CMAES];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::RandomSearch => "RandomSearch",
            Algorithm::PSO => "PSO",
            Algorithm::DE => "DE",
            Algorithm::CMAES => "CMAES",
            Algorithm::Adam => "Adam",
        }
    }

    pub fn is_population_based(self) -> bool {
        Self::POPULATION.contains(&self)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(&norm))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm `{s}`")))
    }
}

/// Per-algorithm settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm")]
pub enum Hyperparameters {
    RandomSearch,
    PSO(PsoParams),
    DE(DeParams),
    CMAES(CmaesParams),
    Adam(AdamParams),
}

impl Hyperparameters {
    pub fn defaults(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::RandomSearch => Hyperparameters::RandomSearch,
            Algorithm::PSO => Hyperparameters::PSO(PsoParams::default()),
            Algorithm::DE => Hyperparameters::DE(DeParams::default()),
            Algorithm::CMAES => Hyperparameters::CMAES(CmaesParams::default()),
            Algorithm::Adam => Hyperparameters::Adam(AdamParams::default()),
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            Hyperparameters::RandomSearch => Algorithm::RandomSearch,
            Hyperparameters::PSO(_) => Algorithm::PSO,
            Hyperparameters::DE(_) => Algorithm::DE,
            Hyperparameters::CMAES(_) => Algorithm::CMAES,
            Hyperparameters::Adam(_) => Algorithm::Adam,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Hyperparameters::RandomSearch => Ok(()),
            Hyperparameters::PSO(p) => p.validate(),
            Hyperparameters::DE(p) => p.validate(),
            Hyperparameters::CMAES(p) => p.validate(),
            Hyperparameters::Adam(p) => p.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub hyperparameters: Hyperparameters,
    pub seed: u64,
}

impl OptimizerConfig {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        OptimizerConfig {
            hyperparameters: Hyperparameters::defaults(algorithm),
            seed,
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        self.hyperparameters.algorithm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub fe: usize,
    pub best_train_mse: f64,
    /// Test MSE of the candidate holding `best_train_mse`.
    pub test_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", content = "reason", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Aborted(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub hyperparameters: Hyperparameters,
    /// Distribution of the starting point(s).
    pub init: InitScheme,
    /// How evaluations were charged.
    pub fe_accounting: String,
    pub budget: usize,
    pub fe_consumed: usize,
    pub checkpoint_stride: usize,
    pub status: RunStatus,
    pub diagnostics: Vec<String>,
    #[serde(skip)]
    pub checkpoints: Vec<Checkpoint>,
    /// Best parameters found (lowest training MSE).
    pub final_params: Vec<f64>,
}

impl RunRecord {
    pub fn is_completed(&self) -> bool {
        self.status == RunStatus::Completed
    }

    pub fn final_checkpoint(&self) -> Option<&Checkpoint> {
        self.checkpoints.last()
    }

    pub fn checkpoint_at(&self, fe: usize) -> Option<&Checkpoint> {
        self.checkpoints
            .binary_search_by_key(&fe, |c| c.fe)
            .ok()
            .map(|i| &self.checkpoints[i])
    }

    pub fn final_test_mse(&self) -> Option<f64> {
        self.final_checkpoint().map(|c| c.test_mse)
    }
}

/// Runs the configured optimizer until the objective's budget is spent,
/// recording a checkpoint every `stride` evaluations and at the end.
pub fn run<O: Objective>(objective: &mut O, config: &OptimizerConfig, stride: usize) -> Result<RunRecord> {
    config.hyperparameters.validate()?;
    if stride == 0 {
        return Err(Error::InvalidConfig("checkpoint stride must be positive".into()));
    }
    match &config.hyperparameters {
        Hyperparameters::RandomSearch => run_random_search(objective, config.seed, stride),
        Hyperparameters::PSO(p) => run_pso(objective, p, config.seed, stride),
        Hyperparameters::DE(p) => run_de(objective, p, config.seed, stride),
        Hyperparameters::CMAES(p) => run_cmaes(objective, p, config.seed, stride),
        Hyperparameters::Adam(p) => run_adam(objective, p, config.seed, stride),
    }
}

const PER_CANDIDATE: &str = "1 FE per candidate evaluated on the full training set";

/// Best-so-far bookkeeping shared by all optimizers.
pub(crate) struct Tracker {
    stride: usize,
    best_value: f64,
    best_params: Option<Vec<f64>>,
    best_test: Option<f64>,
    checkpoints: Vec<Checkpoint>,
}

impl Tracker {
    pub(crate) fn new(stride: usize) -> Self {
        Tracker {
            stride,
            best_value: f64::INFINITY,
            best_params: None,
            best_test: None,
            checkpoints: Vec::new(),
        }
    }

    /// Evaluates on the training set and records the result.
    pub(crate) fn evaluate<O: Objective>(&mut self, objective: &mut O, params: &[f64]) -> Result<f64> {
        let value = objective.eval_train(params)?;
        self.observe(objective, params, value)?;
        Ok(value)
    }

    /// Records a training value that was already charged to the meter.
    pub(crate) fn observe<O: Objective>(&mut self, objective: &O, params: &[f64], value: f64) -> Result<()> {
        let improves = self.best_params.is_none() || value < self.best_value || self.best_value.is_nan();
        if improves {
            self.best_value = value;
            self.best_params = Some(params.to_vec());
            self.best_test = None;
        }
        let fe = objective.meter().used();
        if fe % self.stride == 0 {
            self.checkpoint(objective, fe)?;
        }
        Ok(())
    }

    fn checkpoint<O: Objective>(&mut self, objective: &O, fe: usize) -> Result<()> {
        let Some(params) = &self.best_params else {
            return Ok(());
        };
        let test_mse = match self.best_test {
            Some(t) => t,
            None => {
                let t = objective.eval_test(params)?;
                self.best_test = Some(t);
                t
            }
        };
        self.checkpoints.push(Checkpoint {
            fe,
            best_train_mse: self.best_value,
            test_mse,
        });
        Ok(())
    }

    pub(crate) fn finish<O: Objective>(
        mut self,
        objective: &O,
        algorithm: Algorithm,
        hyperparameters: Hyperparameters,
        seed: u64,
        init: InitScheme,
    ) -> Result<RunRecord> {
        let fe = objective.meter().used();
        if self.checkpoints.last().map(|c| c.fe) != Some(fe) {
            self.checkpoint(objective, fe)?;
        }
        Ok(RunRecord {
            instance: objective.label(),
            algorithm,
            seed,
            hyperparameters,
            init,
            fe_accounting: PER_CANDIDATE.to_string(),
            budget: objective.meter().limit(),
            fe_consumed: fe,
            checkpoint_stride: self.stride,
            status: RunStatus::Completed,
            diagnostics: Vec::new(),
            checkpoints: self.checkpoints,
            final_params: self.best_params.unwrap_or_default(),
        })
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::ProblemInstance;
    use crate::network::Topology;

    #[test]
    fn algorithm_names_parse() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("cma-es".parse::<Algorithm>().unwrap(), Algorithm::CMAES);
        assert!("Nelder-Mead".parse::<Algorithm>().is_err());
    }

    #[test]
    fn every_algorithm_spends_exact_budget_on_an_instance() {
        let inst = ProblemInstance::canonical(5, Topology::Tanh1).unwrap();
        for a in Algorithm::ALL {
            for budget in [1, 7, 93] {
                let mut obj = inst.objective(budget);
                let rec = run(&mut obj, &OptimizerConfig::new(a, 4), 10).unwrap();
                assert_eq!(obj.meter.used(), budget, "{a}");
                assert_eq!(rec.fe_consumed, budget);
                assert_eq!(rec.final_params.len(), 41);
                test_support::assert_monotone(&rec);
                assert!(rec.checkpoints.iter().all(|c| c.fe % 10 == 0 || c.fe == budget));
            }
        }
    }

    #[test]
    fn runs_are_seed_deterministic() {
        let inst = ProblemInstance::canonical(12, Topology::ReLU1).unwrap();
        for a in Algorithm::ALL {
            let go = |seed| {
                let mut obj = inst.objective(120);
                run(&mut obj, &OptimizerConfig::new(a, seed), 5).unwrap()
            };
            assert_eq!(go(9), go(9), "{a}");
            assert_ne!(go(9).final_params, go(10).final_params, "{a}");
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut obj = crate::objective::FunctionObjective::sphere(2, 10);
        let mut cfg = OptimizerConfig::new(Algorithm::PSO, 0);
        cfg.hyperparameters = Hyperparameters::PSO(PsoParams {
            swarm_size: 1,
            ..PsoParams::default()
        });
        assert!(run(&mut obj, &cfg, 1).is_err());
        cfg.hyperparameters = Hyperparameters::DE(DeParams {
            population: 3,
            ..DeParams::default()
        });
        assert!(run(&mut obj, &cfg, 1).is_err());
        assert!(run(&mut obj, &OptimizerConfig::new(Algorithm::DE, 0), 0).is_err());
        assert_eq!(obj.meter().used(), 0);
    }
}
