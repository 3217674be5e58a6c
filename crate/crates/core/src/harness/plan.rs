//! Experiment plans and their TOML file format.
//!
//! ```toml
//! instances = ["f20/Tanh1", "f34/Tanh1"]   # or ["suite"] for all 324
//! algorithms = ["RandomSearch", "PSO", "DE", "CMAES", "Adam"]
//! repetitions = 30
//! budget = 5000
//! stride = 10
//! master_seed = 1
//! # dataset_seed = 42      # same dataset seed for every function; omit for the canonical table
//!
//! [pso]                     # optional per-algorithm overrides
//! swarm_size = 40
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{parse_label, suite_labels, DatasetSeedPolicy};
use crate::objective::DEFAULT_BUDGET;
use crate::optimizers::{AdamParams, Algorithm, CmaesParams, DeParams, Hyperparameters, PsoParams};
use crate::rng::derive_seed;

pub const DEFAULT_REPETITIONS: usize = 30;
pub const DEFAULT_STRIDE: usize = 10;

/// Expands to every canonical instance when used as the only entry of `instances`.
pub const SUITE_KEYWORD: &str = "suite";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub instances: Vec<String>,
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pso: Option<PsoParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub de: Option<DeParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cmaes: Option<CmaesParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adam: Option<AdamParams>,
}

fn default_repetitions() -> usize {
    DEFAULT_REPETITIONS
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

fn default_stride() -> usize {
    DEFAULT_STRIDE
}

impl ExperimentPlan {
    pub fn new(instances: Vec<String>, algorithms: Vec<Algorithm>) -> Self {
        ExperimentPlan {
            instances,
            algorithms,
            repetitions: DEFAULT_REPETITIONS,
            budget: DEFAULT_BUDGET,
            stride: DEFAULT_STRIDE,
            master_seed: 0,
            dataset_seed: None,
            pso: None,
            de: None,
            cmaes: None,
            adam: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let mut plan: ExperimentPlan =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("plan: {e}")))?;
        if plan.instances.len() == 1 && plan.instances[0] == SUITE_KEYWORD {
            plan.instances = suite_labels();
        }
        plan.validate()?;
        Ok(plan)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plan serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.instances.is_empty() {
            return bad("plan names no instances".into());
        }
        if self.algorithms.is_empty() {
            return bad("plan names no algorithms".into());
        }
        if self.repetitions < 2 {
            return bad(format!("repetitions {} < 2", self.repetitions));
        }
        if self.budget == 0 || self.stride == 0 {
            return bad("budget and stride must be positive".into());
        }
        for (i, label) in self.instances.iter().enumerate() {
            parse_label(label)?;
            if self.instances[..i].contains(label) {
                return bad(format!("instance {label} listed twice"));
            }
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].contains(a) {
                return bad(format!("algorithm {a} listed twice"));
            }
        }
        for a in &self.algorithms {
            self.hyperparameters(*a).validate()?;
        }
        Ok(())
    }

    pub fn hyperparameters(&self, algorithm: Algorithm) -> Hyperparameters {
        match algorithm {
            Algorithm::RandomSearch => Hyperparameters::RandomSearch,
            Algorithm::PSO => Hyperparameters::PSO(self.pso.unwrap_or_default()),
            Algorithm::DE => Hyperparameters::DE(self.de.unwrap_or_default()),
            Algorithm::CMAES => Hyperparameters::CMAES(self.cmaes.unwrap_or_default()),
            Algorithm::Adam => Hyperparameters::Adam(self.adam.unwrap_or_default()),
        }
    }

    pub fn dataset_policy(&self) -> DatasetSeedPolicy {
        match self.dataset_seed {
            Some(s) => DatasetSeedPolicy::Fixed(s),
            None => DatasetSeedPolicy::Canonical,
        }
    }

    /// Seed of one grid cell, derived from the master seed and the cell key.
    pub fn cell_seed(&self, instance: &str, algorithm: Algorithm, repetition: usize) -> u64 {
        derive_seed(
            self.master_seed,
            &[
                b"cell",
                instance.as_bytes(),
                algorithm.name().as_bytes(),
                &(repetition as u64).to_le_bytes(),
            ],
        )
    }

    /// All cells in plan order: instance-major, then algorithm, then repetition.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut out = Vec::with_capacity(self.instances.len() * self.algorithms.len() * self.repetitions);
        for instance in &self.instances {
            for &algorithm in &self.algorithms {
                for repetition in 0..self.repetitions {
                    out.push(CellKey {
                        instance: instance.clone(),
                        algorithm,
                        repetition,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub instance: String,
    pub algorithm: Algorithm,
    pub repetition: usize,
}

impl std::fmt::Display for CellKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} rep {}", self.instance, self.algorithm, self.repetition)
    }
}
