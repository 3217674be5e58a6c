//! Neural-network regression instances as black-box benchmark problems.
//!
//! A problem instance pairs one of the 54 two-input test functions with one
//! of six small multilayer perceptrons; the decision vector is the flattened
//! weight vector and the objective is training MSE. The crate also provides
//! the optimizers, the statistical comparison, and the experiment harness.

pub mod dataset;
pub mod error;
pub mod functions;
pub mod harness;
pub mod instance;
pub mod network;
pub mod objective;
pub mod optimizers;
pub mod rng;
pub mod stats;

pub use dataset::{RawDataset, RegressionDataset, ScalingParams};
pub use error::{Error, Result};
pub use functions::{catalog, Catalog, Domain, FunctionRegistry, FunctionSpec, Interval};
pub use harness::{run_experiment, CellKey, ExperimentPlan, ResultStore};
pub use instance::{DatasetSeedPolicy, ProblemInstance};
pub use network::{Activation, Architecture, InitScheme, Topology};
pub use objective::{BudgetMeter, Objective};
pub use optimizers::{Algorithm, Checkpoint, Hyperparameters, OptimizerConfig, RunRecord, RunStatus};
pub use stats::{compare, mann_whitney, Outcome, UTestMode, UTestResult};
