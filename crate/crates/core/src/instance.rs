//! Problem instances: one function's dataset paired with one network.
//!
//! Training-set evaluations go through a [`BudgetMeter`]; test-set
//! evaluations are free and leave all state untouched.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::dataset::{build_dataset, RegressionDataset};
use crate::error::{Error, Result};
use crate::functions::{catalog, FunctionRegistry, FunctionSpec};
use crate::network::{Architecture, InitScheme, Topology};
use crate::objective::{BudgetMeter, Objective};
use crate::rng::derive_seed;

/// Root of the canonical per-function dataset seeds.
pub const SUITE_SEED: u64 = 20_210_054;

/// Canonical dataset seed for a function id.
pub fn canonical_dataset_seed(function_id: u32) -> u64 {
    derive_seed(SUITE_SEED, &[b"dataset", &function_id.to_le_bytes()])
}

/// The canonical seed table as CSV (`function_id,name,dataset_seed`).
pub fn dataset_seed_manifest() -> String {
    let mut out = String::from("function_id,name,dataset_seed\n");
    for spec in catalog() {
        out.push_str(&format!("{},{},{}\n", spec.id, spec.name, canonical_dataset_seed(spec.id)));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DatasetSeedPolicy {
    /// One shipped seed per function.
    #[default]
    Canonical,
    /// The same seed for every function.
    Fixed(u64),
}

impl DatasetSeedPolicy {
    pub fn seed_for(self, function_id: u32) -> u64 {
        match self {
            DatasetSeedPolicy::Canonical => canonical_dataset_seed(function_id),
            DatasetSeedPolicy::Fixed(s) => s,
        }
    }
}

pub fn format_label(function_id: u32, arch_name: &str) -> String {
    format!("f{function_id}/{arch_name}")
}

/// Parses `f<ID>/<Topology>`.
pub fn parse_label(label: &str) -> Result<(u32, Topology)> {
    let bad = || Error::BadLabel(label.to_string());
    let (f, t) = label.trim().split_once('/').ok_or_else(bad)?;
    let id = f.strip_prefix('f').ok_or_else(bad)?.parse().map_err(|_| bad())?;
    Ok((id, t.parse()?))
}

#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub function_id: u32,
    pub function_name: String,
    pub architecture: Architecture,
    pub dataset: Arc<RegressionDataset>,
    pub dataset_seed: u64,
    label: String,
}

impl ProblemInstance {
    /// Builds a suite instance from a catalog or registered function.
    pub fn build(
        registry: &FunctionRegistry,
        function_id: u32,
        topology: Topology,
        dataset_seed: u64,
    ) -> Result<Self> {
        let spec = registry.get(function_id)?;
        let dataset = Arc::new(build_dataset(spec, dataset_seed)?);
        Self::with_dataset(spec, topology.architecture(), dataset, dataset_seed)
    }

    /// Catalog-only shorthand for [`ProblemInstance::build`].
    pub fn canonical(function_id: u32, topology: Topology) -> Result<Self> {
        Self::build(
            &FunctionRegistry::new(),
            function_id,
            topology,
            canonical_dataset_seed(function_id),
        )
    }

    pub fn with_dataset(
        spec: &FunctionSpec,
        architecture: Architecture,
        dataset: Arc<RegressionDataset>,
        dataset_seed: u64,
    ) -> Result<Self> {
        architecture.validate()?;
        if architecture.input_dim != 2 {
            return Err(Error::InvalidConfig(format!(
                "regression inputs are 2-D, architecture expects {}",
                architecture.input_dim
            )));
        }
        Ok(ProblemInstance {
            function_id: spec.id,
            function_name: spec.name.clone(),
            label: format_label(spec.id, &architecture.name()),
            architecture,
            dataset,
            dataset_seed,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dimension(&self) -> usize {
        self.architecture.param_count()
    }

    pub fn topology(&self) -> Option<Topology> {
        self.architecture.topology()
    }

    /// Full-batch training MSE; charges one evaluation.
    pub fn eval_train(&self, meter: &mut BudgetMeter, params: &[f64]) -> Result<f64> {
        self.check(params)?;
        meter.charge()?;
        let ds = &self.dataset;
        self.architecture.batch_mse(params, ds.train_flat(), &ds.train_targets)
    }

    /// Training MSE and gradient from a single full pass; charges one evaluation.
    pub fn eval_train_with_gradient(
        &self,
        meter: &mut BudgetMeter,
        params: &[f64],
    ) -> Result<(f64, Vec<f64>)> {
        self.check(params)?;
        meter.charge()?;
        let ds = &self.dataset;
        self.architecture
            .mse_value_and_gradient(params, ds.train_flat(), &ds.train_targets)
    }

    pub fn eval_test(&self, params: &[f64]) -> Result<f64> {
        let ds = &self.dataset;
        self.architecture.batch_mse(params, ds.test_flat(), &ds.test_targets)
    }

    fn check(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                actual: params.len(),
            });
        }
        Ok(())
    }

    /// Pairs the instance with a fresh meter.
    pub fn objective(&self, budget: usize) -> InstanceObjective<'_> {
        InstanceObjective {
            instance: self,
            meter: BudgetMeter::new(budget),
        }
    }
}

/// A problem instance and the meter of the single run that owns it.
#[derive(Debug)]
pub struct InstanceObjective<'a> {
    pub instance: &'a ProblemInstance,
    pub meter: BudgetMeter,
}

impl Objective for InstanceObjective<'_> {
    fn dimension(&self) -> usize {
        self.instance.dimension()
    }

    fn label(&self) -> String {
        self.instance.label().to_string()
    }

    fn meter(&self) -> &BudgetMeter {
        &self.meter
    }

    fn eval_train(&mut self, params: &[f64]) -> Result<f64> {
        self.instance.eval_train(&mut self.meter, params)
    }

    fn eval_test(&self, params: &[f64]) -> Result<f64> {
        self.instance.eval_test(params)
    }

    fn train_value_and_gradient(&mut self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.instance.eval_train_with_gradient(&mut self.meter, params)
    }

    fn initial_params(&self, scheme: InitScheme, seed: u64) -> Vec<f64> {
        self.instance.architecture.init_weights(seed, scheme)
    }
}

/// All 54 x 6 canonical instances, function-major. The six topologies of a
/// function share one dataset.
pub fn enumerate_suite(policy: DatasetSeedPolicy) -> Result<Vec<ProblemInstance>> {
    let registry = FunctionRegistry::new();
    let mut out = Vec::with_capacity(catalog().len() * Topology::ALL.len());
    for spec in catalog() {
        let seed = policy.seed_for(spec.id);
        let dataset = Arc::new(build_dataset(spec, seed)?);
        for t in Topology::ALL {
            out.push(ProblemInstance::with_dataset(
                registry.get(spec.id)?,
                t.architecture(),
                Arc::clone(&dataset),
                seed,
            )?);
        }
    }
    Ok(out)
}

/// Labels of the canonical suite without building any data.
pub fn suite_labels() -> Vec<String> {
    catalog()
        .iter()
        .flat_map(|s| Topology::ALL.map(|t| format_label(s.id, t.name())))
        .collect()
}

/// Builds the instances named by `labels`, sharing one dataset per function.
pub fn build_instances(
    registry: &FunctionRegistry,
    labels: &[String],
    policy: DatasetSeedPolicy,
) -> Result<Vec<ProblemInstance>> {
    let mut datasets: BTreeMap<u32, Arc<RegressionDataset>> = BTreeMap::new();
    labels
        .iter()
        .map(|label| {
            let (id, topology) = parse_label(label)?;
            let spec = registry.get(id)?;
            let seed = policy.seed_for(id);
            let ds = match datasets.get(&id) {
                Some(ds) => Arc::clone(ds),
                None => {
                    let ds = Arc::new(build_dataset(spec, seed)?);
                    datasets.insert(id, Arc::clone(&ds));
                    ds
                }
            };
            ProblemInstance::with_dataset(spec, topology.architecture(), ds, seed)
        })
        .collect()
}
