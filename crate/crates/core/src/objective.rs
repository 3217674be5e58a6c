//! The budgeted black-box interface the optimizers run against.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::network::InitScheme;
use crate::rng::rng_from_seed;

pub const DEFAULT_BUDGET: usize = 5000;

/// Counts function evaluations against a hard limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetMeter {
    used: usize,
    limit: usize,
}

impl BudgetMeter {
    pub fn new(limit: usize) -> Self {
        BudgetMeter { used: 0, limit }
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn remaining(&self) -> usize {
        self.limit - self.used
    }

    pub fn is_exhausted(&self) -> bool {
        self.used >= self.limit
    }

    /// Takes one evaluation from the budget.
    pub fn charge(&mut self) -> Result<()> {
        if self.used >= self.limit {
            return Err(Error::BudgetExhausted { limit: self.limit });
        }
        self.used += 1;
        Ok(())
    }
}

impl Default for BudgetMeter {
    fn default() -> Self {
        BudgetMeter::new(DEFAULT_BUDGET)
    }
}

/// A minimization problem whose training-set evaluations are budgeted.
pub trait Objective {
    fn dimension(&self) -> usize;

    fn label(&self) -> String;

    fn meter(&self) -> &BudgetMeter;

    /// Training loss; costs one evaluation.
    fn eval_train(&mut self, params: &[f64]) -> Result<f64>;

    /// Held-out loss; free.
    fn eval_test(&self, params: &[f64]) -> Result<f64>;

    /// Training loss and gradient from one pass; costs one evaluation.
    fn train_value_and_gradient(&mut self, _params: &[f64]) -> Result<(f64, Vec<f64>)> {
        Err(Error::NotDifferentiable)
    }

    /// Starting point for gradient-based runs.
    fn initial_params(&self, scheme: InitScheme, seed: u64) -> Vec<f64> {
        shapeless_init(self.dimension(), scheme, seed)
    }
}

/// Initialization without layer structure: N(0, 1) or U(-1, 1) per coordinate.
fn shapeless_init(dimension: usize, scheme: InitScheme, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..dimension)
        .map(|_| match scheme {
            InitScheme::NormalUnit => rng.sample::<f64, _>(StandardNormal),
            InitScheme::FanInUniform => rng.random_range(-1.0..=1.0),
        })
        .collect()
}

type ValueFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Wraps a plain function as a budgeted objective. The test value equals the
/// training value.
pub struct FunctionObjective {
    name: String,
    dimension: usize,
    value: ValueFn,
    gradient: Option<GradFn>,
    start: Option<Vec<f64>>,
    meter: BudgetMeter,
}

impl FunctionObjective {
    pub fn new<F>(name: &str, dimension: usize, budget: usize, value: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        FunctionObjective {
            name: name.to_string(),
            dimension,
            value: Box::new(value),
            gradient: None,
            start: None,
            meter: BudgetMeter::new(budget),
        }
    }

    pub fn with_gradient<G>(mut self, gradient: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.gradient = Some(Box::new(gradient));
        self
    }

    /// Fixes the point returned by [`Objective::initial_params`].
    pub fn with_start(mut self, start: Vec<f64>) -> Self {
        self.start = Some(start);
        self
    }

    /// `sum(x_i^2)` with its gradient.
    pub fn sphere(dimension: usize, budget: usize) -> Self {
        FunctionObjective::new("sphere", dimension, budget, |x| x.iter().map(|v| v * v).sum())
            .with_gradient(|x| x.iter().map(|v| 2.0 * v).collect())
    }

    fn check(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: params.len(),
            });
        }
        Ok(())
    }
}

impl Objective for FunctionObjective {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn label(&self) -> String {
        self.name.clone()
    }

    fn meter(&self) -> &BudgetMeter {
        &self.meter
    }

    fn eval_train(&mut self, params: &[f64]) -> Result<f64> {
        self.check(params)?;
        self.meter.charge()?;
        Ok((self.value)(params))
    }

    fn eval_test(&self, params: &[f64]) -> Result<f64> {
        self.check(params)?;
        Ok((self.value)(params))
    }

    fn train_value_and_gradient(&mut self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check(params)?;
        let grad = self.gradient.as_ref().ok_or(Error::NotDifferentiable)?;
        self.meter.charge()?;
        Ok(((self.value)(params), grad(params)))
    }

    fn initial_params(&self, scheme: InitScheme, seed: u64) -> Vec<f64> {
        match &self.start {
            Some(s) => s.clone(),
            None => shapeless_init(self.dimension, scheme, seed),
        }
    }
}
