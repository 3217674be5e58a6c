use serde::{Deserialize, Serialize};

use super::{Algorithm, Hyperparameters, RunRecord, RunStatus, Tracker};
use crate::error::{Error, Result};
use crate::network::InitScheme;
use crate::objective::Objective;
use crate::rng::derive_seed_str;

/// Full-batch Adam with bias-corrected moment estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub init: InitScheme,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            init: InitScheme::FanInUniform,
        }
    }
}

impl AdamParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |b: f64| (0.0..1.0).contains(&b);
        if !(self.learning_rate > 0.0) || !unit(self.beta1) || !unit(self.beta2) || !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!("invalid Adam parameters {self:?}")));
        }
        Ok(())
    }
}

struct AdamState {
    params: AdamParams,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl AdamState {
    fn new(params: AdamParams, dim: usize) -> Self {
        AdamState {
            params,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }

    fn step(&mut self, theta: &mut [f64], grad: &[f64]) {
        let AdamParams {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            ..
        } = self.params;
        self.t += 1;
        let c1 = 1.0 - beta1.powi(self.t);
        let c2 = 1.0 - beta2.powi(self.t);
        for (((p, g), m), v) in theta.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
    }
}

/// Each step evaluates loss and gradient at the current weights in one full
/// pass (one evaluation), records it, then moves. Initial weights come from
/// the objective's initializer under a seed derived from `seed`.
///
/// A non-finite gradient ends the run early with [`RunStatus::Aborted`].
pub fn run_adam<O: Objective>(objective: &mut O, params: &AdamParams, seed: u64, stride: usize) -> Result<RunRecord> {
    params.validate()?;
    let mut theta = objective.initial_params(params.init, derive_seed_str(seed, "init"));
    let mut state = AdamState::new(*params, theta.len());
    let mut tracker = Tracker::new(stride);
    let mut abort = None;

    while !objective.meter().is_exhausted() {
        let (loss, grad) = objective.train_value_and_gradient(&theta)?;
        tracker.observe(objective, &theta, loss)?;
        if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
            abort = Some(format!(
                "non-finite gradient component {i} at fe {}",
                objective.meter().used()
            ));
            break;
        }
        state.step(&mut theta, &grad);
    }

    let mut record = tracker.finish(
        objective,
        Algorithm::Adam,
        Hyperparameters::Adam(*params),
        seed,
        params.init,
    )?;
    record.fe_accounting = "1 FE per step (one full-batch forward and backward pass)".to_string();
    if let Some(reason) = abort {
        record.diagnostics.push(reason.clone());
        record.status = RunStatus::Aborted(reason);
    }
    Ok(record)
}
