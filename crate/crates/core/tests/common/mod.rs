#![allow(dead_code)]

use nnreg_core::harness::CellKey;
use nnreg_core::optimizers::{Checkpoint, Hyperparameters, RunRecord, RunStatus};
use nnreg_core::{Algorithm, ExperimentPlan, InitScheme, ResultStore};

/// A complete store whose test MSE at every checkpoint of cell
/// (instance i, algorithm a, repetition r) is `value(i, a, r)`.
pub fn synthetic_store(
    instances: &[&str],
    algorithms: &[Algorithm],
    reps: usize,
    fes: &[usize],
    value: impl Fn(usize, usize, usize) -> f64,
) -> ResultStore {
    let budget = *fes.last().expect("at least one checkpoint");
    let mut plan = ExperimentPlan::new(instances.iter().map(|s| s.to_string()).collect(), algorithms.to_vec());
    plan.repetitions = reps;
    plan.budget = budget;
    plan.stride = fes[0];
    let mut store = ResultStore::new(plan);
    for (i, instance) in instances.iter().enumerate() {
        for (a, &algorithm) in algorithms.iter().enumerate() {
            for r in 0..reps {
                let v = value(i, a, r);
                let record = RunRecord {
                    instance: instance.to_string(),
                    algorithm,
                    seed: 0,
                    hyperparameters: Hyperparameters::defaults(algorithm),
                    init: InitScheme::NormalUnit,
                    fe_accounting: String::new(),
                    budget,
                    fe_consumed: budget,
                    checkpoint_stride: fes[0],
                    status: RunStatus::Completed,
                    diagnostics: Vec::new(),
                    checkpoints: fes
                        .iter()
                        .map(|&fe| Checkpoint {
                            fe,
                            best_train_mse: v,
                            test_mse: v,
                        })
                        .collect(),
                    final_params: Vec::new(),
                };
                let cell = CellKey {
                    instance: instance.to_string(),
                    algorithm,
                    repetition: r,
                };
                store.insert(cell, record);
            }
        }
    }
    store
}

/// Result of comparing an analytic gradient against finite differences.
#[derive(Debug, Clone, Copy, Default)]
pub struct GradientCheck {
    pub worst_relative_error: f64,
    pub compared: usize,
    /// Coordinates whose stencil straddles a ReLU kink.
    pub skipped_kinks: usize,
}

/// Checks `g` against the fourth-order central difference
/// `(f(x-2h) - 8f(x-h) + 8f(x+h) - f(x+2h)) / 12h` on every coordinate with
/// `|g| > floor`, using relative error `|g - fd| / max(|g|, |fd|)`.
///
/// With `piecewise_quadratic` set (ReLU networks: the MSE is a piecewise
/// quadratic in any single weight) a coordinate whose five stencil points do
/// not lie on one quadratic has crossed a kink, where finite differences say
/// nothing about the derivative; those are counted and skipped.
pub fn check_gradient(
    f: impl Fn(&[f64]) -> f64,
    x: &[f64],
    g: &[f64],
    h: f64,
    floor: f64,
    piecewise_quadratic: bool,
) -> GradientCheck {
    let mut probe = x.to_vec();
    let mut at = |k: usize, offset: f64| {
        probe[k] = x[k] + offset;
        let v = f(&probe);
        probe[k] = x[k];
        v
    };
    let mut out = GradientCheck::default();
    for k in 0..x.len() {
        if g[k].abs() <= floor {
            continue;
        }
        let (m2, m1, p1, p2) = (at(k, -2.0 * h), at(k, -h), at(k, h), at(k, 2.0 * h));
        if piecewise_quadratic {
            let third = p2 - 2.0 * p1 + 2.0 * m1 - m2;
            let scale = m2.abs().max(p2.abs()).max(1.0);
            if third.abs() > 1e-12 * scale {
                out.skipped_kinks += 1;
                continue;
            }
        }
        let fd = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
        let rel = (g[k] - fd).abs() / g[k].abs().max(fd.abs());
        out.worst_relative_error = out.worst_relative_error.max(rel);
        out.compared += 1;
    }
    out
}

/// `U_a` by direct pair counting, doubled so it stays an integer.
pub fn doubled_u_by_pairs(a: &[f64], b: &[f64]) -> u64 {
    let mut u = 0;
    for x in a {
        for y in b {
            if x > y {
                u += 2;
            } else if x == y {
                u += 1;
            }
        }
    }
    u
}
