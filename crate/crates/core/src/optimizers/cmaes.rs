//! (mu/mu_w, lambda)-CMA-ES with cumulative step-size adaptation and
//! rank-one plus rank-mu covariance updates.
//!
//! The eigendecomposition of the covariance is refreshed lazily, every
//! `lambda / (c1 + c_mu) / n / 10` generations, which keeps 481-dimensional
//! runs cheap. If the covariance ever stops being positive definite (or goes
//! non-finite) it is reset to the identity and the run continues; each reset
//! is noted in the run record.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Algorithm, Hyperparameters, RunRecord, Tracker};
use crate::error::{Error, Result};
use crate::network::InitScheme;
use crate::objective::Objective;
use crate::rng::{rng_from_seed, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CmaesParams {
    /// Offspring per generation; `None` means `4 + floor(3 ln n)`.
    pub population: Option<usize>,
    pub initial_sigma: f64,
}

impl Default for CmaesParams {
    fn default() -> Self {
        CmaesParams {
            population: None,
            initial_sigma: 1.0,
        }
    }
}

impl CmaesParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(l) = self.population {
            if l < 2 {
                return Err(Error::InvalidConfig(format!("CMA-ES population {l} < 2")));
            }
        }
        if !(self.initial_sigma > 0.0 && self.initial_sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "CMA-ES initial sigma {} must be positive",
                self.initial_sigma
            )));
        }
        Ok(())
    }

    pub fn lambda(&self, dim: usize) -> usize {
        self.population
            .unwrap_or_else(|| 4 + (3.0 * (dim as f64).ln()).floor() as usize)
    }
}

pub(crate) struct CmaState {
    n: usize,
    pub(crate) lambda: usize,
    mu: usize,
    pub(crate) weights: Vec<f64>,
    mueff: f64,
    cc: f64,
    cs: f64,
    c1: f64,
    cmu: f64,
    damps: f64,
    chi_n: f64,
    pub(crate) mean: DVector<f64>,
    sigma: f64,
    pc: DVector<f64>,
    ps: DVector<f64>,
    pub(crate) cov: DMatrix<f64>,
    basis: DMatrix<f64>,
    scales: DVector<f64>,
    generation: usize,
    eigen_generation: usize,
    pub(crate) resets: usize,
}

impl CmaState {
    pub(crate) fn new(n: usize, params: &CmaesParams) -> Self {
        let lambda = params.lambda(n);
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu)
            .map(|i| ((lambda as f64 + 1.0) / 2.0).ln() - (i as f64).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mueff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let nf = n as f64;

        let cc = (4.0 + mueff / nf) / (nf + 4.0 + 2.0 * mueff / nf);
        let cs = (mueff + 2.0) / (nf + mueff + 5.0);
        let c1 = 2.0 / ((nf + 1.3).powi(2) + mueff);
        let cmu = (1.0 - c1).min(2.0 * (mueff - 2.0 + 1.0 / mueff) / ((nf + 2.0).powi(2) + mueff));
        let damps = 1.0 + 2.0 * (((mueff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + cs;
        let chi_n = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));

        CmaState {
            n,
            lambda,
            mu,
            weights,
            mueff,
            cc,
            cs,
            c1,
            cmu,
            damps,
            chi_n,
            mean: DVector::zeros(n),
            sigma: params.initial_sigma,
            pc: DVector::zeros(n),
            ps: DVector::zeros(n),
            cov: DMatrix::identity(n, n),
            basis: DMatrix::identity(n, n),
            scales: DVector::from_element(n, 1.0),
            generation: 0,
            eigen_generation: 0,
            resets: 0,
        }
    }

    /// Draws `lambda` steps `y ~ N(0, C)`; candidates are `mean + sigma * y`.
    pub(crate) fn sample(&self, rng: &mut Rng) -> Vec<DVector<f64>> {
        (0..self.lambda)
            .map(|_| {
                let z = DVector::from_fn(self.n, |_, _| rng.sample::<f64, _>(StandardNormal));
                &self.basis * z.component_mul(&self.scales)
            })
            .collect()
    }

    pub(crate) fn candidate(&self, step: &DVector<f64>) -> Vec<f64> {
        (&self.mean + step * self.sigma).as_slice().to_vec()
    }

    /// Updates the distribution from one full generation of steps and their
    /// fitness values.
    pub(crate) fn update(&mut self, steps: &[DVector<f64>], fitness: &[f64]) {
        let mut order: Vec<usize> = (0..steps.len()).collect();
        order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]));
        let selected: Vec<&DVector<f64>> = order[..self.mu].iter().map(|&i| &steps[i]).collect();

        let mut y_w = DVector::zeros(self.n);
        for (w, y) in self.weights.iter().zip(&selected) {
            y_w.axpy(*w, y, 1.0);
        }
        self.mean.axpy(self.sigma, &y_w, 1.0);
        self.generation += 1;

        // C^{-1/2} y_w = B D^{-1} B^T y_w
        let whitened = &self.basis * (self.basis.tr_mul(&y_w).component_div(&self.scales));
        let cs = self.cs;
        self.ps = &self.ps * (1.0 - cs) + whitened * (cs * (2.0 - cs) * self.mueff).sqrt();
        let ps_norm = self.ps.norm();
        let decay = 1.0 - (1.0 - cs).powi(2 * self.generation as i32);
        let hsig = ps_norm / decay.sqrt() / self.chi_n < 1.4 + 2.0 / (self.n as f64 + 1.0);
        let hsig_f = if hsig { 1.0 } else { 0.0 };

        let cc = self.cc;
        self.pc = &self.pc * (1.0 - cc) + &y_w * (hsig_f * (cc * (2.0 - cc) * self.mueff).sqrt());

        let old_weight = 1.0 - self.c1 - self.cmu + (1.0 - hsig_f) * self.c1 * cc * (2.0 - cc);
        self.cov *= old_weight;
        self.cov.ger(self.c1, &self.pc, &self.pc, 1.0);
        for (w, y) in self.weights.iter().zip(&selected) {
            self.cov.ger(self.cmu * w, y, y, 1.0);
        }

        self.sigma *= ((cs / self.damps) * (ps_norm / self.chi_n - 1.0)).exp();

        let gap = self.lambda as f64 / (self.c1 + self.cmu) / self.n as f64 / 10.0;
        if (self.generation - self.eigen_generation) as f64 > gap {
            self.refresh_eigen();
        }
        if !self.cov.iter().all(|v| v.is_finite()) {
            self.reset_covariance();
        }
    }

    fn refresh_eigen(&mut self) {
        self.eigen_generation = self.generation;
        let sym = (&self.cov + self.cov.transpose()) * 0.5;
        if !sym.iter().all(|v| v.is_finite()) {
            self.reset_covariance();
            return;
        }
        let eig = SymmetricEigen::new(sym.clone());
        if eig.eigenvalues.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            self.reset_covariance();
            return;
        }
        self.cov = sym;
        self.scales = eig.eigenvalues.map(f64::sqrt);
        self.basis = eig.eigenvectors;
    }

    fn reset_covariance(&mut self) {
        self.resets += 1;
        self.cov = DMatrix::identity(self.n, self.n);
        self.basis = DMatrix::identity(self.n, self.n);
        self.scales = DVector::from_element(self.n, 1.0);
        self.pc.fill(0.0);
        self.ps.fill(0.0);
        self.eigen_generation = self.generation;
    }
}

/// The mean starts at the origin with step size `initial_sigma` and identity
/// covariance. A generation cut short by the budget is never used for an
/// update.
pub fn run_cmaes<O: Objective>(objective: &mut O, params: &CmaesParams, seed: u64, stride: usize) -> Result<RunRecord> {
    params.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut state = CmaState::new(objective.dimension(), params);
    let mut tracker = Tracker::new(stride);

    'outer: loop {
        let steps = state.sample(&mut rng);
        let mut fitness = Vec::with_capacity(steps.len());
        for step in &steps {
            if objective.meter().is_exhausted() {
                break 'outer;
            }
            let x = state.candidate(step);
            fitness.push(tracker.evaluate(objective, &x)?);
        }
        state.update(&steps, &fitness);
    }

    let mut record = tracker.finish(
        objective,
        Algorithm::CMAES,
        Hyperparameters::CMAES(*params),
        seed,
        InitScheme::NormalUnit,
    )?;
    if state.resets > 0 {
        record.diagnostics.push(format!(
            "covariance reset to identity {} time(s) after losing positive definiteness",
            state.resets
        ));
    }
    Ok(record)
}
