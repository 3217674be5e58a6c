use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Algorithm, Hyperparameters, RunRecord, Tracker};
use crate::error::{Error, Result};
use crate::network::InitScheme;
use crate::objective::Objective;
use crate::rng::{rng_from_seed, Rng};

/// Global-best PSO with constant inertia.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoParams {
    pub swarm_size: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            swarm_size: 40,
            inertia: 0.7213,
            cognitive: 1.1931,
            social: 1.1931,
        }
    }
}

impl PsoParams {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 2 {
            return Err(Error::InvalidConfig(format!("PSO swarm size {} < 2", self.swarm_size)));
        }
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.inertia) || !ok(self.cognitive) || !ok(self.social) {
            return Err(Error::InvalidConfig("PSO coefficients must be finite and non-negative".into()));
        }
        Ok(())
    }
}

struct Particle {
    position: Vec<f64>,
    velocity: Vec<f64>,
    best_position: Vec<f64>,
    best_value: f64,
}

struct Swarm {
    params: PsoParams,
    particles: Vec<Particle>,
    global_best: Vec<f64>,
    global_value: f64,
}

impl Swarm {
    fn new(params: PsoParams, dim: usize, rng: &mut Rng) -> Self {
        let particles = (0..params.swarm_size)
            .map(|_| {
                let position: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                Particle {
                    best_position: position.clone(),
                    position,
                    velocity: vec![0.0; dim],
                    best_value: f64::INFINITY,
                }
            })
            .collect();
        Swarm {
            params,
            particles,
            global_best: vec![0.0; dim],
            global_value: f64::INFINITY,
        }
    }

    fn record(&mut self, i: usize, value: f64) {
        let p = &mut self.particles[i];
        if value < p.best_value {
            p.best_value = value;
            p.best_position.clone_from(&p.position);
        }
        if value < self.global_value {
            self.global_value = value;
            self.global_best.clone_from(&p.position);
        }
    }

    fn move_particle(&mut self, i: usize, rng: &mut Rng) {
        let PsoParams {
            inertia,
            cognitive,
            social,
            ..
        } = self.params;
        let p = &mut self.particles[i];
        for d in 0..p.position.len() {
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            let x = p.position[d];
            p.velocity[d] = inertia * p.velocity[d]
                + cognitive * r1 * (p.best_position[d] - x)
                + social * r2 * (self.global_best[d] - x);
            p.position[d] = x + p.velocity[d];
        }
    }
}

/// Particles start at N(0, I) with zero velocity. After the initial sweep,
/// each particle in index order moves and is evaluated; the global best is
/// updated as soon as a particle improves on it.
pub fn run_pso<O: Objective>(objective: &mut O, params: &PsoParams, seed: u64, stride: usize) -> Result<RunRecord> {
    params.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut swarm = Swarm::new(*params, objective.dimension(), &mut rng);
    let mut tracker = Tracker::new(stride);

    let mut initial_sweep = true;
    'outer: loop {
        for i in 0..swarm.particles.len() {
            if objective.meter().is_exhausted() {
                break 'outer;
            }
            if !initial_sweep {
                swarm.move_particle(i, &mut rng);
            }
            let value = tracker.evaluate(objective, &swarm.particles[i].position)?;
            swarm.record(i, value);
        }
        initial_sweep = false;
    }
    tracker.finish(
        objective,
        Algorithm::PSO,
        Hyperparameters::PSO(*params),
        seed,
        InitScheme::NormalUnit,
    )
}
