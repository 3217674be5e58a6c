use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Algorithm, Hyperparameters, RunRecord, Tracker};
use crate::error::{Error, Result};
use crate::network::InitScheme;
use crate::objective::Objective;
use crate::rng::{rng_from_seed, Rng};

/// DE/rand/1 with two-point crossover. The crossover segment replaces the
/// usual per-coordinate crossover rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeParams {
    pub population: usize,
    pub differential_weight: f64,
}

impl Default for DeParams {
    fn default() -> Self {
        DeParams {
            population: 30,
            differential_weight: 0.8,
        }
    }
}

impl DeParams {
    pub fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(Error::InvalidConfig(format!("DE population {} < 4", self.population)));
        }
        if !(self.differential_weight > 0.0 && self.differential_weight <= 2.0) {
            return Err(Error::InvalidConfig(format!(
                "DE differential weight {} outside (0, 2]",
                self.differential_weight
            )));
        }
        Ok(())
    }
}

/// Three distinct indices in `0..n`, all different from `target`.
fn pick_three(rng: &mut Rng, n: usize, target: usize) -> [usize; 3] {
    let mut out = [usize::MAX; 3];
    let mut k = 0;
    while k < 3 {
        let c = rng.random_range(0..n);
        if c != target && !out[..k].contains(&c) {
            out[k] = c;
            k += 1;
        }
    }
    out
}

/// Copies `mutant[lo..hi]` into a copy of `parent`; `lo < hi` so at least
/// one coordinate comes from the mutant.
pub(crate) fn two_point_crossover(parent: &[f64], mutant: &[f64], lo: usize, hi: usize) -> Vec<f64> {
    let mut trial = parent.to_vec();
    trial[lo..hi].copy_from_slice(&mutant[lo..hi]);
    trial
}

fn cut_points(rng: &mut Rng, dim: usize) -> (usize, usize) {
    let lo = rng.random_range(0..dim);
    let hi = rng.random_range(lo + 1..=dim);
    (lo, hi)
}

/// The population starts at N(0, I). Targets are visited in index order and
/// a trial replaces its target immediately when it is no worse.
pub fn run_de<O: Objective>(objective: &mut O, params: &DeParams, seed: u64, stride: usize) -> Result<RunRecord> {
    params.validate()?;
    let mut rng = rng_from_seed(seed);
    let dim = objective.dimension();
    let n = params.population;
    let mut tracker = Tracker::new(stride);

    let mut population: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let mut fitness = Vec::with_capacity(n);
    for x in &population {
        if objective.meter().is_exhausted() {
            break;
        }
        fitness.push(tracker.evaluate(objective, x)?);
    }

    'outer: loop {
        for i in 0..n {
            if objective.meter().is_exhausted() {
                break 'outer;
            }
            let [a, b, c] = pick_three(&mut rng, n, i);
            let mutant: Vec<f64> = (0..dim)
                .map(|d| population[a][d] + params.differential_weight * (population[b][d] - population[c][d]))
                .collect();
            let (lo, hi) = cut_points(&mut rng, dim);
            let trial = two_point_crossover(&population[i], &mutant, lo, hi);
            let value = tracker.evaluate(objective, &trial)?;
            if value <= fitness[i] {
                population[i] = trial;
                fitness[i] = value;
            }
        }
    }
    tracker.finish(
        objective,
        Algorithm::DE,
        Hyperparameters::DE(*params),
        seed,
        InitScheme::NormalUnit,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::FunctionObjective;
    use crate::optimizers::test_support::assert_monotone;

    #[test]
    fn crossover_copies_segment_only() {
        let parent = [0.0; 6];
        let mutant = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let t = two_point_crossover(&parent, &mutant, 2, 5);
        assert_eq!(t, vec![0.0, 0.0, 3.0, 4.0, 5.0, 0.0]);
        let mut rng = rng_from_seed(0);
        for _ in 0..1000 {
            let (lo, hi) = cut_points(&mut rng, 6);
            assert!(lo < hi && hi <= 6);
            let t = two_point_crossover(&parent, &mutant, lo, hi);
            for d in 0..6 {
                let inside = (lo..hi).contains(&d);
                assert_eq!(t[d], if inside { mutant[d] } else { parent[d] });
            }
        }
    }

    #[test]
    fn donors_are_distinct() {
        let mut rng = rng_from_seed(1);
        for target in 0..4 {
            for _ in 0..200 {
                let [a, b, c] = pick_three(&mut rng, 4, target);
                assert!(a != b && b != c && a != c);
                assert!(![a, b, c].contains(&target));
            }
        }
    }

    #[test]
    fn solves_2d_sphere() {
        let mut solved = 0;
        for seed in 0..30 {
            let mut obj = FunctionObjective::sphere(2, 2000);
            let rec = run_de(&mut obj, &DeParams::default(), seed, 30).unwrap();
            assert_monotone(&rec);
            if rec.final_checkpoint().unwrap().best_train_mse < 1e-3 {
                solved += 1;
            }
        }
        assert!(solved >= 28, "{solved}/30");
    }

    #[test]
    fn population_best_never_worsens_per_generation() {
        // with stride = population size each checkpoint closes a generation
        let mut obj = FunctionObjective::new("ellipsoid", 5, 900, |x| {
            x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v * v).sum()
        });
        let rec = run_de(&mut obj, &DeParams::default(), 3, 30).unwrap();
        assert_eq!(rec.checkpoints.len(), 30);
        assert_monotone(&rec);
    }
}
