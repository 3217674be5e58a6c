use rand::Rng as _;
use rand_distr::StandardNormal;

use super::{Algorithm, Hyperparameters, RunRecord, Tracker};
use crate::error::Result;
use crate::network::InitScheme;
use crate::objective::Objective;
use crate::rng::rng_from_seed;

/// Independent N(0, I) proposals until the budget is gone.
pub fn run_random_search<O: Objective>(objective: &mut O, seed: u64, stride: usize) -> Result<RunRecord> {
    let mut rng = rng_from_seed(seed);
    let dim = objective.dimension();
    let mut tracker = Tracker::new(stride);
    let mut candidate = vec![0.0; dim];
    while !objective.meter().is_exhausted() {
        for v in candidate.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        tracker.evaluate(objective, &candidate)?;
    }
    tracker.finish(
        objective,
        Algorithm::RandomSearch,
        Hyperparameters::RandomSearch,
        seed,
        InitScheme::NormalUnit,
    )
}
