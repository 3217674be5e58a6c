//! Mann-Whitney U tests and the pairwise win/draw/loss rule.
//!
//! `U_a` counts pairs `(a_i, b_j)` with `a_i > b_j`, ties counting one half,
//! so a small `U_a` means `a` tends to be smaller. The exact mode computes the
//! permutation distribution of the (mid)rank sum by dynamic programming; the
//! approximate mode uses the normal approximation with tie-corrected variance
//! and a continuity correction of 1/2.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Largest combined sample size accepted by [`UTestMode::Exact`].
pub const EXACT_CAP: usize = 20;

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UTestMode {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UTestResult {
    pub u_statistic: f64,
    pub p_two_tailed: f64,
    /// Alternative: `a` is stochastically smaller than `b`.
    pub p_one_tailed_a_less: f64,
    /// Alternative: `a` is stochastically larger than `b`.
    pub p_one_tailed_a_greater: f64,
    pub method: UTestMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    AWins,
    Draw,
    BWins,
}

impl Outcome {
    /// Points for (a, b): 3/0 for a win, 1/1 for a draw.
    pub fn points(self) -> (u32, u32) {
        match self {
            Outcome::AWins => (3, 0),
            Outcome::Draw => (1, 1),
            Outcome::BWins => (0, 3),
        }
    }
}

/// Midranks (1-based) of the concatenation `a ++ b`.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end share ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn tie_term(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        let t = (end - start) as f64;
        total += t * t * t - t;
        start = end;
    }
    total
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

pub fn mann_whitney(a: &[f64], b: &[f64], mode: UTestMode) -> Result<UTestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let combined: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&combined);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let rank_sum_a: f64 = ranks[..a.len()].iter().sum();
    let u = rank_sum_a - na * (na + 1.0) / 2.0;

    let (p_less, p_greater) = match mode {
        UTestMode::Exact => {
            if combined.len() > EXACT_CAP {
                return Err(Error::ExactTooLarge {
                    cap: EXACT_CAP,
                    actual: combined.len(),
                });
            }
            exact_tails(&ranks, a.len(), rank_sum_a)
        }
        UTestMode::NormalApprox => {
            let n = na + nb;
            let mu = na * nb / 2.0;
            let var = na * nb / 12.0 * ((n + 1.0) - tie_term(&combined) / (n * (n - 1.0)));
            if var <= 0.0 {
                (1.0, 1.0)
            } else {
                let sd = var.sqrt();
                (
                    std_normal_cdf((u - mu + 0.5) / sd).min(1.0),
                    std_normal_cdf((mu - u + 0.5) / sd).min(1.0),
                )
            }
        }
    };

    Ok(UTestResult {
        u_statistic: u,
        p_two_tailed: (2.0 * p_less.min(p_greater)).min(1.0),
        p_one_tailed_a_less: p_less,
        p_one_tailed_a_greater: p_greater,
        method: mode,
    })
}

/// Exact lower and upper tail probabilities of the rank sum of a random
/// `k`-subset of `ranks`, evaluated at the observed sum.
fn exact_tails(ranks: &[f64], k: usize, observed: f64) -> (f64, f64) {
    // doubled midranks are integers
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    // ways[j][s]: subsets of size j with doubled rank sum s
    let mut ways = vec![vec![0u64; max_sum + 1]; k + 1];
    ways[0][0] = 1;
    for &r in &doubled {
        for j in (1..=k).rev() {
            for s in (r..=max_sum).rev() {
                ways[j][s] += ways[j - 1][s - r];
            }
        }
    }
    let obs = (2.0 * observed).round() as usize;
    let total: u64 = ways[k].iter().sum();
    let le: u64 = ways[k][..=obs.min(max_sum)].iter().sum();
    let ge: u64 = ways[k][obs.min(max_sum + 1)..].iter().sum();
    (le as f64 / total as f64, ge as f64 / total as f64)
}

/// Pairwise decision on two samples of losses (lower is better). A draw when
/// the two-tailed test is not significant (`p >= alpha`); otherwise the
/// one-tailed tests pick the direction.
pub fn compare(a: &[f64], b: &[f64], alpha: f64) -> Result<Outcome> {
    let r = mann_whitney(a, b, UTestMode::NormalApprox)?;
    Ok(if r.p_two_tailed >= alpha {
        Outcome::Draw
    } else if r.p_one_tailed_a_less < alpha {
        Outcome::AWins
    } else if r.p_one_tailed_a_greater < alpha {
        Outcome::BWins
    } else {
        Outcome::Draw
    })
}
