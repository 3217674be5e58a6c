//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nnreg_core::harness::{aggregate_mean_scores, score_checkpoint, ScoringOptions};
use nnreg_core::instance::enumerate_suite;
use nnreg_core::optimizers::{run, AdamParams, Hyperparameters, OptimizerConfig};
use nnreg_core::stats::{mann_whitney, UTestMode};
use nnreg_core::{
    run_experiment, Activation, Algorithm, DatasetSeedPolicy, ExperimentPlan, FunctionRegistry, InitScheme,
    ProblemInstance, Topology,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{check_gradient, doubled_u_by_pairs, synthetic_store};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn weight_counts() -> Outcome {
    let counts: Vec<usize> = Topology::ALL.iter().map(|t| t.architecture().param_count()).collect();
    ensure(counts == [41, 261, 481, 41, 261, 481], format!("Tanh1/3/5, ReLU1/3/5 -> {counts:?}"))
}

fn suite_cardinality() -> Outcome {
    let suite = enumerate_suite(DatasetSeedPolicy::Canonical).map_err(|e| e.to_string())?;
    let labels: HashSet<&str> = suite.iter().map(|i| i.label()).collect();
    ensure(
        suite.len() == 324 && labels.len() == 324,
        format!("{} instances, {} unique labels", suite.len(), labels.len()),
    )
}

fn dataset_contract() -> Outcome {
    let suite = enumerate_suite(DatasetSeedPolicy::Canonical).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for inst in suite.iter().filter(|i| i.topology() == Some(Topology::Tanh1)) {
        let ds = &inst.dataset;
        if ds.train_inputs.len() != 3750 || ds.test_inputs.len() != 1250 {
            return Err(format!("{}: split {}/{}", inst.label(), ds.train_inputs.len(), ds.test_inputs.len()));
        }
        let inputs_ok = ds
            .train_inputs
            .iter()
            .chain(&ds.test_inputs)
            .flatten()
            .all(|v| *v >= -1.0 - 1e-12 && *v <= 1.0 + 1e-12);
        let lo = ds.train_targets.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ds.train_targets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !inputs_ok || lo.abs() > 1e-12 || (hi - 1.0).abs() > 1e-12 {
            return Err(format!("{}: inputs in range {inputs_ok}, train targets [{lo}, {hi}]", inst.label()));
        }
        checked += 1;
    }
    ensure(checked == 54, format!("{checked} datasets: 5000 = 3750/1250, inputs in [-1,1], targets span [0,1] (1e-12)"))
}

fn gradient_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let (mut compared, mut skipped) = (0, 0);
    for case in 0..20 {
        let topology = Topology::ALL[case % 6];
        let arch = topology.architecture();
        let scheme = if rng.random_bool(0.5) {
            InitScheme::NormalUnit
        } else {
            InitScheme::FanInUniform
        };
        let params = arch.init_weights(rng.random(), scheme);
        let m = 16;
        let x: Vec<f64> = (0..2 * m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
        let (_, g) = arch.mse_value_and_gradient(&params, &x, &y).map_err(|e| e.to_string())?;
        let relu = arch.activation == Activation::ReLU;
        let c = check_gradient(|p| arch.batch_mse(p, &x, &y).unwrap(), &params, &g, 1e-3, 1e-8, relu);
        worst = worst.max(c.worst_relative_error);
        compared += c.compared;
        skipped += c.skipped_kinks;
    }
    ensure(
        worst <= 1e-5,
        format!(
            "20 cases, {compared} coordinates with |g| > 1e-8, worst relative error {worst:.2e} (<= 1e-5); \
             {skipped} ReLU coordinates skipped at kinks"
        ),
    )
}

/// Iterates all `k`-subsets of `0..n` as bit masks (Gosper's hack).
fn subsets(n: usize, k: usize) -> impl Iterator<Item = u32> {
    let mut mask: u32 = (1u32 << k) - 1;
    let limit = 1u32 << n;
    std::iter::from_fn(move || {
        if mask >= limit {
            return None;
        }
        let current = mask;
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
        Some(current)
    })
}

fn brute_force_tails(a: &[f64], b: &[f64]) -> (f64, f64) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let observed = doubled_u_by_pairs(a, b);
    let (mut le, mut ge, mut total) = (0u64, 0u64, 0u64);
    for mask in subsets(pooled.len(), a.len()) {
        let (mut ga, mut gb) = (Vec::new(), Vec::new());
        for (i, v) in pooled.iter().enumerate() {
            if mask >> i & 1 == 1 {
                ga.push(*v);
            } else {
                gb.push(*v);
            }
        }
        let u = doubled_u_by_pairs(&ga, &gb);
        le += u64::from(u <= observed);
        ge += u64::from(u >= observed);
        total += 1;
    }
    (le as f64 / total as f64, ge as f64 / total as f64)
}

fn mann_whitney_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut exact_cases = 0;
    for dataset in 0..50 {
        // half the datasets are tie-heavy small integers, half continuous
        let ties = dataset % 2 == 0;
        let pool: Vec<f64> = (0..16)
            .map(|_| {
                if ties {
                    f64::from(rng.random_range(0u8..5))
                } else {
                    rng.random_range(0.0..1.0)
                }
            })
            .collect();
        for na in 1..=8 {
            for nb in 1..=8 {
                let (a, b) = (&pool[..na], &pool[8..8 + nb]);
                let r = mann_whitney(a, b, UTestMode::Exact).map_err(|e| e.to_string())?;
                let (le, ge) = brute_force_tails(a, b);
                let two = (2.0 * le.min(ge)).min(1.0);
                if r.p_one_tailed_a_less != le || r.p_one_tailed_a_greater != ge || r.p_two_tailed != two {
                    return Err(format!(
                        "exact mismatch at ({na},{nb}) dataset {dataset}: {r:?} vs ({le}, {ge}, {two})"
                    ));
                }
                exact_cases += 1;
            }
        }
    }

    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let shift = rng.random_range(0.0..1.2);
        let a: Vec<f64> = (0..30).map(|_| rng.random_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..30).map(|_| rng.random_range(0.0..1.0) + shift * 0.5).collect();
        let approx = mann_whitney(&a, &b, UTestMode::NormalApprox)
            .map_err(|e| e.to_string())?
            .p_two_tailed;
        let observed = doubled_u_by_pairs(&a, &b);
        // without ties, 2U_a = 2 * (rank sum of a) - n_a (n_a + 1)
        let mut pooled: Vec<(f64, usize)> = a.iter().chain(&b).copied().zip(0..).collect();
        pooled.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut ranks = vec![0u64; 60];
        for (rank, (_, i)) in pooled.iter().enumerate() {
            ranks[*i] = rank as u64 + 1;
        }
        let (mut le, mut ge) = (0u64, 0u64);
        let permutations = 100_000;
        for _ in 0..permutations {
            ranks.shuffle(&mut rng);
            let u2 = 2 * ranks[..30].iter().sum::<u64>() - 30 * 31;
            le += u64::from(u2 <= observed);
            ge += u64::from(u2 >= observed);
        }
        let mc = (2.0 * le.min(ge) as f64 / permutations as f64).min(1.0);
        worst = worst.max((approx - mc).abs());
    }
    ensure(
        worst <= 0.01,
        format!(
            "exact == brute force on {exact_cases} cases (all sizes to (8,8) x 50 datasets); \
             approx vs 1e5-permutation MC on 200 (30,30) pairs: max |dp| = {worst:.4} (<= 0.01)"
        ),
    )
}

fn scoring_identities() -> Outcome {
    const FOUR: [Algorithm; 4] = [Algorithm::RandomSearch, Algorithm::PSO, Algorithm::DE, Algorithm::CMAES];
    let opts = ScoringOptions::default();
    let label = "f1/Tanh1";

    let dominant = synthetic_store(&[label], &FOUR, 30, &[10], |_, a, r| {
        if a == 1 {
            0.01 + r as f64 * 1e-5
        } else {
            0.5 + r as f64 * 1e-3
        }
    });
    let s = score_checkpoint(&dominant, label, 10, &opts).map_err(|e| e.to_string())?;
    if s[1].points != 9 || s[1].normalized != 1.0 {
        return Err(format!("dominant algorithm scored {:?}", s[1]));
    }

    let draws = synthetic_store(&[label], &FOUR, 30, &[10], |_, _, r| r as f64);
    let s = score_checkpoint(&draws, label, 10, &opts).map_err(|e| e.to_string())?;
    if s.iter().any(|x| x.points != 3 || x.normalized != 1.0 / 3.0) {
        return Err(format!("all-draw store scored {s:?}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut range = (u32::MAX, 0);
    for _ in 0..200 {
        let shifts: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.5)).collect();
        let noise: Vec<f64> = (0..4 * 30).map(|_| rng.random_range(0.0..1.0)).collect();
        let store = synthetic_store(&[label], &FOUR, 30, &[10], |_, a, r| shifts[a] + noise[a * 30 + r]);
        let s = score_checkpoint(&store, label, 10, &opts).map_err(|e| e.to_string())?;
        let total: u32 = s.iter().map(|x| x.points).sum();
        range = (range.0.min(total), range.1.max(total));
        if !(12..=18).contains(&total) {
            return Err(format!("checkpoint total {total} outside [12, 18]"));
        }
    }
    Ok(format!(
        "dominant 9 pts / 1.0; all-draw 3 pts / 1/3 each; 200 random stores: totals within [{}, {}] of [12, 18]",
        range.0, range.1
    ))
}

fn grid_determinism() -> Outcome {
    let mut plan = ExperimentPlan::new(vec!["f20/Tanh1".into(), "f26/ReLU3".into()], Algorithm::ALL.to_vec());
    plan.repetitions = 5;
    plan.budget = 200;
    plan.stride = 10;
    plan.master_seed = 2021;
    let registry = FunctionRegistry::new();
    let sequential = run_experiment(&plan, &registry, 1).map_err(|e| e.to_string())?;
    let parallel = run_experiment(&plan, &registry, 4).map_err(|e| e.to_string())?;

    let dirs = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    sequential.save(dirs.0.path()).map_err(|e| e.to_string())?;
    parallel.save(dirs.1.path()).map_err(|e| e.to_string())?;
    let mut files = 0;
    for entry in walk(dirs.0.path()) {
        let rel = entry.strip_prefix(dirs.0.path()).unwrap();
        let other = dirs.1.path().join(rel);
        if std::fs::read(&entry).ok() != std::fs::read(&other).ok() {
            return Err(format!("{} differs", rel.display()));
        }
        files += 1;
    }
    ensure(
        sequential == parallel && sequential.records.len() == 50 && sequential.is_complete(),
        format!("50 runs, in-memory stores equal, {files} stored files byte-identical (1 vs 4 workers)"),
    )
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out.sort();
    out
}

fn adam_determinism() -> Outcome {
    let inst = ProblemInstance::canonical(26, Topology::Tanh3).map_err(|e| e.to_string())?;
    let go = |seed: u64| {
        let config = OptimizerConfig {
            hyperparameters: Hyperparameters::Adam(AdamParams::default()),
            seed,
        };
        run(&mut inst.objective(300), &config, 10).unwrap()
    };
    let (a, b, c) = (go(11), go(11), go(12));
    let bits = |r: &nnreg_core::RunRecord| {
        r.checkpoints
            .iter()
            .flat_map(|c| [c.fe as u64, c.best_train_mse.to_bits(), c.test_mse.to_bits()])
            .chain(r.final_params.iter().map(|p| p.to_bits()))
            .collect::<Vec<u64>>()
    };
    ensure(
        bits(&a) == bits(&b) && bits(&a) != bits(&c),
        format!(
            "f26/Tanh3, 300 steps: same seed bit-identical over {} checkpoints; another seed differs",
            a.checkpoints.len()
        ),
    )
}

fn desk_scale_scores() -> Outcome {
    let instances: Vec<String> = [20, 26, 34, 43, 38].iter().map(|id| format!("f{id}/Tanh1")).collect();
    let mut plan = ExperimentPlan::new(instances, Algorithm::ALL.to_vec());
    plan.repetitions = 10;
    plan.budget = 500;
    plan.stride = 10;
    plan.master_seed = 1;
    let store = run_experiment(&plan, &FunctionRegistry::new(), 4).map_err(|e| e.to_string())?;
    let means = aggregate_mean_scores(&store, Topology::Tanh1, &ScoringOptions::default()).map_err(|e| e.to_string())?;
    let final_score = |alg: Algorithm| {
        means
            .iter()
            .find(|m| m.algorithm == alg && m.fe == 500)
            .map(|m| m.mean)
            .unwrap_or(f64::NAN)
    };
    let rs = final_score(Algorithm::RandomSearch);
    let detail = Algorithm::ALL
        .iter()
        .map(|a| format!("{a} {:.3}", final_score(*a)))
        .collect::<Vec<_>>()
        .join(", ");
    ensure(
        Algorithm::POPULATION.iter().all(|a| final_score(*a) > rs),
        format!("f20, f26, f34, f43, f38 x Tanh1, 10 reps, 500 FE; final mean normalized score: {detail}"),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn adam_difficulty_ordering() -> Outcome {
    let mut plan = ExperimentPlan::new(vec!["f20/Tanh5".into(), "f34/Tanh5".into()], vec![Algorithm::Adam]);
    plan.repetitions = 10;
    plan.budget = 1000;
    plan.stride = 100;
    plan.master_seed = 1;
    let store = run_experiment(&plan, &FunctionRegistry::new(), 4).map_err(|e| e.to_string())?;
    let finals = |label: &str| -> Vec<f64> {
        store
            .records
            .iter()
            .filter(|(cell, r)| cell.instance == label && r.is_completed())
            .filter_map(|(_, r)| r.final_test_mse())
            .collect()
    };
    let (easom, periodic) = (finals("f20/Tanh5"), finals("f34/Tanh5"));
    if easom.len() != 10 || periodic.len() != 10 {
        return Err(format!("completed runs: {} / {}", easom.len(), periodic.len()));
    }
    let (me, mp) = (median(easom), median(periodic));
    ensure(
        mp - me >= 0.05,
        format!(
            "Adam Tanh5, 1000 steps, 10 reps: median final test MSE Easom {me:.4}, Periodic {mp:.4}, margin {:.4} (>= 0.05)",
            mp - me
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("weight counts", weight_counts),
        ("suite cardinality", suite_cardinality),
        ("dataset contract", dataset_contract),
        ("gradient oracle", gradient_oracle),
        ("Mann-Whitney oracle", mann_whitney_oracle),
        ("scoring identities", scoring_identities),
        ("grid determinism", grid_determinism),
        ("Adam determinism", adam_determinism),
        ("desk-scale scores vs random search", desk_scale_scores),
        ("desk-scale Adam difficulty ordering", adam_difficulty_ordering),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name} ({secs:.1}s): {detail}");
            }
        }
    }
    println!("acceptance: {failed} failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
