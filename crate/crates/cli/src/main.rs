//! `nnreg`: generate datasets, run experiment plans and score result stores.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags, invalid plans,
//! unknown ids), 2 for runtime failures (I/O, failed cells, incomplete stores).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use nnreg_core::dataset::{build_dataset, export_csv, file_name};
use nnreg_core::functions::manifest_csv;
use nnreg_core::harness::{
    aggregate_mean_scores, baseline_comparison, baseline_csv, per_instance_summary, score_all, scores_csv,
    summary_csv, ScoringOptions,
};
use nnreg_core::instance::{canonical_dataset_seed, format_label, parse_label};
use nnreg_core::{catalog, run_experiment, Error, ExperimentPlan, FunctionRegistry, ResultStore, Topology};

/// Environment variable that overrides the default output directory.
const OUT_DIR_ENV: &str = "NNREG_OUT_DIR";

#[derive(Parser)]
#[command(name = "nnreg", version, about = "Neural-network regression benchmark suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the topology, function or instance table as CSV.
    List(ListArgs),
    /// Write one function's dataset as CSV (plus a JSON scaling sidecar).
    GenData {
        #[arg(long = "function", value_name = "ID")]
        function: u32,
        /// Dataset seed; defaults to the function's canonical seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = OUT_DIR_ENV, default_value = "nnreg-out")]
        out: PathBuf,
    },
    /// Run an experiment plan into a result store directory.
    Run {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, env = OUT_DIR_ENV, default_value = "nnreg-out")]
        out: PathBuf,
        /// Worker threads; results do not depend on it.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        parallel: u64,
    },
    /// Pairwise scores at every checkpoint (scores.csv).
    Score {
        #[command(flatten)]
        store: StoreArgs,
        /// Also write per-topology mean and standard deviation of the scores.
        #[arg(long, value_name = "FILE")]
        means: Option<PathBuf>,
    },
    /// Mean final test MSE per instance and algorithm (summary.csv).
    Summarize(StoreArgs),
    /// Best population-based algorithm against Adam per instance (baseline.csv).
    Baseline(StoreArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ListArgs {
    #[arg(long)]
    topologies: bool,
    #[arg(long)]
    functions: bool,
    #[arg(long)]
    instances: bool,
}

#[derive(Args)]
struct StoreArgs {
    #[arg(long)]
    store: PathBuf,
    /// Output file; defaults to the conventional name inside the store.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict to one topology.
    #[arg(long)]
    topology: Option<Topology>,
    /// Significance level of the pairwise tests.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Proceed on an incomplete store, skipping missing cells.
    #[arg(long)]
    force: bool,
}

impl StoreArgs {
    fn options(&self) -> anyhow::Result<ScoringOptions> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(usage(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        Ok(ScoringOptions {
            alpha: self.alpha,
            force: self.force,
        })
    }

    fn output(&self, default_name: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| self.store.join(default_name))
    }

    /// Topologies to report: the requested one, or all in the plan.
    fn topologies(&self, store: &ResultStore) -> anyhow::Result<Vec<Topology>> {
        if let Some(t) = self.topology {
            return Ok(vec![t]);
        }
        let mut out = Vec::new();
        for label in &store.plan.instances {
            let t = parse_label(label)?.1;
            if !out.contains(&t) {
                out.push(t);
            }
        }
        Ok(out)
    }
}

/// Marks an error as a usage error (exit code 1).
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(message: String) -> anyhow::Error {
    Usage(message).into()
}

fn is_usage(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        cause.is::<Usage>()
            || matches!(
                cause.downcast_ref::<Error>(),
                Some(
                    Error::InvalidConfig(_)
                        | Error::UnknownFunction(_)
                        | Error::UnknownTopology(_)
                        | Error::BadLabel(_)
                        | Error::InvalidDomain { .. }
                )
            )
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage(&e) { 1 } else { 2 })
        }
    }
}

fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::List(args) => list(&args),
        Command::GenData { function, seed, out } => gen_data(function, seed, &out),
        Command::Run { plan, out, parallel } => run(&plan, &out, parallel as usize),
        Command::Score { store, means } => score(&store, means.as_deref()),
        Command::Summarize(args) => summarize(&args),
        Command::Baseline(args) => baseline(&args),
    }
}

fn list(args: &ListArgs) -> anyhow::Result<()> {
    let mut out = String::new();
    if args.topologies {
        out.push_str("name,activation,hidden_layers,hidden_width,params\n");
        for t in Topology::ALL {
            let a = t.architecture();
            out.push_str(&format!(
                "{},{:?},{},{},{}\n",
                t,
                a.activation,
                a.hidden_layers,
                a.hidden_width,
                a.param_count()
            ));
        }
    } else if args.functions {
        out = manifest_csv(catalog());
    } else {
        out.push_str("label,function_id,function,topology,params\n");
        for spec in catalog() {
            for t in Topology::ALL {
                out.push_str(&format!(
                    "{},{},\"{}\",{},{}\n",
                    format_label(spec.id, t.name()),
                    spec.id,
                    spec.name,
                    t,
                    t.architecture().param_count()
                ));
            }
        }
    }
    print!("{out}");
    Ok(())
}

fn gen_data(function: u32, seed: Option<u64>, out: &Path) -> anyhow::Result<()> {
    let registry = FunctionRegistry::new();
    let spec = registry.get(function)?;
    let seed = seed.unwrap_or_else(|| canonical_dataset_seed(function));
    let ds = build_dataset(spec, seed)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join(file_name(spec));
    export_csv(&ds, &path)?;
    println!(
        "wrote {} ({} train, {} test, seed {seed})",
        path.display(),
        ds.train_inputs.len(),
        ds.test_inputs.len()
    );
    Ok(())
}

fn run(plan_path: &Path, out: &Path, parallel: usize) -> anyhow::Result<()> {
    let text = fs::read_to_string(plan_path).map_err(|e| usage(format!("reading {}: {e}", plan_path.display())))?;
    let plan = ExperimentPlan::from_toml(&text)?;
    let store = run_experiment(&plan, &FunctionRegistry::new(), parallel)?;
    store.save(out)?;
    for f in &store.failures {
        eprintln!("cell failed: {}: {}", f.cell, f.message);
    }
    if !store.failures.is_empty() {
        bail!("{} of {} cells failed; store at {} is incomplete", store.failures.len(), plan.cells().len(), out.display());
    }
    println!("wrote {} runs to {}", store.records.len(), out.display());
    Ok(())
}

fn load(args: &StoreArgs) -> anyhow::Result<(ResultStore, ScoringOptions)> {
    let opts = args.options()?;
    let store = ResultStore::load(&args.store)?;
    if !opts.force {
        store.require_complete()?;
    }
    Ok((store, opts))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn score(args: &StoreArgs, means: Option<&Path>) -> anyhow::Result<()> {
    let (store, opts) = load(args)?;
    let mut table = score_all(&store, &opts)?;
    let topologies = args.topologies(&store)?;
    table.rows.retain(|r| topologies.iter().any(|t| t.name() == r.topology));
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    let out = args.output("scores.csv");
    write(&out, &scores_csv(&table))?;
    if let Some(path) = means {
        let mut text = String::from("topology,algorithm,fe,mean,std_dev,instances\n");
        for t in &topologies {
            for m in aggregate_mean_scores(&store, *t, &opts)? {
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    t, m.algorithm, m.fe, m.mean, m.std_dev, m.instances
                ));
            }
        }
        write(path, &text)?;
    }
    println!("wrote {} score rows to {}", table.rows.len(), out.display());
    Ok(())
}

fn summarize(args: &StoreArgs) -> anyhow::Result<()> {
    let (store, opts) = load(args)?;
    let mut text = String::new();
    for t in args.topologies(&store)? {
        let csv = summary_csv(&per_instance_summary(&store, t, &opts)?);
        // keep a single header when several topologies are concatenated
        let body = if text.is_empty() { &csv[..] } else { csv.split_once('\n').map_or("", |x| x.1) };
        text.push_str(body);
    }
    let out = args.output("summary.csv");
    write(&out, &text)?;
    println!("wrote {} summary rows to {}", text.lines().count() - 1, out.display());
    Ok(())
}

fn baseline(args: &StoreArgs) -> anyhow::Result<()> {
    let (store, opts) = load(args)?;
    let mut rows = Vec::new();
    for t in args.topologies(&store)? {
        rows.extend(baseline_comparison(&store, t, &opts)?);
    }
    let out = args.output("baseline.csv");
    write(&out, &baseline_csv(&rows))?;
    let adam_better = rows.iter().filter(|r| r.median_difference > 0.0).count();
    println!(
        "wrote {} baseline rows to {} (Adam ahead by median on {adam_better})",
        rows.len(),
        out.display()
    );
    Ok(())
}
