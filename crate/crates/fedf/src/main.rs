//! Command-line front end: task-set generation, schedulability checks, task
//! distribution, job routing, simulation, uniform-platform dispatch, and the
//! experiment harnesses.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use fedf_core::assignment::{assign_non_light, assign_tasks, validate_distribution, Heuristic};
use fedf_core::efdf::{dispatch, UniformPlatform};
use fedf_core::engine::{simulate, SimConfig};
use fedf_core::job_distribution::{build_job_map, job_assignments};
use fedf_core::rat::Rat;
use fedf_core::schedulability::{edf_uniprocessor_test, feasible_edf_admissible, rm_sufficient_test};
use fedf_core::task_model::{total_utilization, Task, TaskSet};
use fedf::formats;
use fedf::workbench::{
    emit_csv, experiment_convergence, experiment_heuristics, experiment_nonlight, GenSpec,
};

/// Deterministic multiprocessor EDF scheduling laboratory.
#[derive(Parser)]
#[command(name = "fedf", version, about)]
struct Cli {
    /// Worker threads for experiments (default: FEDF_JOBS or all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum HeuristicArg {
    Seq,
    Huf,
    Luf,
    Lef,
    Random,
}

impl HeuristicArg {
    fn to_heuristic(self, seed: u64) -> Heuristic {
        match self {
            HeuristicArg::Seq => Heuristic::Sequential,
            HeuristicArg::Huf => Heuristic::Huf,
            HeuristicArg::Luf => Heuristic::Luf,
            HeuristicArg::Lef => Heuristic::Lef,
            HeuristicArg::Random => Heuristic::Random(seed),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    Edf,
    Rm,
    FeasibleEdf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random task sets with total utilization exactly M.
    Gen {
        #[arg(long)]
        m: usize,
        /// Per-task utilization cap (rational, e.g. 1/2).
        #[arg(long, default_value = "1/2")]
        umax: String,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Lower bound of the execution-cost range.
        #[arg(long, default_value = "1")]
        cost_min: String,
        /// Output file; sets are separated by blank lines (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a utilization-based schedulability test.
    Check {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, value_enum)]
        test: CheckKind,
    },
    /// Distribute tasks over processors and print the shares.
    Assign {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, value_enum, default_value = "lef")]
        heuristic: HeuristicArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Allow tasks with utilization above 1/2.
        #[arg(long)]
        non_light: bool,
        /// Write the distribution file here as well.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the first job->processor assignments of a migrating task.
    Jobmap {
        /// Distribution file.
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        task: usize,
        #[arg(long, default_value_t = 16)]
        count: u64,
    },
    /// Simulate a distributed task set and print tardiness statistics.
    Simulate {
        #[arg(long)]
        taskset: PathBuf,
        #[arg(long)]
        distribution: PathBuf,
        #[arg(long)]
        horizon: String,
        /// Sub-job cost target for slicing migrating tasks, e.g. `1,2`.
        #[arg(long)]
        slice: Option<String>,
        /// Sporadic release trace file (`task time` lines).
        #[arg(long)]
        releases: Option<PathBuf>,
        /// Write the executed segments here (`proc task job start end`).
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// One dispatch decision on a uniform (speed-heterogeneous) platform.
    EfdfStep {
        /// State file (`task abs_deadline remaining [last_node]` lines).
        #[arg(long)]
        state: PathBuf,
        /// Comma-separated node speeds, fastest first, e.g. `2,1,1/2`.
        #[arg(long)]
        speeds: String,
        #[arg(long, default_value = "0")]
        now: String,
        /// Leave nodes idle rather than serving tasks past their deadline.
        #[arg(long)]
        skip_infeasible: bool,
    },
    /// Population experiments; results go to CSV.
    Experiment {
        #[command(subcommand)]
        which: ExperimentCmd,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Mean observed max tardiness per heuristic and profile bucket.
    Heuristics {
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, default_value = "1/2")]
        umax: String,
        #[arg(long, default_value_t = 10_000)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "10000")]
        horizon: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Success ratio of the non-light assigner per heuristic.
    Nonlight {
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value = "1")]
        umax: String,
        #[arg(long, default_value_t = 100_000)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tardiness convergence under LEF at a long horizon.
    Convergence {
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, default_value = "1/2")]
        umax: String,
        #[arg(long, default_value_t = 3_000)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "100000")]
        horizon: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn rat(s: &str) -> Result<Rat> {
    s.parse::<Rat>()
        .map_err(|e| anyhow::anyhow!("bad rational `{s}`: {e}"))
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_taskset(path: &PathBuf) -> Result<TaskSet> {
    formats::parse_taskset(&read(path)?)
}

fn init_threads(jobs: Option<usize>) -> Result<()> {
    let jobs = jobs.or_else(|| {
        std::env::var("FEDF_JOBS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(n) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    init_threads(cli.jobs)?;
    match cli.command {
        Command::Gen { m, umax, count, seed, cost_min, out } => {
            let mut spec = GenSpec::new(m, rat(&umax)?, seed, count);
            spec.cost_min = rat(&cost_min)?;
            let mut text = String::new();
            for i in 0..count {
                let ts = fedf::workbench::generate_taskset(&spec, i);
                text.push_str(&formats::emit_taskset(&ts));
                text.push('\n');
            }
            match out {
                Some(p) => std::fs::write(&p, text)
                    .with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
        }
        Command::Check { file, test } => {
            let ts = load_taskset(&file)?;
            let u = total_utilization(&ts);
            match test {
                CheckKind::Edf => {
                    let v = edf_uniprocessor_test(&ts).map_err(|e| anyhow::anyhow!("{e}"))?;
                    println!("schedulable={} U={} bound={}", v.schedulable, u, v.bound_used);
                    if !v.schedulable {
                        std::process::exit(1);
                    }
                }
                CheckKind::Rm => {
                    let v = rm_sufficient_test(&ts).map_err(|e| anyhow::anyhow!("{e}"))?;
                    println!("schedulable={} U={} bound={}", v.schedulable, u, v.bound_used);
                    if !v.schedulable {
                        std::process::exit(1);
                    }
                }
                CheckKind::FeasibleEdf => {
                    let ok = feasible_edf_admissible(&ts);
                    println!("admissible={ok} U={} M={}", u, ts.processors);
                    if !ok {
                        std::process::exit(1);
                    }
                }
            }
        }
        Command::Assign { file, heuristic, seed, non_light, out } => {
            let ts = load_taskset(&file)?;
            let h = heuristic.to_heuristic(seed);
            let d = if non_light {
                assign_non_light(&ts, h)
            } else {
                assign_tasks(&ts, h)
            }
            .map_err(|e| anyhow::anyhow!("assignment failed: {e}"))?;
            let violations = validate_distribution(&ts, &d);
            if !violations.is_empty() {
                bail!("internal error: produced invalid distribution: {violations:?}");
            }
            let text = formats::emit_distribution(&d);
            print!("{text}");
            if let Some(p) = out {
                std::fs::write(&p, text)
                    .with_context(|| format!("writing {}", p.display()))?;
            }
        }
        Command::Jobmap { file, task, count } => {
            let text = read(&file)?;
            // the job rule depends only on the shares, so a task set with
            // matching utilizations reconstructed from the file suffices
            let (d, ts) = distribution_with_dummy_tasks(&text)?;
            let map = build_job_map(&d, &ts, task)
                .map_err(|e| anyhow::anyhow!("no job map for task {task}: {e}"))?;
            println!(
                "task={} procs=({},{}) fractions=({},{}) cycle={}",
                task, map.first_proc, map.second_proc, map.f_first, map.f_second, map.cycle_length
            );
            for (i, p) in job_assignments(&map, count).iter().enumerate() {
                println!("job {} -> processor {}", i + 1, p);
            }
        }
        Command::Simulate { taskset, distribution, horizon, slice, releases, trace_out } => {
            let ts = load_taskset(&taskset)?;
            let d = formats::parse_distribution(&read(&distribution)?, ts.processors, ts.len())?;
            let mut cfg = SimConfig::new(rat(&horizon)?);
            if let Some(s) = slice {
                let parts: Vec<&str> = s.split(',').collect();
                if parts.len() != 2 {
                    bail!("--slice expects `lo,hi`");
                }
                cfg.slice = Some((rat(parts[0])?, rat(parts[1])?));
            }
            if let Some(p) = releases {
                cfg.release_traces = Some(formats::parse_release_traces(&read(&p)?)?);
            }
            cfg.collect_trace = trace_out.is_some();
            let (trace, stats) =
                simulate(&ts, &d, &cfg).map_err(|e| anyhow::anyhow!("simulation failed: {e}"))?;
            println!("max_tardiness={}", stats.max_tardiness);
            println!("max_migrating_tardiness={}", stats.max_migrating_tardiness);
            println!("completed_jobs={}", stats.completed_jobs);
            println!("migrations={}", stats.migrations);
            for (p, b) in stats.busy.iter().enumerate() {
                println!("busy[{p}]={b}");
            }
            for (t, tard) in stats.per_task_max_tardiness.iter().enumerate() {
                println!("tardiness[{t}]={} misses[{t}]={}", tard, stats.per_task_misses[t]);
            }
            if let Some(p) = trace_out {
                std::fs::write(&p, formats::emit_trace(&trace))
                    .with_context(|| format!("writing {}", p.display()))?;
            }
        }
        Command::EfdfStep { state, speeds, now, skip_infeasible } => {
            let st = formats::parse_dispatch_state(&read(&state)?)?;
            let platform = UniformPlatform::new(formats::parse_speeds(&speeds)?)
                .map_err(|e| anyhow::anyhow!("bad speeds: {e}"))?;
            let out = dispatch(&st, &rat(&now)?, &platform, !skip_infeasible)
                .map_err(|e| anyhow::anyhow!("dispatch failed: {e}"))?;
            for (node, task) in &out {
                println!("node {node} -> task {task}");
            }
        }
        Command::Experiment { which } => run_experiment(which)?,
    }
    Ok(())
}

/// Rebuilds a distribution plus a placeholder task set whose utilizations
/// equal the share sums (sufficient for job-map construction).
fn distribution_with_dummy_tasks(
    text: &str,
) -> Result<(fedf_core::assignment::Distribution, TaskSet)> {
    let max_proc = text
        .lines()
        .filter_map(|l| l.split_whitespace().nth(1)?.parse::<usize>().ok())
        .max()
        .ok_or_else(|| anyhow::anyhow!("empty distribution file"))?;
    let max_task = text
        .lines()
        .filter_map(|l| l.split_whitespace().next()?.parse::<usize>().ok())
        .max()
        .unwrap_or(0);
    let d = formats::parse_distribution(text, max_proc + 1, max_task + 1)?;
    let tasks = (0..=max_task)
        .map(|t| Task::new(t, d.task_share_sum(t), Rat::one()))
        .collect();
    let ts = TaskSet::new(tasks, max_proc + 1)
        .map_err(|e| anyhow::anyhow!("inconsistent distribution: {e}"))?;
    Ok((d, ts))
}

fn run_experiment(cmd: ExperimentCmd) -> Result<()> {
    match cmd {
        ExperimentCmd::Heuristics { m, umax, count, seed, horizon, out } => {
            let spec = GenSpec::new(m, rat(&umax)?, seed, count);
            let res = experiment_heuristics(&spec, &rat(&horizon)?);
            emit_csv(&res.rows, &out)?;
            println!(
                "population={} excluded_assignments={} rows={}",
                res.population,
                res.exclusions.assignment,
                res.rows.len()
            );
        }
        ExperimentCmd::Nonlight { m, umax, count, seed, out } => {
            let spec = GenSpec::new(m, rat(&umax)?, seed, count);
            let res = experiment_nonlight(&spec);
            emit_csv(&res.rows, &out)?;
            for r in &res.rows {
                println!("{} success_ratio={:.4}", r.heuristic, r.mean);
            }
        }
        ExperimentCmd::Convergence { m, umax, count, seed, horizon, out } => {
            let spec = GenSpec::new(m, rat(&umax)?, seed, count);
            let res = experiment_convergence(&spec, &rat(&horizon)?);
            emit_csv(&res.rows, &out)?;
            println!(
                "population={} simulated={} converged_fraction={:.4}",
                res.population,
                res.per_set.len(),
                res.converged_fraction
            );
            // how close the non-converged sets are to their final maximum
            for thr in [0.95, 0.9, 0.8] {
                let frac = res
                    .per_set
                    .iter()
                    .filter(|r| {
                        r.max_tardiness == 0.0
                            || r.max_tardiness_first_half >= thr * r.max_tardiness
                    })
                    .count() as f64
                    / res.per_set.len().max(1) as f64;
                println!("fraction_within_{thr}={frac:.4}");
            }
        }
    }
    Ok(())
}
