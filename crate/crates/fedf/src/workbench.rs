//! Random task-set generation, the three experiment families, and CSV
//! emission.
//!
//! Every population is fully determined by `(seed, set index)`: each set
//! draws from its own counter-derived random stream, so populations can be
//! evaluated in parallel and reduced in index order with bit-identical
//! results at any thread count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use fedf_core::assignment::{assign_non_light, assign_tasks, Heuristic};
use fedf_core::engine::{max_tardiness_converged, simulate, SimConfig};
use fedf_core::rat::Rat;
use fedf_core::task_model::{utilization, Task, TaskSet};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Generation parameters; identical spec => identical population.
#[derive(Clone, Debug)]
pub struct GenSpec {
    pub m: usize,
    /// Per-task utilization cap, in (0, 1].
    pub u_max_cap: Rat,
    /// Inclusive integer period range.
    pub period_range: (i64, i64),
    pub seed: u64,
    pub count: u64,
    /// Lower bound of the execution-cost range (default 1).
    pub cost_min: Rat,
}

impl GenSpec {
    pub fn new(m: usize, u_max_cap: Rat, seed: u64, count: u64) -> GenSpec {
        GenSpec {
            m,
            u_max_cap,
            period_range: (1, 100),
            seed,
            count,
            cost_min: Rat::one(),
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Independent stream per (seed, index).
fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index)))
}

/// Generates one task set: periods uniform integers in the period range,
/// execution costs uniform integers in `[min(cost_min, u_cap*p), u_cap*p]`
/// (degenerating to the exact point `u_cap*p` when that product is below
/// the lower bound), appended while total utilization is below M; the last
/// task's cost is lowered so the total equals M exactly.
pub fn generate_taskset(spec: &GenSpec, index: u64) -> TaskSet {
    let mut rng = stream(spec.seed, index);
    let target = Rat::from_int(spec.m as i64);
    let mut tasks: Vec<Task> = Vec::new();
    let mut total = Rat::zero();
    loop {
        let p = rng.random_range(spec.period_range.0..=spec.period_range.1);
        let cap = &spec.u_max_cap * Rat::from_int(p);
        let hi = cap.floor_i64().expect("cost cap overflows");
        let lo = spec.cost_min.ceil_i64().expect("cost floor overflows");
        let e = if hi >= lo && hi >= 1 {
            Rat::from_int(rng.random_range(lo.max(1)..=hi))
        } else {
            cap // no integer cost available below the cap
        };
        let mut task = Task::new(tasks.len(), e, Rat::from_int(p));
        let u = utilization(&task);
        let rest = &target - &total;
        if u >= rest {
            // close the set exactly at total utilization M
            task.exec_cost = rest * &task.period;
            tasks.push(task);
            break;
        }
        total += u;
        tasks.push(task);
    }
    TaskSet::new(tasks, spec.m).expect("generator produced invalid set")
}

/// Per-set classification statistics.
#[derive(Clone, Debug)]
pub struct SetProfile {
    pub e_max: Rat,
    pub e_avg: Rat,
    pub u_max_observed: Rat,
    pub u_avg: Rat,
}

pub fn profile(ts: &TaskSet) -> SetProfile {
    let n = Rat::from_int(ts.len() as i64);
    let e_sum: Rat = ts.tasks.iter().map(|t| t.exec_cost.clone()).sum();
    let u_sum: Rat = ts.tasks.iter().map(utilization).sum();
    let e_max = ts
        .tasks
        .iter()
        .map(|t| t.exec_cost.clone())
        .max()
        .expect("non-empty");
    let u_max_observed = ts.tasks.iter().map(utilization).max().expect("non-empty");
    SetProfile {
        e_max,
        e_avg: e_sum / &n,
        u_max_observed,
        u_avg: u_sum / &n,
    }
}

/// One aggregated result line.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub group_key: String,
    pub heuristic: String,
    pub n: u64,
    pub mean: f64,
    pub ci99: f64,
}

/// z-value for a two-sided 99% confidence interval.
const Z99: f64 = 2.5758293035489004;

#[derive(Clone, Debug, Default)]
struct Accum {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Accum {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn row(&self, group_key: String, heuristic: String) -> ExperimentRow {
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = (self.sum_sq / n - mean * mean).max(0.0);
        let ci99 = if self.n > 1 { Z99 * (var / n).sqrt() } else { 0.0 };
        ExperimentRow { group_key, heuristic, n: self.n, mean, ci99 }
    }
}

/// Profile buckets: integer-floored cost statistics, utilization statistics
/// in buckets of width 0.05.
fn bucket_keys(p: &SetProfile) -> [String; 4] {
    let ub = |u: &Rat| {
        let b = (u.to_f64() / 0.05).floor() * 0.05;
        format!("{b:.2}")
    };
    [
        format!("e_max={}", p.e_max.floor()),
        format!("e_avg={}", p.e_avg.floor()),
        format!("u_max={}", ub(&p.u_max_observed)),
        format!("u_avg={}", ub(&p.u_avg)),
    ]
}

fn heuristic_name(h: Heuristic) -> &'static str {
    match h {
        Heuristic::Sequential => "seq",
        Heuristic::Huf => "huf",
        Heuristic::Luf => "luf",
        Heuristic::Lef => "lef",
        Heuristic::Random(_) => "random",
    }
}

/// Failures are counted, never silently dropped.
#[derive(Clone, Debug, Default)]
pub struct Exclusions {
    pub assignment: u64,
    pub simulation: u64,
}

pub struct HeuristicsOutcome {
    pub rows: Vec<ExperimentRow>,
    pub exclusions: Exclusions,
    pub population: u64,
}

/// Runs each generated set under Random, HUF, LUF, LEF, and LEF with job
/// slicing (sub-job costs targeted to [1, 2)), recording the system maximum
/// observed tardiness, aggregated per profile bucket.
pub fn experiment_heuristics(spec: &GenSpec, horizon: &Rat) -> HeuristicsOutcome {
    let variants: [(&str, Heuristic, bool); 5] = [
        ("random", Heuristic::Random(0), false),
        ("huf", Heuristic::Huf, false),
        ("luf", Heuristic::Luf, false),
        ("lef", Heuristic::Lef, false),
        ("lef-sliced", Heuristic::Lef, true),
    ];
    let per_set: Vec<(SetProfile, Vec<Option<f64>>)> = (0..spec.count)
        .into_par_iter()
        .map(|i| {
            let ts = generate_taskset(spec, i);
            let prof = profile(&ts);
            let results = variants
                .iter()
                .map(|&(_, h, sliced)| {
                    let h = match h {
                        // per-set random order, derived from the stream
                        Heuristic::Random(_) => Heuristic::Random(splitmix64(spec.seed ^ i)),
                        other => other,
                    };
                    let d = assign_tasks(&ts, h).ok()?;
                    let mut cfg = SimConfig::new(horizon.clone());
                    cfg.collect_trace = false;
                    if sliced {
                        cfg.slice = Some((Rat::one(), Rat::from_int(2)));
                    }
                    let (_, stats) = simulate(&ts, &d, &cfg).ok()?;
                    Some(stats.max_tardiness.to_f64())
                })
                .collect();
            (prof, results)
        })
        .collect();

    let mut acc: BTreeMap<(String, String), Accum> = BTreeMap::new();
    let mut exclusions = Exclusions::default();
    for (prof, results) in &per_set {
        let keys = bucket_keys(prof);
        for (&(name, _, _), r) in variants.iter().zip(results) {
            match r {
                Some(tard) => {
                    for k in &keys {
                        acc.entry((k.clone(), name.to_string()))
                            .or_default()
                            .push(*tard);
                    }
                }
                None => exclusions.assignment += 1,
            }
        }
    }
    let rows = acc
        .into_iter()
        .map(|((g, h), a)| a.row(g, h))
        .collect();
    HeuristicsOutcome { rows, exclusions, population: spec.count }
}

pub struct NonLightOutcome {
    pub rows: Vec<ExperimentRow>,
    pub population: u64,
}

/// Success ratio of the non-light assigner per heuristic at the spec's
/// utilization cap (0.6..1.0 territory).
pub fn experiment_nonlight(spec: &GenSpec) -> NonLightOutcome {
    let heuristics = [
        Heuristic::Random(0),
        Heuristic::Huf,
        Heuristic::Luf,
        Heuristic::Lef,
    ];
    let per_set: Vec<[bool; 4]> = (0..spec.count)
        .into_par_iter()
        .map(|i| {
            let ts = generate_taskset(spec, i);
            let mut ok = [false; 4];
            for (j, &h) in heuristics.iter().enumerate() {
                let h = match h {
                    Heuristic::Random(_) => Heuristic::Random(splitmix64(spec.seed ^ i)),
                    other => other,
                };
                ok[j] = assign_non_light(&ts, h).is_ok();
            }
            ok
        })
        .collect();

    let group = format!("M={},umax={:.2}", spec.m, spec.u_max_cap.to_f64());
    let rows = heuristics
        .iter()
        .enumerate()
        .map(|(j, &h)| {
            let mut a = Accum::default();
            for ok in &per_set {
                a.push(if ok[j] { 1.0 } else { 0.0 });
            }
            a.row(group.clone(), heuristic_name(h).to_string())
        })
        .collect();
    NonLightOutcome { rows, population: spec.count }
}

#[derive(Clone, Debug)]
pub struct ConvergenceResult {
    pub index: u64,
    pub max_tardiness: f64,
    pub max_tardiness_first_half: f64,
    pub migrating_tardiness: f64,
    pub converged: bool,
}

pub struct ConvergenceOutcome {
    pub per_set: Vec<ConvergenceResult>,
    pub rows: Vec<ExperimentRow>,
    pub converged_fraction: f64,
    pub exclusions: Exclusions,
    pub population: u64,
}

/// Simulates each set under LEF to the horizon, recording the observed
/// maximum tardiness and whether it converged (worst value recurs in the
/// second half of the run).
pub fn experiment_convergence(spec: &GenSpec, horizon: &Rat) -> ConvergenceOutcome {
    let per_set_raw: Vec<(u64, SetProfile, Option<ConvergenceResult>)> = (0..spec.count)
        .into_par_iter()
        .map(|i| {
            let ts = generate_taskset(spec, i);
            let prof = profile(&ts);
            let res = (|| {
                let d = assign_tasks(&ts, Heuristic::Lef).ok()?;
                let mut cfg = SimConfig::new(horizon.clone());
                cfg.collect_trace = false;
                let (_, stats) = simulate(&ts, &d, &cfg).ok()?;
                Some(ConvergenceResult {
                    index: i,
                    max_tardiness: stats.max_tardiness.to_f64(),
                    max_tardiness_first_half: stats.max_tardiness_first_half.to_f64(),
                    migrating_tardiness: stats.max_migrating_tardiness.to_f64(),
                    converged: max_tardiness_converged(&stats),
                })
            })();
            (i, prof, res)
        })
        .collect();

    let mut per_set = Vec::new();
    let mut acc: BTreeMap<(String, String), Accum> = BTreeMap::new();
    let mut exclusions = Exclusions::default();
    let mut converged = 0u64;
    for (_, prof, res) in &per_set_raw {
        match res {
            Some(r) => {
                if r.converged {
                    converged += 1;
                }
                for k in bucket_keys(prof) {
                    if k.starts_with("e_avg") || k.starts_with("u_avg") {
                        acc.entry((k, "lef".to_string()))
                            .or_default()
                            .push(r.max_tardiness);
                    }
                }
                per_set.push(r.clone());
            }
            None => exclusions.assignment += 1,
        }
    }
    let denom = per_set.len().max(1) as f64;
    ConvergenceOutcome {
        converged_fraction: converged as f64 / denom,
        rows: acc.into_iter().map(|((g, h), a)| a.row(g, h)).collect(),
        per_set,
        exclusions,
        population: spec.count,
    }
}

/// CSV with a fixed header and six fractional digits; row order is already
/// stable (group, then heuristic).
pub fn render_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from("group_key,heuristic,n,mean,ci99\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6}",
            r.group_key, r.heuristic, r.n, r.mean, r.ci99
        );
    }
    out
}

pub fn emit_csv(rows: &[ExperimentRow], path: &Path) -> Result<()> {
    std::fs::write(path, render_csv(rows))
        .with_context(|| format!("writing {}", path.display()))
}

/// Parses a CSV produced by `render_csv` (round-trip checks).
pub fn parse_csv(text: &str) -> Result<Vec<ExperimentRow>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        anyhow::ensure!(f.len() == 5, "line {}: expected 5 fields", i + 1);
        rows.push(ExperimentRow {
            group_key: f[0].to_string(),
            heuristic: f[1].to_string(),
            n: f[2].parse()?,
            mean: f[3].parse()?,
            ci99: f[4].parse()?,
        });
    }
    Ok(rows)
}
