//! Distribution phase: sequentially packs tasks onto processors with exact
//! shares. A task whose whole utilization fits the current processor's
//! remaining capacity becomes *fixed* there; otherwise a task is split across
//! the current and next processor and becomes *migrating*. The result
//! satisfies:
//!
//! * P1 — every task has shares on at most two processors, summing to its
//!   utilization;
//! * P2 — every processor hosts at most two migrating tasks;
//! * P3 — the share sum on any processor is at most one;
//!
//! and every migrating task sits on two consecutive processors.
//!
//! Selection of the task to split is what the heuristics vary: HUF simply
//! keeps the decreasing-utilization order, LUF scans the unassigned tasks in
//! reverse for the lowest-utilization task that still covers the remaining
//! capacity, and LEF picks the covering task with the lowest execution cost.

use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::rat::Rat;
use crate::schedulability::feasible_edf_admissible;
use crate::task_model::{utilization, ProcessorId, TaskId, TaskSet};

/// Fraction of one processor's capacity reserved for a task.
#[derive(Clone, Debug)]
pub struct Share {
    pub task: TaskId,
    pub processor: ProcessorId,
    pub value: Rat,
}

/// Output of the distribution phase.
#[derive(Clone, Debug)]
pub struct Distribution {
    pub shares: Vec<Share>,
    /// Fixed tasks per processor, in assignment order.
    pub fixed: Vec<Vec<TaskId>>,
    /// Migrating tasks per processor (at most two).
    pub migrating: Vec<Vec<TaskId>>,
    /// Processor(s) of each task: one entry for fixed, two (consecutive,
    /// ascending) for migrating.
    pub task_procs: Vec<Vec<ProcessorId>>,
    pub processors: usize,
}

impl Distribution {
    pub fn is_migrating(&self, task: TaskId) -> bool {
        self.task_procs[task].len() == 2
    }

    pub fn migrating_tasks(&self) -> impl Iterator<Item = TaskId> + '_ {
        self.task_procs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.len() == 2)
            .map(|(t, _)| t)
    }

    pub fn share_of(&self, task: TaskId, proc: ProcessorId) -> Option<&Rat> {
        self.shares
            .iter()
            .find(|s| s.task == task && s.processor == proc)
            .map(|s| &s.value)
    }

    /// Total share of a task (its utilization, by P1).
    pub fn task_share_sum(&self, task: TaskId) -> Rat {
        self.shares
            .iter()
            .filter(|s| s.task == task)
            .map(|s| &s.value)
            .sum()
    }
}

/// Task-ordering / split-selection scheme for the distribution phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Heuristic {
    /// Tasks taken in the given (id) order.
    Sequential,
    /// Highest utilization first.
    Huf,
    /// Decreasing-utilization fill; migrating task chosen by reverse scan.
    Luf,
    /// Decreasing-utilization fill; migrating task with the lowest execution
    /// cost among those covering the remaining capacity.
    Lef,
    /// Sequential over a seeded shuffle of the task order.
    Random(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AssignError {
    /// Input rejected: some task is not light or total utilization exceeds M.
    NotAdmissible,
    /// Total utilization exceeds the processor count.
    OverUtilized,
    /// Two migrating tasks with combined utilization above one ended up on
    /// the same processor (non-light mode failure outcome).
    MigratingPairOverload(ProcessorId),
    /// No share recorded for the queried (task, processor) pair.
    NoShare(TaskId, ProcessorId),
}

impl fmt::Display for AssignError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssignError::NotAdmissible => {
                write!(f, "task set not admissible (need u_max <= 1/2 and U_sum <= M)")
            }
            AssignError::OverUtilized => write!(f, "total utilization exceeds M"),
            AssignError::MigratingPairOverload(p) => write!(
                f,
                "processor {p}: migrating tasks have combined utilization above 1"
            ),
            AssignError::NoShare(t, p) => {
                write!(f, "task {t} has no share on processor {p}")
            }
        }
    }
}

fn task_order(ts: &TaskSet, h: Heuristic) -> Vec<TaskId> {
    let mut order: Vec<TaskId> = (0..ts.len()).collect();
    match h {
        Heuristic::Sequential => {}
        Heuristic::Huf | Heuristic::Luf | Heuristic::Lef => {
            order.sort_by(|&a, &b| {
                utilization(&ts.tasks[b])
                    .cmp(&utilization(&ts.tasks[a]))
                    .then(a.cmp(&b))
            });
        }
        Heuristic::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            order.shuffle(&mut rng);
        }
    }
    order
}

/// Picks the index (into `unassigned`, sorted by decreasing utilization) of
/// the task to split when the head does not fit the remaining capacity.
fn split_candidate(ts: &TaskSet, unassigned: &[TaskId], rem: &Rat, h: Heuristic) -> usize {
    match h {
        Heuristic::Luf => {
            // Reverse scan from the lowest utilization; first task whose
            // utilization is at least the remaining capacity. Equal
            // utilizations resolve to the lowest id.
            let mut idx = unassigned.len() - 1;
            while utilization(&ts.tasks[unassigned[idx]]) < *rem {
                idx -= 1;
            }
            while idx > 0
                && utilization(&ts.tasks[unassigned[idx - 1]])
                    == utilization(&ts.tasks[unassigned[idx]])
            {
                idx -= 1;
            }
            idx
        }
        Heuristic::Lef => {
            let mut best = 0;
            for (i, &t) in unassigned.iter().enumerate() {
                if utilization(&ts.tasks[t]) < *rem {
                    continue;
                }
                let better = {
                    let bt = &ts.tasks[unassigned[best]];
                    let ct = &ts.tasks[t];
                    (&ct.exec_cost, t).lt(&(&bt.exec_cost, unassigned[best]))
                };
                if better {
                    best = i;
                }
            }
            best
        }
        _ => 0,
    }
}

fn assign_impl(ts: &TaskSet, h: Heuristic, non_light: bool) -> Result<Distribution, AssignError> {
    let m = ts.processors;
    let mut unassigned = task_order(ts, h);
    let mut d = Distribution {
        shares: Vec::with_capacity(ts.len() + m),
        fixed: alloc::vec![Vec::new(); m],
        migrating: alloc::vec![Vec::new(); m],
        task_procs: alloc::vec![Vec::new(); ts.len()],
        processors: m,
    };
    let mut proc = 0usize;
    let mut rem = Rat::one();

    let place_fixed = |d: &mut Distribution, task: TaskId, proc: usize, u: Rat| {
        d.shares.push(Share { task, processor: proc, value: u });
        d.fixed[proc].push(task);
        d.task_procs[task].push(proc);
    };

    while !unassigned.is_empty() {
        if proc >= m {
            return Err(AssignError::OverUtilized);
        }
        let head_u = utilization(&ts.tasks[unassigned[0]]);
        if head_u <= rem {
            let task = unassigned.remove(0);
            rem -= &head_u;
            place_fixed(&mut d, task, proc, head_u);
        } else {
            let idx = split_candidate(ts, &unassigned, &rem, h);
            let task = unassigned.remove(idx);
            let u = utilization(&ts.tasks[task]);
            if u == rem {
                // Covers the remaining capacity exactly: fixed, no split.
                place_fixed(&mut d, task, proc, u);
                rem = Rat::zero();
            } else {
                debug_assert!(u > rem && rem.is_positive());
                let second = &u - &rem;
                d.shares.push(Share { task, processor: proc, value: rem.clone() });
                d.shares.push(Share { task, processor: proc + 1, value: second.clone() });
                d.migrating[proc].push(task);
                if proc + 1 < m {
                    d.migrating[proc + 1].push(task);
                } else {
                    return Err(AssignError::OverUtilized);
                }
                d.task_procs[task].push(proc);
                d.task_procs[task].push(proc + 1);
                proc += 1;
                rem = Rat::one() - second;
            }
        }
        if rem.is_zero() {
            proc += 1;
            rem = Rat::one();
        }
    }

    if non_light {
        for (p, migr) in d.migrating.iter().enumerate() {
            if migr.len() == 2 {
                let total = utilization(&ts.tasks[migr[0]]) + utilization(&ts.tasks[migr[1]]);
                if total > Rat::one() {
                    return Err(AssignError::MigratingPairOverload(p));
                }
            }
        }
    }
    Ok(d)
}

/// Distributes an admissible light task set. The result satisfies P1-P3.
pub fn assign_tasks(ts: &TaskSet, h: Heuristic) -> Result<Distribution, AssignError> {
    if !feasible_edf_admissible(ts) {
        return Err(AssignError::NotAdmissible);
    }
    assign_impl(ts, h, false)
}

/// Like [`assign_tasks`] but admits non-light tasks; fails when the chosen
/// heuristic puts two migrating tasks with combined utilization above one on
/// the same processor. Failure is an expected, counted outcome.
pub fn assign_non_light(ts: &TaskSet, h: Heuristic) -> Result<Distribution, AssignError> {
    if crate::task_model::total_utilization(ts) > Rat::from_int(ts.processors as i64) {
        return Err(AssignError::OverUtilized);
    }
    assign_impl(ts, h, true)
}

/// `f_ij = s_ij / u_i`: the fraction of the task's workload handled by the
/// processor. For a migrating task the two fractions sum to one.
pub fn fraction_on_processor(
    d: &Distribution,
    task: TaskId,
    proc: ProcessorId,
) -> Result<Rat, AssignError> {
    let share = d
        .share_of(task, proc)
        .ok_or(AssignError::NoShare(task, proc))?;
    let u = d.task_share_sum(task);
    Ok(share / &u)
}

/// A violated distribution property, reported as data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// P1: shares on more than two processors, or sum != utilization.
    ShareCount(TaskId),
    ShareSum(TaskId),
    /// P2: more than two migrating tasks on one processor.
    MigratingCount(ProcessorId),
    /// P3: processor share sum above one.
    ProcessorOverload(ProcessorId),
    /// Migrating task not on two consecutive processors.
    NonConsecutive(TaskId),
    /// Share value outside (0, min(u_i, 1)].
    BadShareValue(TaskId, ProcessorId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ShareCount(t) => write!(f, "P1: task {t} has shares on more than 2 processors"),
            Violation::ShareSum(t) => write!(f, "P1: task {t} share sum differs from its utilization"),
            Violation::MigratingCount(p) => write!(f, "P2: processor {p} has more than 2 migrating tasks"),
            Violation::ProcessorOverload(p) => write!(f, "P3: processor {p} share sum exceeds 1"),
            Violation::NonConsecutive(t) => write!(f, "task {t} migrates between non-consecutive processors"),
            Violation::BadShareValue(t, p) => write!(f, "share of task {t} on processor {p} out of range"),
        }
    }
}

/// Checks P1, P2, P3 and the consecutive-processor property with exact
/// arithmetic; an empty result means the distribution is valid.
pub fn validate_distribution(ts: &TaskSet, d: &Distribution) -> Vec<Violation> {
    let mut out = Vec::new();
    for task in 0..ts.len() {
        let procs: Vec<ProcessorId> = d
            .shares
            .iter()
            .filter(|s| s.task == task)
            .map(|s| s.processor)
            .collect();
        let u = utilization(&ts.tasks[task]);
        if procs.is_empty() || procs.len() > 2 {
            out.push(Violation::ShareCount(task));
            continue;
        }
        if d.task_share_sum(task) != u {
            out.push(Violation::ShareSum(task));
        }
        if procs.len() == 2 {
            let (a, b) = (procs[0].min(procs[1]), procs[0].max(procs[1]));
            if b != a + 1 {
                out.push(Violation::NonConsecutive(task));
            }
        }
        for s in d.shares.iter().filter(|s| s.task == task) {
            if !s.value.is_positive() || s.value > u || s.value > Rat::one() {
                out.push(Violation::BadShareValue(task, s.processor));
            }
        }
    }
    for p in 0..d.processors {
        if d.migrating.get(p).map_or(0, |v| v.len()) > 2 {
            out.push(Violation::MigratingCount(p));
        }
        let sum: Rat = d
            .shares
            .iter()
            .filter(|s| s.processor == p)
            .map(|s| &s.value)
            .sum();
        if sum > Rat::one() {
            out.push(Violation::ProcessorOverload(p));
        }
    }
    out
}
