//! Per-decision-point dispatcher for uniform parallel machines (nodes with
//! differing speeds, indexed fastest first).
//!
//! At each decision point the ready tasks are split into those that can
//! still meet their deadline on the fastest node and those that cannot;
//! the feasible group is served first, preferring to keep a task on the
//! node it last ran on, and the infeasible group optionally fills any
//! nodes left over.
//!
//! This dispatcher is standalone: it targets a uniform (speed-heterogeneous)
//! platform, unlike the identical-machine partitioned scheme in the rest of
//! the crate.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::rat::Rat;
use crate::task_model::TaskId;

/// Node identifier on a uniform platform, `0..m`, fastest first.
pub type NodeId = usize;

/// A uniform platform: node speeds in non-increasing order, all positive.
#[derive(Clone, Debug)]
pub struct UniformPlatform {
    speeds: Vec<Rat>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlatformError {
    Empty,
    NonPositiveSpeed(NodeId),
    NotSorted(NodeId),
}

impl fmt::Display for PlatformError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlatformError::Empty => write!(f, "platform has no nodes"),
            PlatformError::NonPositiveSpeed(j) => {
                write!(f, "node {j}: speed must be positive")
            }
            PlatformError::NotSorted(j) => {
                write!(f, "node {j}: speeds must be non-increasing")
            }
        }
    }
}

impl UniformPlatform {
    pub fn new(speeds: Vec<Rat>) -> Result<UniformPlatform, PlatformError> {
        if speeds.is_empty() {
            return Err(PlatformError::Empty);
        }
        for (j, s) in speeds.iter().enumerate() {
            if !s.is_positive() {
                return Err(PlatformError::NonPositiveSpeed(j));
            }
            if j > 0 && *s > speeds[j - 1] {
                return Err(PlatformError::NotSorted(j));
            }
        }
        Ok(UniformPlatform { speeds })
    }

    pub fn nodes(&self) -> usize {
        self.speeds.len()
    }

    pub fn speed(&self, node: NodeId) -> &Rat {
        &self.speeds[node]
    }

    /// Speed of the fastest node.
    pub fn fastest(&self) -> &Rat {
        &self.speeds[0]
    }
}

/// A ready task at a decision point.
#[derive(Clone, Debug)]
pub struct ReadyTask {
    pub task: TaskId,
    pub abs_deadline: Rat,
    /// Remaining work; must be positive.
    pub remaining: Rat,
    /// Node the task last ran on, if any (affinity hint).
    pub last_node: Option<NodeId>,
}

/// The ready tasks at one decision point.
#[derive(Clone, Debug, Default)]
pub struct DispatchState {
    pub ready: Vec<ReadyTask>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DispatchError {
    NonPositiveRemaining(TaskId),
    DuplicateTask(TaskId),
}

impl fmt::Display for DispatchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DispatchError::NonPositiveRemaining(t) => {
                write!(f, "task {t}: remaining work must be positive")
            }
            DispatchError::DuplicateTask(t) => write!(f, "task {t} listed twice"),
        }
    }
}

fn check_state(state: &DispatchState) -> Result<(), DispatchError> {
    let mut seen: Vec<TaskId> = Vec::new();
    for r in &state.ready {
        if !r.remaining.is_positive() {
            return Err(DispatchError::NonPositiveRemaining(r.task));
        }
        if seen.contains(&r.task) {
            return Err(DispatchError::DuplicateTask(r.task));
        }
        seen.push(r.task);
    }
    Ok(())
}

fn deadline_sorted(mut v: Vec<ReadyTask>) -> Vec<ReadyTask> {
    // stable order: deadline, then task id for equal deadlines
    v.sort_by(|a, b| a.abs_deadline.cmp(&b.abs_deadline).then(a.task.cmp(&b.task)));
    v
}

/// Splits the ready tasks into `A` (can still finish by the deadline on the
/// fastest node: `remaining / s_1 <= deadline - now`) and `B` (cannot).
/// Both halves come back sorted by non-descending deadline.
pub fn partition_feasible(
    state: &DispatchState,
    now: &Rat,
    platform: &UniformPlatform,
) -> Result<(Vec<ReadyTask>, Vec<ReadyTask>), DispatchError> {
    check_state(state)?;
    let s1 = platform.fastest();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for r in &state.ready {
        if &r.remaining / s1 <= &r.abs_deadline - now {
            a.push(r.clone());
        } else {
            b.push(r.clone());
        }
    }
    Ok((deadline_sorted(a), deadline_sorted(b)))
}

/// One dispatch decision: which task each node runs next, at most one task
/// per node and one node per task.
///
/// The feasible group is considered first. Among its `min(k, m)` earliest
/// deadlines, a task that last ran on a free node keeps that node; remaining
/// free nodes are then filled from the feasible group in deadline order, and
/// — when `serve_infeasible` is set and nodes remain — from the infeasible
/// group likewise. Serving the infeasible group is optional because none of
/// its tasks can meet its deadline anyway.
pub fn dispatch(
    state: &DispatchState,
    now: &Rat,
    platform: &UniformPlatform,
    serve_infeasible: bool,
) -> Result<BTreeMap<NodeId, TaskId>, DispatchError> {
    let (a, b) = partition_feasible(state, now, platform)?;
    let m = platform.nodes();
    let k = a.len();
    let top = k.min(m);

    let mut out: BTreeMap<NodeId, TaskId> = BTreeMap::new();
    let mut taken = vec![false; a.len()];

    // affinity pass over the top min(k, m) feasible tasks
    for (i, r) in a.iter().enumerate().take(top) {
        if let Some(j) = r.last_node {
            if j < m && !out.contains_key(&j) {
                out.insert(j, r.task);
                taken[i] = true;
            }
        }
    }

    // earliest-deadline fill of the remaining nodes from A, fastest first
    let mut next_a = 0;
    for j in 0..m {
        if out.contains_key(&j) {
            continue;
        }
        while next_a < a.len() && taken[next_a] {
            next_a += 1;
        }
        if next_a == a.len() {
            break;
        }
        out.insert(j, a[next_a].task);
        taken[next_a] = true;
    }

    // optional fill from B for nodes still idle
    if serve_infeasible {
        let mut next_b = 0;
        for j in 0..m {
            if out.contains_key(&j) {
                continue;
            }
            if next_b == b.len() {
                break;
            }
            out.insert(j, b[next_b].task);
            next_b += 1;
        }
    }
    Ok(out)
}
