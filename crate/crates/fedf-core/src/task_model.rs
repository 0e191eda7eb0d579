//! Recurrent task model: tasks with an execution cost and a period, implicit
//! deadlines (relative deadline equals the period), and jobs released either
//! periodically or sporadically with the period as minimum separation.
//!
//! All parameters are exact rationals; utilization is `exec_cost / period`
//! and a task is *light* when its utilization is at most one half.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::rat::Rat;

/// Dense task identifier, `0..n`.
pub type TaskId = usize;

/// Processor identifier, `0..M`.
pub type ProcessorId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReleaseModel {
    Periodic,
    Sporadic,
}

#[derive(Clone, Debug)]
pub struct Task {
    pub id: TaskId,
    pub exec_cost: Rat,
    pub period: Rat,
    /// Equals `period` (implicit deadlines).
    pub rel_deadline: Rat,
    /// Parsed and carried, but consulted by no algorithm.
    pub jitter: Rat,
    pub release_model: ReleaseModel,
    /// First release of a periodic task; defaults to 0.
    pub first_release: Rat,
}

impl Task {
    /// Periodic task `T(e, p)` released first at time 0.
    pub fn new(id: TaskId, exec_cost: Rat, period: Rat) -> Task {
        Task {
            id,
            rel_deadline: period.clone(),
            exec_cost,
            period,
            jitter: Rat::zero(),
            release_model: ReleaseModel::Periodic,
            first_release: Rat::zero(),
        }
    }

    pub fn sporadic(id: TaskId, exec_cost: Rat, period: Rat) -> Task {
        Task {
            release_model: ReleaseModel::Sporadic,
            ..Task::new(id, exec_cost, period)
        }
    }

    fn check(&self) -> Result<(), TaskSetError> {
        if !self.exec_cost.is_positive() || self.exec_cost > self.period {
            return Err(TaskSetError::BadCost(self.id));
        }
        if self.rel_deadline != self.period {
            return Err(TaskSetError::NotImplicitDeadline(self.id));
        }
        if self.jitter.is_negative() {
            return Err(TaskSetError::NegativeJitter(self.id));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TaskSet {
    pub tasks: Vec<Task>,
    pub processors: usize,
}

impl TaskSet {
    /// Validates the task-set invariants: dense unique ids, positive costs
    /// bounded by periods, implicit deadlines, at least one task and one
    /// processor.
    pub fn new(tasks: Vec<Task>, processors: usize) -> Result<TaskSet, TaskSetError> {
        if tasks.is_empty() {
            return Err(TaskSetError::Empty);
        }
        if processors == 0 {
            return Err(TaskSetError::NoProcessors);
        }
        for (i, t) in tasks.iter().enumerate() {
            if t.id != i {
                return Err(TaskSetError::NonDenseIds);
            }
            t.check()?;
        }
        Ok(TaskSet { tasks, processors })
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TaskSetError {
    Empty,
    NoProcessors,
    NonDenseIds,
    BadCost(TaskId),
    NotImplicitDeadline(TaskId),
    NegativeJitter(TaskId),
}

impl fmt::Display for TaskSetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskSetError::Empty => write!(f, "task set has no tasks"),
            TaskSetError::NoProcessors => write!(f, "task set has no processors"),
            TaskSetError::NonDenseIds => write!(f, "task ids must be dense 0..n-1"),
            TaskSetError::BadCost(id) => {
                write!(f, "task {id}: execution cost must satisfy 0 < e <= p")
            }
            TaskSetError::NotImplicitDeadline(id) => {
                write!(f, "task {id}: relative deadline must equal the period")
            }
            TaskSetError::NegativeJitter(id) => write!(f, "task {id}: negative jitter"),
        }
    }
}

/// One invocation of a task.
#[derive(Clone, Debug)]
pub struct Job {
    pub task: TaskId,
    /// 1-based job index.
    pub index: u64,
    pub release: Rat,
    pub abs_deadline: Rat,
    pub remaining: Rat,
}

impl Job {
    /// The k-th job (k >= 1) of a periodic task.
    pub fn periodic(task: &Task, k: u64) -> Job {
        debug_assert!(k >= 1);
        let release = &task.first_release + &task.period * Rat::from_int((k - 1) as i64);
        Job {
            task: task.id,
            index: k,
            abs_deadline: &release + &task.rel_deadline,
            remaining: task.exec_cost.clone(),
            release,
        }
    }
}

/// `exec_cost / period`, exact.
pub fn utilization(task: &Task) -> Rat {
    &task.exec_cost / &task.period
}

/// Sum of member utilizations, exact.
pub fn total_utilization(ts: &TaskSet) -> Rat {
    ts.tasks.iter().map(utilization).sum()
}

/// A task is light iff its utilization is at most 1/2.
pub fn is_light(task: &Task) -> bool {
    utilization(task) <= Rat::new(1, 2)
}

/// `max(0, completion - deadline)`.
pub fn job_tardiness(completion: &Rat, abs_deadline: &Rat) -> Rat {
    let diff = completion - abs_deadline;
    if diff.is_negative() {
        Rat::zero()
    } else {
        diff
    }
}

/// Human-readable `T(e, p)` form, used by CLI output.
pub fn describe(task: &Task) -> String {
    use alloc::format;
    format!("T{}({}, {})", task.id, task.exec_cost, task.period)
}
