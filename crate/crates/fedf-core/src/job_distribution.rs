//! Window machinery and the static job-to-processor rule for migrating
//! tasks.
//!
//! A migrating task with workload fractions `f` and `1 - f` on its two
//! processors is modelled as two complementary weight-`f` / weight-`1-f`
//! tasks over slots, one slot per job. Subtask `i` of a weight-`w` task has
//! the window `[floor((i-1)/w), ceil(i/w))`; keeping every subtask inside
//! its window keeps the allocation lag strictly within (-1, 1). The job
//! rule places a job on the first processor exactly when its slot is the
//! first slot of a window of the weight-`f` task, and on the second
//! processor otherwise (where the slot is the last slot of a window of the
//! complementary task). The rule depends on the job number only, so
//! sporadic release delays leave it unchanged.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::assignment::{fraction_on_processor, Distribution};
use crate::rat::Rat;
use crate::task_model::{ProcessorId, TaskId, TaskSet};

/// A rational weight in (0, 1].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weight(Rat);

impl Weight {
    pub fn new(value: Rat) -> Result<Weight, JobDistError> {
        if value.is_positive() && value <= Rat::one() {
            Ok(Weight(value))
        } else {
            Err(JobDistError::BadWeight)
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Weight {
        Weight::new(Rat::new(num, den)).expect("weight out of range")
    }

    pub fn as_rat(&self) -> &Rat {
        &self.0
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum JobDistError {
    /// Weights must lie in (0, 1].
    BadWeight,
    /// Subtask indices are 1-based.
    ZeroIndex,
    /// Lag queried past the end of the schedule prefix.
    PrefixTooShort,
    /// Job maps exist only for migrating tasks.
    NotMigrating(TaskId),
}

impl fmt::Display for JobDistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JobDistError::BadWeight => write!(f, "weight must be in (0, 1]"),
            JobDistError::ZeroIndex => write!(f, "subtask index must be >= 1"),
            JobDistError::PrefixTooShort => write!(f, "schedule prefix shorter than t"),
            JobDistError::NotMigrating(t) => write!(f, "task {t} is not migrating"),
        }
    }
}

/// The slot interval `[release_slot, deadline_slot)` of one subtask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub subtask_index: u64,
    pub release_slot: u64,
    pub deadline_slot: u64,
}

fn release_big(num: &BigInt, den: &BigInt, i: &BigInt) -> BigInt {
    // floor((i-1) / (num/den)) = floor((i-1) * den / num)
    ((i - BigInt::one()) * den).div_floor(num)
}

fn deadline_big(num: &BigInt, den: &BigInt, i: &BigInt) -> BigInt {
    (i * den).div_ceil(num)
}

/// Pseudo-release `floor((i-1)/w)` of subtask `i`, exact.
pub fn subtask_release(w: &Weight, i: u64) -> Result<u64, JobDistError> {
    if i == 0 {
        return Err(JobDistError::ZeroIndex);
    }
    let r = release_big(&w.0.numer(), &w.0.denom(), &BigInt::from(i));
    Ok(r.to_u64().expect("slot overflows u64"))
}

/// Pseudo-deadline `ceil(i/w)` of subtask `i`, exact.
///
/// The window of subtask `i` is `[subtask_release, subtask_deadline)`; the
/// worked example with w = 3/7 gives d(T_1) = 3 and w(T_1) = [0, 3).
pub fn subtask_deadline(w: &Weight, i: u64) -> Result<u64, JobDistError> {
    if i == 0 {
        return Err(JobDistError::ZeroIndex);
    }
    let d = deadline_big(&w.0.numer(), &w.0.denom(), &BigInt::from(i));
    Ok(d.to_u64().expect("slot overflows u64"))
}

pub fn window(w: &Weight, i: u64) -> Result<Window, JobDistError> {
    Ok(Window {
        subtask_index: i,
        release_slot: subtask_release(w, i)?,
        deadline_slot: subtask_deadline(w, i)?,
    })
}

/// Allocation lag `w*t - (slots served in [0, t))`.
pub fn lag(w: &Weight, sched: &[bool], t: usize) -> Result<Rat, JobDistError> {
    if sched.len() < t {
        return Err(JobDistError::PrefixTooShort);
    }
    let served = sched[..t].iter().filter(|&&s| s).count();
    Ok(w.0.clone() * Rat::from_int(t as i64) - Rat::from_int(served as i64))
}

/// True iff `-1 < lag < 1` at every boundary in `[0, horizon]`.
pub fn is_pfair(w: &Weight, sched: &[bool], horizon: usize) -> bool {
    let minus_one = -Rat::one();
    (0..=horizon).all(|t| match lag(w, sched, t) {
        Ok(l) => l > minus_one && l < Rat::one(),
        Err(_) => false,
    })
}

/// Two weights are complementary iff they sum to exactly one.
pub fn is_complementary(w1: &Weight, w2: &Weight) -> bool {
    &w1.0 + &w2.0 == Rat::one()
}

/// `ceil(l * f)`: upper bound on jobs out of any `l` consecutive jobs that
/// land on the processor with workload fraction `f`.
pub fn lemma1_bound(l: u64, f: &Weight) -> u64 {
    (Rat::from_int(l as i64) * f.0.clone())
        .ceil_i64()
        .expect("bound overflows") as u64
}

/// Static job-index -> processor rule of one migrating task. Periodic in the
/// job index with period `cycle_length`.
#[derive(Clone, Debug)]
pub struct JobMap {
    pub task: TaskId,
    pub first_proc: ProcessorId,
    pub second_proc: ProcessorId,
    pub f_first: Weight,
    pub f_second: Weight,
    /// Reduced denominator `y` of `f_first`; the map repeats every `y` jobs.
    pub cycle_length: BigInt,
    /// Reduced numerator of `f_first`.
    x_first: BigInt,
    /// Fast path when the cycle fits machine words.
    small: Option<(u64, u64)>,
}

impl JobMap {
    pub fn cycle_length_u64(&self) -> Option<u64> {
        self.small.map(|(_, y)| y)
    }
}

/// Builds the job rule for a migrating task: job `k` (slot `k-1` of the
/// cycle) goes to the lower-indexed processor iff its slot is the first slot
/// of a window of the weight-`f_first` task; every other slot is the last
/// slot of exactly one window of the complementary task and the job goes to
/// the higher-indexed processor.
pub fn build_job_map(d: &Distribution, ts: &TaskSet, task: TaskId) -> Result<JobMap, JobDistError> {
    if task >= ts.len() || !d.is_migrating(task) {
        return Err(JobDistError::NotMigrating(task));
    }
    let procs = &d.task_procs[task];
    let (pa, pb) = (procs[0].min(procs[1]), procs[0].max(procs[1]));
    let f_first = fraction_on_processor(d, task, pa).map_err(|_| JobDistError::NotMigrating(task))?;
    let f_second = Rat::one() - &f_first;
    let x = f_first.numer();
    let y = f_first.denom();
    let small = match (x.to_u64(), y.to_u64()) {
        (Some(x), Some(y)) => Some((x, y)),
        _ => None,
    };
    Ok(JobMap {
        task,
        first_proc: pa,
        second_proc: pb,
        f_first: Weight::new(f_first)?,
        f_second: Weight::new(f_second)?,
        cycle_length: y,
        x_first: x,
        small,
    })
}

/// Processor of job `k >= 1`, by job number only.
pub fn job_processor(map: &JobMap, k: u64) -> ProcessorId {
    debug_assert!(k >= 1);
    if let Some((x, y)) = map.small {
        let s = ((k - 1) % y) as u128;
        let (x, y) = (x as u128, y as u128);
        // slot s starts window g iff floor((g-1)/w) = s; the only candidate
        // is g - 1 = ceil(s*x/y). (For weights above 1/2 adjacent windows
        // overlap, so "which window contains s" would miss starts.)
        let g_minus_1 = (s * x).div_ceil(y);
        let first_slot = g_minus_1 * y / x;
        return if first_slot == s { map.first_proc } else { map.second_proc };
    }
    let y = &map.cycle_length;
    let x = &map.x_first;
    let s = (BigInt::from(k) - BigInt::one()).mod_floor(y);
    let g_minus_1 = (&s * x).div_ceil(y);
    let first_slot = (&g_minus_1 * y).div_floor(x);
    if first_slot == s {
        map.first_proc
    } else {
        map.second_proc
    }
}

/// First `count` job -> processor assignments.
pub fn job_assignments(map: &JobMap, count: u64) -> Vec<ProcessorId> {
    (1..=count).map(|k| job_processor(map, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::{assign_tasks, Heuristic};
    use crate::task_model::{Task, TaskSet};
    use alloc::vec;

    #[test]
    fn window_examples() {
        let w = Weight::from_ratio(3, 7);
        assert_eq!(subtask_release(&w, 1).unwrap(), 0);
        assert_eq!(subtask_deadline(&w, 1).unwrap(), 3);

        let unit = Weight::from_ratio(1, 1);
        for k in 1..=5 {
            assert_eq!(subtask_release(&unit, k).unwrap(), k - 1);
            assert_eq!(subtask_deadline(&unit, k).unwrap(), k);
        }

        let w = Weight::from_ratio(7, 8);
        assert_eq!(subtask_release(&w, 7).unwrap(), 6); // floor(48/7)
        assert_eq!(subtask_deadline(&w, 1).unwrap(), 2); // ceil(8/7)

        assert_eq!(subtask_release(&w, 0), Err(JobDistError::ZeroIndex));
    }

    #[test]
    fn windows_are_valid_and_monotone() {
        for den in 1..=12i64 {
            for num in 1..=den {
                let w = Weight::from_ratio(num, den);
                let mut prev = window(&w, 1).unwrap();
                assert!(prev.release_slot < prev.deadline_slot);
                for i in 2..=(3 * den as u64) {
                    let cur = window(&w, i).unwrap();
                    assert!(cur.release_slot < cur.deadline_slot);
                    assert!(cur.release_slot >= prev.release_slot);
                    assert!(cur.deadline_slot >= prev.deadline_slot);
                    prev = cur;
                }
            }
        }
    }

    #[test]
    fn lag_examples() {
        let w = Weight::from_ratio(3, 7);
        assert_eq!(lag(&w, &[], 0).unwrap(), Rat::zero());
        // scheduled in slot 2 only, t = 3: 9/7 - 1 = 2/7
        assert_eq!(
            lag(&w, &[false, false, true], 3).unwrap(),
            Rat::new(2, 7)
        );
        let half = Weight::from_ratio(1, 2);
        let sched = [true, false, true, false, true, false];
        assert_eq!(lag(&half, &sched, 6).unwrap(), Rat::zero());
        assert_eq!(lag(&half, &sched, 7), Err(JobDistError::PrefixTooShort));
    }

    #[test]
    fn pfair_examples() {
        let w = Weight::from_ratio(3, 7);
        // never scheduled: lag reaches 9/7 at t = 3
        assert!(!is_pfair(&w, &[false, false, false], 3));
        let unit = Weight::from_ratio(1, 1);
        assert!(is_pfair(&unit, &[true; 10], 10));
    }

    #[test]
    fn complementary() {
        assert!(is_complementary(
            &Weight::from_ratio(1, 8),
            &Weight::from_ratio(7, 8)
        ));
        assert!(is_complementary(
            &Weight::from_ratio(1, 2),
            &Weight::from_ratio(1, 2)
        ));
        assert!(!is_complementary(
            &Weight::from_ratio(1, 3),
            &Weight::from_ratio(1, 3)
        ));
    }

    #[test]
    fn lemma1_examples() {
        assert_eq!(lemma1_bound(8, &Weight::from_ratio(1, 8)), 1);
        assert_eq!(lemma1_bound(0, &Weight::from_ratio(3, 7)), 0);
        assert_eq!(lemma1_bound(4, &Weight::from_ratio(7, 8)), 4);
    }

    /// Distribution that splits task 2 = T(2, 5) with shares 1/20 and 7/20,
    /// giving fractions 1/8 and 7/8.
    fn one_in_eight_map() -> JobMap {
        let tasks = vec![
            Task::new(0, Rat::new(19, 40), Rat::one()),
            Task::new(1, Rat::new(19, 40), Rat::one()),
            Task::new(2, Rat::from_int(2), Rat::from_int(5)),
            Task::new(3, Rat::new(13, 40), Rat::one()),
            Task::new(4, Rat::new(13, 40), Rat::one()),
        ];
        let ts = TaskSet::new(tasks, 2).unwrap();
        let d = assign_tasks(&ts, Heuristic::Sequential).unwrap();
        build_job_map(&d, &ts, 2).unwrap()
    }

    #[test]
    fn one_in_eight_pattern() {
        let map = one_in_eight_map();
        assert_eq!(map.f_first, Weight::from_ratio(1, 8));
        assert_eq!(map.cycle_length_u64(), Some(8));
        // first of every eight jobs on the first processor, rest on the second
        for k in 1..=32u64 {
            let expect = if (k - 1) % 8 == 0 { map.first_proc } else { map.second_proc };
            assert_eq!(job_processor(&map, k), expect, "job {k}");
        }
        assert_eq!(job_processor(&map, 1), map.first_proc);
        assert_eq!(job_processor(&map, 5), map.second_proc);
    }

    #[test]
    fn half_weight_alternates() {
        // Equal shares: jobs alternate between the two processors.
        let tasks = vec![
            Task::new(0, Rat::new(3, 8), Rat::one()),
            Task::new(1, Rat::new(3, 8), Rat::one()),
            Task::new(2, Rat::new(1, 2), Rat::one()),
            Task::new(3, Rat::new(3, 8), Rat::one()),
            Task::new(4, Rat::new(3, 8), Rat::one()),
        ];
        let ts = TaskSet::new(tasks, 2).unwrap();
        let d = assign_tasks(&ts, Heuristic::Sequential).unwrap();
        let map = build_job_map(&d, &ts, 2).unwrap();
        assert_eq!(map.f_first, Weight::from_ratio(1, 2));
        for k in 1..=16u64 {
            let expect = if k % 2 == 1 { map.first_proc } else { map.second_proc };
            assert_eq!(job_processor(&map, k), expect);
        }
    }

    #[test]
    fn cycle_periodicity() {
        let map = one_in_eight_map();
        let y = map.cycle_length_u64().unwrap();
        for k in 1..=40u64 {
            assert_eq!(job_processor(&map, k), job_processor(&map, k + y));
        }
    }

    #[test]
    fn fixed_task_rejected() {
        let tasks = vec![
            Task::new(0, Rat::new(1, 2), Rat::one()),
            Task::new(1, Rat::new(1, 2), Rat::one()),
        ];
        let ts = TaskSet::new(tasks, 2).unwrap();
        let d = assign_tasks(&ts, Heuristic::Sequential).unwrap();
        assert_eq!(
            build_job_map(&d, &ts, 0).unwrap_err(),
            JobDistError::NotMigrating(0)
        );
    }
}
