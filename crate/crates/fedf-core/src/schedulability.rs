//! Classical utilization-based schedulability tests: the EDF uniprocessor
//! utilization test, the Liu & Layland rate-monotonic bound, and the
//! admissibility gate for the partitioned scheme (all tasks light, total
//! utilization at most the processor count).

use core::fmt;

use crate::rat::Rat;
use crate::task_model::{is_light, total_utilization, TaskSet};

/// Outcome of a utilization test.
#[derive(Clone, Debug)]
pub struct TestVerdict {
    pub schedulable: bool,
    /// The bound compared against; exact where the test is exact.
    pub bound_used: Bound,
    pub total_utilization: Rat,
}

#[derive(Clone, Debug)]
pub enum Bound {
    Exact(Rat),
    Approx(f64),
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Exact(r) => write!(f, "{r}"),
            Bound::Approx(x) => write!(f, "{x:.12}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TestError {
    /// The test applies to uniprocessor task sets only.
    NotUniprocessor(usize),
    ZeroTasks,
}

impl fmt::Display for TestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestError::NotUniprocessor(m) => {
                write!(f, "test requires M = 1, task set has M = {m}")
            }
            TestError::ZeroTasks => write!(f, "bound undefined for n = 0"),
        }
    }
}

/// EDF on one processor: schedulable iff total utilization <= 1 (exact).
pub fn edf_uniprocessor_test(ts: &TaskSet) -> Result<TestVerdict, TestError> {
    if ts.processors != 1 {
        return Err(TestError::NotUniprocessor(ts.processors));
    }
    let u = total_utilization(ts);
    Ok(TestVerdict {
        schedulable: u <= Rat::one(),
        bound_used: Bound::Exact(Rat::one()),
        total_utilization: u,
    })
}

/// Liu & Layland bound `n (2^{1/n} - 1)`, accurate to at least 12
/// significant digits. Tends to ln 2 as n grows.
pub fn rm_utilization_bound(n: u64) -> Result<f64, TestError> {
    if n == 0 {
        return Err(TestError::ZeroTasks);
    }
    // 2^{1/n} - 1 = expm1(ln2 / n); expm1 avoids cancellation for large n.
    let ln2 = core::f64::consts::LN_2;
    Ok(n as f64 * libm::expm1(ln2 / n as f64))
}

/// Sufficient rate-monotonic test on one processor: U <= n(2^{1/n} - 1).
/// A negative verdict does not prove infeasibility.
pub fn rm_sufficient_test(ts: &TaskSet) -> Result<TestVerdict, TestError> {
    if ts.processors != 1 {
        return Err(TestError::NotUniprocessor(ts.processors));
    }
    let bound = rm_utilization_bound(ts.len() as u64)?;
    let u = total_utilization(ts);
    Ok(TestVerdict {
        schedulable: u.to_f64() <= bound,
        bound_used: Bound::Approx(bound),
        total_utilization: u,
    })
}

/// Admissibility for the partitioned scheme: every task light and
/// `U_sum <= M`, both checked exactly.
pub fn feasible_edf_admissible(ts: &TaskSet) -> bool {
    ts.tasks.iter().all(is_light)
        && total_utilization(ts) <= Rat::from_int(ts.processors as i64)
}
