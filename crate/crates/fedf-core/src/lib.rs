//! Core algorithms for a deterministic soft real-time scheduling laboratory:
//! exact-rational arithmetic, the recurrent task model, utilization-based
//! schedulability tests, partitioned-with-migration task distribution, the
//! proportionate-fair job-routing machinery, an event-driven multiprocessor
//! EDF simulator with tardiness accounting, and a dispatcher for uniform
//! (speed-heterogeneous) platforms.
//!
//! The crate is `no_std` (with `alloc`); all scheduling decisions are made
//! over exact rationals, so every result is bit-for-bit reproducible.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod assignment;
pub mod efdf;
pub mod engine;
pub mod job_distribution;
pub mod rat;
pub mod schedulability;
pub mod task_model;

pub use assignment::{assign_non_light, assign_tasks, validate_distribution, Distribution, Heuristic};
pub use engine::{brute_force_oracle, max_tardiness_converged, simulate, SimConfig, SimStats, SimTrace};
pub use job_distribution::{build_job_map, job_processor, JobMap, Weight};
pub use rat::Rat;
pub use schedulability::{edf_uniprocessor_test, feasible_edf_admissible, rm_utilization_bound};
pub use task_model::{Job, Task, TaskId, TaskSet};
