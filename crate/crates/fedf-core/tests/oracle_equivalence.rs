//! The event-driven simulator and the slot-by-slot reference scheduler must
//! produce identical completion times on any integer-parameter uniprocessor
//! task set, because both apply EDF with the same tie-break and decisions
//! can only change at integer instants.

use fedf_core::assignment::{assign_non_light, Heuristic};
use fedf_core::engine::{brute_force_oracle, simulate, SimConfig};
use fedf_core::rat::Rat;
use fedf_core::task_model::{total_utilization, Task, TaskSet};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_uniproc_set(rng: &mut ChaCha8Rng) -> TaskSet {
    loop {
        let n = rng.random_range(1..=4usize);
        let tasks: Vec<Task> = (0..n)
            .map(|id| {
                let p = rng.random_range(2..=12i64);
                let e = rng.random_range(1..=p);
                Task::new(id, Rat::from_int(e), Rat::from_int(p))
            })
            .collect();
        let ts = TaskSet::new(tasks, 1).unwrap();
        if total_utilization(&ts) <= Rat::one() {
            return ts;
        }
    }
}

fn check_against_oracle(ts: &TaskSet, horizon: i64) {
    let d = assign_non_light(ts, Heuristic::Sequential).unwrap();
    let h = Rat::from_int(horizon);
    let (trace, sim_stats) = simulate(ts, &d, &SimConfig::new(h.clone())).unwrap();
    let (oracle, oracle_stats) = brute_force_oracle(ts, &Rat::one(), &h).unwrap();
    assert_eq!(
        trace.completions, oracle,
        "completion maps differ on {:?}",
        ts.tasks
    );
    assert_eq!(sim_stats.max_tardiness, oracle_stats.max_tardiness);
    assert_eq!(sim_stats.completed_jobs, oracle_stats.completed_jobs);
    assert_eq!(sim_stats.busy[0], oracle_stats.busy[0]);
}

#[test]
fn random_feasible_sets_match() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..80 {
        let ts = random_uniproc_set(&mut rng);
        check_against_oracle(&ts, 120);
    }
}

#[test]
fn full_utilization_set_matches() {
    // U = 1 exactly: the schedule is busy everywhere, maximizing the chance
    // of divergence if the tie-breaks differed.
    let ts = TaskSet::new(
        vec![
            Task::new(0, Rat::from_int(1), Rat::from_int(2)),
            Task::new(1, Rat::from_int(1), Rat::from_int(3)),
            Task::new(2, Rat::from_int(1), Rat::from_int(6)),
        ],
        1,
    )
    .unwrap();
    assert_eq!(total_utilization(&ts), Rat::one());
    check_against_oracle(&ts, 180);
}

#[test]
fn known_set_matches_slot_by_slot() {
    let ts = TaskSet::new(
        vec![
            Task::new(0, Rat::from_int(1), Rat::from_int(2)),
            Task::new(1, Rat::from_int(1), Rat::from_int(3)),
        ],
        1,
    )
    .unwrap();
    check_against_oracle(&ts, 60);
}
