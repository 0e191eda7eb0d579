//! Exhaustive small-parameter checks and randomized property tests for the
//! arithmetic, distribution, and job-routing layers.

use fedf_core::assignment::{
    assign_tasks, fraction_on_processor, validate_distribution, Heuristic,
};
use fedf_core::job_distribution::{
    build_job_map, is_pfair, job_assignments, job_processor, lemma1_bound, subtask_deadline,
    subtask_release, JobMap,
};
use fedf_core::rat::Rat;
use fedf_core::task_model::{total_utilization, Task, TaskSet};
use proptest::prelude::*;

/// A two-processor set whose third task migrates with fraction `x/y` on the
/// lower-indexed processor: fillers of utilization 1/2 and 1/2 - x/(2y)
/// leave exactly x/(2y) free, splitting the weight-1/2 task there.
fn map_with_fraction(x: i64, y: i64) -> JobMap {
    assert!(0 < x && x < y);
    let tasks = vec![
        Task::new(0, Rat::new(1, 2), Rat::one()),
        Task::new(1, Rat::new(1, 2) - Rat::new(x, 2 * y), Rat::one()),
        Task::new(2, Rat::new(1, 2), Rat::one()),
    ];
    let ts = TaskSet::new(tasks, 2).unwrap();
    let d = assign_tasks(&ts, Heuristic::Sequential).unwrap();
    assert!(d.is_migrating(2), "fraction {x}/{y} did not split");
    let map = build_job_map(&d, &ts, 2).unwrap();
    assert_eq!(*map.f_first.as_rat(), Rat::new(x, y));
    map
}

/// The job rule serves every slot: the combined single-processor schedule of
/// a weight `x/y` task and its complement must keep both sides within a lag
/// of one in either direction, and each subtask must finish in its window.
#[test]
fn complementary_slot_rule_is_fair() {
    for y in 2..=12i64 {
        for x in 1..=(y - 1) {
            if num_integer::gcd(x, y) != 1 {
                continue; // equivalent to a reduced pair already covered
            }
            let map = map_with_fraction(x, y);
            let horizon = (3 * y) as u64;
            let assignments = job_assignments(&map, horizon);
            let first: Vec<bool> = assignments.iter().map(|&p| p == map.first_proc).collect();
            let second: Vec<bool> = first.iter().map(|&b| !b).collect();
            assert!(
                is_pfair(&map.f_first, &first, horizon as usize),
                "weight {x}/{y} drifts"
            );
            assert!(
                is_pfair(&map.f_second, &second, horizon as usize),
                "complement of {x}/{y} drifts"
            );

            // the i-th slot given to each side lies inside window i
            for (w, sched) in [(&map.f_first, &first), (&map.f_second, &second)] {
                let mut i = 0u64;
                for (slot, &served) in sched.iter().enumerate() {
                    if !served {
                        continue;
                    }
                    i += 1;
                    let slot = slot as u64;
                    assert!(subtask_release(w, i).unwrap() <= slot);
                    assert!(slot < subtask_deadline(w, i).unwrap());
                }
            }
        }
    }
}

/// Any run of `l` consecutive jobs sends at most `ceil(l * f)` of them to
/// the processor holding workload fraction `f` — exhaustively over all
/// fractions with denominator at most 12, run lengths up to two cycles, and
/// all cycle offsets.
#[test]
fn consecutive_job_bound_holds() {
    for y in 2..=12i64 {
        for x in 1..=(y - 1) {
            if num_integer::gcd(x, y) != 1 {
                continue;
            }
            let map = map_with_fraction(x, y);
            let yc = map.cycle_length_u64().unwrap();
            for start in 1..=yc {
                for l in 1..=(2 * yc) {
                    let mut on_first = 0u64;
                    for k in start..start + l {
                        if job_processor(&map, k) == map.first_proc {
                            on_first += 1;
                        }
                    }
                    assert!(
                        on_first <= lemma1_bound(l, &map.f_first),
                        "{x}/{y}: {on_first} of {l} jobs from {start} on first"
                    );
                    assert!(
                        l - on_first <= lemma1_bound(l, &map.f_second),
                        "{x}/{y}: complement bound from {start}, l = {l}"
                    );
                }
            }
        }
    }
}

fn rat_strategy() -> impl Strategy<Value = Rat> {
    (any::<i32>(), 1..10_000i64).prop_map(|(n, d)| Rat::new(n as i64, d))
}

proptest! {
    #[test]
    fn rat_display_round_trips(a in rat_strategy()) {
        let s = a.to_string();
        prop_assert_eq!(s.parse::<Rat>().unwrap(), a);
    }

    #[test]
    fn rat_field_identities(a in rat_strategy(), b in rat_strategy(), c in rat_strategy()) {
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
        if !b.is_zero() {
            prop_assert_eq!(&(&a / &b) * &b, a.clone());
        }
    }

    #[test]
    fn rat_order_matches_difference_sign(a in rat_strategy(), b in rat_strategy()) {
        let diff = &a - &b;
        prop_assert_eq!(a < b, diff.is_negative());
        prop_assert_eq!(a == b, diff.is_zero());
    }

    #[test]
    fn rat_floor_ceil_bracket(a in rat_strategy()) {
        let f = a.floor();
        let c = a.ceil();
        prop_assert!(f <= a && a <= c);
        prop_assert!(&c - &f <= Rat::one());
    }

    /// Random admissible sets distribute without violating any of the
    /// structural properties, under every heuristic.
    #[test]
    fn distributions_validate_clean(
        seed_parts in prop::collection::vec((1..=100i64, 1..=2i64), 2..=12),
        m in 2..=4usize,
    ) {
        let mut tasks = Vec::new();
        let mut total = Rat::zero();
        let cap = Rat::from_int(m as i64);
        for (i, (p, half)) in seed_parts.into_iter().enumerate() {
            // utilization p/(2p) = 1/2 or p/(4p) = 1/4: always light
            let e = Rat::from_int(p);
            let period = Rat::from_int(p * 2 * half);
            let u = &e / &period;
            if &total + &u > cap {
                break;
            }
            total = &total + &u;
            tasks.push(Task::new(i, e, period));
        }
        prop_assume!(!tasks.is_empty());
        let ts = TaskSet::new(tasks, m).unwrap();
        for h in [
            Heuristic::Sequential,
            Heuristic::Huf,
            Heuristic::Luf,
            Heuristic::Lef,
            Heuristic::Random(7),
        ] {
            let d = assign_tasks(&ts, h).unwrap();
            let violations = validate_distribution(&ts, &d);
            prop_assert!(violations.is_empty(), "{h:?}: {violations:?}");
            // migrating fractions on the two processors sum to one
            for t in d.migrating_tasks() {
                let procs = &d.task_procs[t];
                let fa = fraction_on_processor(&d, t, procs[0]).unwrap();
                let fb = fraction_on_processor(&d, t, procs[1]).unwrap();
                prop_assert_eq!(&fa + &fb, Rat::one());
            }
        }
        prop_assert!(total_utilization(&ts) <= cap);
    }
}
