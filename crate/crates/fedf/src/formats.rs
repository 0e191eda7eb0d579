//! Line-oriented text formats: task sets, distributions, schedule traces,
//! sporadic release traces, and dispatcher states. All rational fields are
//! parsed and printed bit-exactly (`7/20` loads as exactly 7/20).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use fedf_core::assignment::{Distribution, Share};
use fedf_core::efdf::{DispatchState, ReadyTask};
use fedf_core::engine::SimTrace;
use fedf_core::rat::Rat;
use fedf_core::task_model::{Task, TaskId, TaskSet};

fn rat(s: &str) -> Result<Rat> {
    s.parse::<Rat>().map_err(|e| anyhow!("bad rational `{s}`: {e}"))
}

/// Strips comments and blank lines; yields (line number, content).
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            None
        } else {
            Some((i + 1, l))
        }
    })
}

/// Task-set file: header `M=<int>`, then `id exec_cost period [sporadic]`
/// per line; `#` starts a comment.
pub fn parse_taskset(text: &str) -> Result<TaskSet> {
    let mut it = lines(text);
    let (ln, header) = it.next().ok_or_else(|| anyhow!("empty task-set file"))?;
    let m: usize = header
        .strip_prefix("M=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| anyhow!("line {ln}: expected header `M=<int>`, got `{header}`"))?;
    let mut tasks = Vec::new();
    for (ln, l) in it {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() < 3 || f.len() > 4 {
            bail!("line {ln}: expected `id exec_cost period [sporadic]`");
        }
        let id: TaskId = f[0].parse().with_context(|| format!("line {ln}: bad id"))?;
        let e = rat(f[1]).with_context(|| format!("line {ln}"))?;
        let p = rat(f[2]).with_context(|| format!("line {ln}"))?;
        let task = match f.get(3) {
            None => Task::new(id, e, p),
            Some(&"sporadic") => Task::sporadic(id, e, p),
            Some(other) => bail!("line {ln}: unknown flag `{other}`"),
        };
        tasks.push(task);
    }
    TaskSet::new(tasks, m).map_err(|e| anyhow!("invalid task set: {e}"))
}

pub fn emit_taskset(ts: &TaskSet) -> String {
    let mut out = format!("M={}\n", ts.processors);
    for t in &ts.tasks {
        let _ = write!(out, "{} {} {}", t.id, t.exec_cost, t.period);
        if t.release_model == fedf_core::task_model::ReleaseModel::Sporadic {
            out.push_str(" sporadic");
        }
        out.push('\n');
    }
    out
}

/// Distribution file: one line per share,
/// `task proc share_num/share_den fixed|migrating`.
pub fn emit_distribution(d: &Distribution) -> String {
    let mut out = String::new();
    for s in &d.shares {
        let kind = if d.is_migrating(s.task) { "migrating" } else { "fixed" };
        let _ = writeln!(out, "{} {} {} {}", s.task, s.processor, s.value, kind);
    }
    out
}

pub fn parse_distribution(text: &str, processors: usize, n_tasks: usize) -> Result<Distribution> {
    let mut shares = Vec::new();
    let mut task_procs: Vec<Vec<usize>> = vec![Vec::new(); n_tasks];
    for (ln, l) in lines(text) {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 4 {
            bail!("line {ln}: expected `task proc share fixed|migrating`");
        }
        let task: TaskId = f[0].parse().with_context(|| format!("line {ln}: bad task"))?;
        let proc: usize = f[1].parse().with_context(|| format!("line {ln}: bad proc"))?;
        let value = rat(f[2]).with_context(|| format!("line {ln}"))?;
        if !matches!(f[3], "fixed" | "migrating") {
            bail!("line {ln}: expected `fixed` or `migrating`");
        }
        if task >= n_tasks || proc >= processors {
            bail!("line {ln}: task or processor out of range");
        }
        shares.push(Share { task, processor: proc, value });
        task_procs[task].push(proc);
    }
    let mut fixed = vec![Vec::new(); processors];
    let mut migrating = vec![Vec::new(); processors];
    for (task, procs) in task_procs.iter_mut().enumerate() {
        procs.sort_unstable();
        match procs.len() {
            1 => fixed[procs[0]].push(task),
            2 => {
                migrating[procs[0]].push(task);
                migrating[procs[1]].push(task);
            }
            0 => bail!("task {task} has no share"),
            _ => bail!("task {task} has shares on more than two processors"),
        }
    }
    Ok(Distribution { shares, fixed, migrating, task_procs, processors })
}

/// Trace file: one line per segment, `proc task job start end`.
pub fn emit_trace(trace: &SimTrace) -> String {
    let mut out = String::new();
    for s in &trace.segments {
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            s.processor, s.task, s.job, s.start, s.end
        );
    }
    out
}

/// Release-trace file: `task time` per line; times of one task must be
/// non-decreasing in file order.
pub fn parse_release_traces(text: &str) -> Result<BTreeMap<TaskId, Vec<Rat>>> {
    let mut traces: BTreeMap<TaskId, Vec<Rat>> = BTreeMap::new();
    for (ln, l) in lines(text) {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 2 {
            bail!("line {ln}: expected `task time`");
        }
        let task: TaskId = f[0].parse().with_context(|| format!("line {ln}: bad task"))?;
        let t = rat(f[1]).with_context(|| format!("line {ln}"))?;
        traces.entry(task).or_default().push(t);
    }
    Ok(traces)
}

/// Dispatcher-state file: `task abs_deadline remaining [last_node]` per line.
pub fn parse_dispatch_state(text: &str) -> Result<DispatchState> {
    let mut ready = Vec::new();
    for (ln, l) in lines(text) {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() < 3 || f.len() > 4 {
            bail!("line {ln}: expected `task abs_deadline remaining [last_node]`");
        }
        let task: TaskId = f[0].parse().with_context(|| format!("line {ln}: bad task"))?;
        let abs_deadline = rat(f[1]).with_context(|| format!("line {ln}"))?;
        let remaining = rat(f[2]).with_context(|| format!("line {ln}"))?;
        let last_node = match f.get(3) {
            None => None,
            Some(v) => Some(v.parse().with_context(|| format!("line {ln}: bad node"))?),
        };
        ready.push(ReadyTask { task, abs_deadline, remaining, last_node });
    }
    Ok(DispatchState { ready })
}

/// Comma-separated speed list for the uniform dispatcher, e.g. `2,1,1/2`.
pub fn parse_speeds(text: &str) -> Result<Vec<Rat>> {
    text.split(',').map(|s| rat(s.trim())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use fedf_core::assignment::{assign_tasks, validate_distribution, Heuristic};

    const SAMPLE: &str = "\
# two light tasks and one that splits
M=2
0 19/40 1
1 19/40 1
2 2 5
3 13/40 1
4 13/40 1
";

    #[test]
    fn taskset_round_trip() {
        let ts = parse_taskset(SAMPLE).unwrap();
        assert_eq!(ts.processors, 2);
        assert_eq!(ts.len(), 5);
        assert_eq!(ts.tasks[0].exec_cost, Rat::new(19, 40));
        let text = emit_taskset(&ts);
        let again = parse_taskset(&text).unwrap();
        assert_eq!(emit_taskset(&again), text);
    }

    #[test]
    fn taskset_errors() {
        assert!(parse_taskset("").is_err());
        assert!(parse_taskset("M=x\n").is_err());
        assert!(parse_taskset("M=1\n0 1\n").is_err());
        assert!(parse_taskset("M=1\n0 3 2\n").is_err()); // e > p
    }

    #[test]
    fn sporadic_flag() {
        let ts = parse_taskset("M=1\n0 1 3 sporadic\n").unwrap();
        assert_eq!(
            ts.tasks[0].release_model,
            fedf_core::task_model::ReleaseModel::Sporadic
        );
        assert!(emit_taskset(&ts).contains("sporadic"));
    }

    #[test]
    fn distribution_round_trip() {
        let ts = parse_taskset(SAMPLE).unwrap();
        let d = assign_tasks(&ts, Heuristic::Sequential).unwrap();
        let text = emit_distribution(&d);
        assert!(text.contains("migrating"));
        let again = parse_distribution(&text, ts.processors, ts.len()).unwrap();
        assert!(validate_distribution(&ts, &again).is_empty());
        assert_eq!(emit_distribution(&again), text);
    }

    #[test]
    fn release_traces() {
        let tr = parse_release_traces("0 0\n0 5\n1 1/2\n").unwrap();
        assert_eq!(tr[&0], vec![Rat::zero(), Rat::from_int(5)]);
        assert_eq!(tr[&1], vec![Rat::new(1, 2)]);
    }

    #[test]
    fn dispatch_state_and_speeds() {
        let st = parse_dispatch_state("0 10 2 1\n1 4 1/2\n").unwrap();
        assert_eq!(st.ready.len(), 2);
        assert_eq!(st.ready[0].last_node, Some(1));
        assert_eq!(st.ready[1].remaining, Rat::new(1, 2));
        assert_eq!(
            parse_speeds("2, 1, 1/2").unwrap(),
            vec![Rat::from_int(2), Rat::one(), Rat::new(1, 2)]
        );
        assert!(parse_speeds("2,,1").is_err());
    }
}
