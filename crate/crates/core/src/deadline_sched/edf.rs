use serde::Serialize;

use crate::model::TaskRef;
use crate::schedule::Schedule;

use super::{DeadlineInstance, DeadlineMode};

/// Outcome for one job. `begin == None` means the job was fully discarded;
/// its `completion` is then its deadline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JobTrace {
    pub begin: Option<usize>,
    pub completion: usize,
    pub machine: Option<usize>,
    pub scheduled: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunTrace {
    pub mode: DeadlineMode,
    pub jobs: Vec<JobTrace>,
    /// Job indices in the order they were processed.
    pub order: Vec<usize>,
    pub schedule: Schedule,
}

impl RunTrace {
    pub fn discarded_tasks(&self) -> usize {
        self.schedule.discarded.len()
    }

    /// Whether slot `t` on `machine` holds a task.
    pub fn busy(&self, machine: usize, t: usize) -> bool {
        self.schedule.assignment.values().any(|p| p.machine == machine && p.slot == t)
    }
}

pub fn edf_ect(inst: &DeadlineInstance) -> RunTrace {
    run(inst, DeadlineMode::NoDelay)
}

/// As [`edf_ect`], but each job's tasks lie strictly inside its active interval.
pub fn edf_ect_comm(inst: &DeadlineInstance) -> RunTrace {
    run(inst, DeadlineMode::Comm)
}

/// Nondecreasing deadline; equal deadlines follow the topological order.
pub(super) fn edf_order(inst: &DeadlineInstance) -> Vec<usize> {
    let topo = inst.instance().precedence().topological();
    let mut rank = vec![0; inst.num_jobs()];
    for (i, &j) in topo.iter().enumerate() {
        rank[j] = i;
    }
    let mut order: Vec<usize> = (0..inst.num_jobs()).collect();
    order.sort_by_key(|&j| (inst.deadline(j), rank[j]));
    order
}

fn run(inst: &DeadlineInstance, mode: DeadlineMode) -> RunTrace {
    let m = inst.machines();
    let n = inst.num_jobs();
    let mut free: Vec<Vec<bool>> = (1..=m).map(|i| (1..=inst.horizon()).map(|t| inst.cap(i, t)).collect()).collect();
    let mut traces: Vec<Option<JobTrace>> = vec![None; n];
    let mut sched = Schedule::new(inst.horizon());
    let order = edf_order(inst);
    let prec = inst.instance().precedence();

    for &j in &order {
        let (r, d, p) = (inst.release(j), inst.deadline(j), inst.size(j));
        let ready = prec
            .predecessors(j)
            .map(|q| traces[q].as_ref().expect("predecessors come first").completion + 1)
            .max()
            .unwrap_or(1)
            .max(r);
        let begin = (ready..=d).find(|&t| (0..m).any(|i| free[i][t - 1]));
        let Some(b) = begin else {
            for task in inst.instance().tasks_of(j) {
                sched.discard(task);
            }
            traces[j] = Some(JobTrace { begin: None, completion: d, machine: None, scheduled: 0 });
            continue;
        };
        let (lo, hi) = match mode {
            DeadlineMode::NoDelay => (b, d),
            DeadlineMode::Comm => (b + 1, d.saturating_sub(1)),
        };
        let slots_of = |i: usize| -> Vec<usize> { (lo..=hi).filter(|&t| free[i][t - 1]).collect() };
        let per_machine: Vec<Vec<usize>> = (0..m).map(slots_of).collect();
        let full = (0..m)
            .filter(|&i| per_machine[i].len() >= p)
            .map(|i| (per_machine[i][p - 1], i))
            .min();
        let (machine, used, completion) = match full {
            Some((t_star, i)) => {
                let c = match mode {
                    DeadlineMode::NoDelay => t_star,
                    DeadlineMode::Comm => t_star + 1,
                };
                (i, per_machine[i][..p].to_vec(), c)
            }
            None => {
                let best = (0..m).map(|i| per_machine[i].len()).max().unwrap_or(0);
                let i = (0..m).find(|&i| per_machine[i].len() == best).expect("at least one machine");
                (i, per_machine[i].clone(), d)
            }
        };
        for (k, &t) in used.iter().enumerate() {
            free[machine][t - 1] = false;
            sched.assign(TaskRef::new(j, k as u32 + 1), machine + 1, t);
        }
        for k in used.len()..p {
            sched.discard(TaskRef::new(j, k as u32 + 1));
        }
        traces[j] = Some(JobTrace { begin: Some(b), completion, machine: Some(machine + 1), scheduled: used.len() });
    }
    sched.horizon = inst.horizon();
    RunTrace { mode, jobs: traces.into_iter().map(|t| t.expect("every job processed")).collect(), order, schedule: sched }
}
