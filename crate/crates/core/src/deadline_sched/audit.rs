use serde::Serialize;

use super::{DeadlineError, DeadlineInstance, DeadlineMode, RunTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditKind {
    /// Idle slots on another machine inside an active interval.
    Conservation,
    /// Idle slots on the job's own machine inside its active interval.
    OwnMachine,
    /// Idle slots in an interval before a job that could not start there.
    EmptySlots,
    /// Idle slots in an interval inside the window of a job that lost tasks.
    TotalEmptySlots,
    /// An idle slot with a waiting job but no active predecessor to explain it.
    ActiveJob,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditViolation {
    pub kind: AuditKind,
    pub job: String,
    pub machine: usize,
    pub interval: (usize, usize),
    pub idle: usize,
    pub bound: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub mode: DeadlineMode,
    /// Completion time assumed for fully discarded jobs.
    pub discarded_completion: &'static str,
    /// Number of fully discarded jobs that relied on that convention.
    pub convention_applied: usize,
    pub checks: usize,
    pub violations: Vec<AuditViolation>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn idle_audit(trace: &RunTrace, inst: &DeadlineInstance, mode: DeadlineMode) -> Result<AuditReport, DeadlineError> {
    let n = inst.num_jobs();
    let m = inst.machines();
    let horizon = inst.horizon();
    if trace.jobs.len() != n {
        return Err(DeadlineError::TraceMismatch(format!("{} job traces for {n} jobs", trace.jobs.len())));
    }
    if trace.mode != mode {
        return Err(DeadlineError::TraceMismatch(format!("trace mode {:?}, audit mode {mode:?}", trace.mode)));
    }
    let mut busy = vec![vec![false; horizon + 1]; m + 1];
    for (task, p) in &trace.schedule.assignment {
        if task.job >= n || p.machine == 0 || p.machine > m || p.slot == 0 || p.slot > horizon {
            return Err(DeadlineError::TraceMismatch(format!("task {task:?} out of range")));
        }
        if !inst.cap(p.machine, p.slot) {
            return Err(DeadlineError::TraceMismatch(format!("task {task:?} on unavailable slot")));
        }
        if p.slot < inst.release(task.job) || p.slot > inst.deadline(task.job) {
            return Err(DeadlineError::TraceMismatch(format!("task {task:?} outside its window")));
        }
        busy[p.machine][p.slot] = true;
    }
    let idle = |i: usize, t: usize| inst.cap(i, t) && !busy[i][t];
    let count = |i: usize, a: usize, b: usize| (a.max(1)..=b.min(horizon)).filter(|&t| idle(i, t)).count();
    let delta = inst.chain_length() as usize;
    let comm = mode == DeadlineMode::Comm;
    let id = |j: usize| inst.instance().id(j).to_string();

    let mut report = AuditReport {
        mode,
        discarded_completion: "deadline",
        convention_applied: trace.jobs.iter().filter(|t| t.begin.is_none()).count(),
        checks: 0,
        violations: Vec::new(),
    };
    let check = |report: &mut AuditReport, kind, j: usize, i: usize, a: usize, b: usize, bound: usize| {
        report.checks += 1;
        let c = count(i, a, b);
        if c > bound {
            report.violations.push(AuditViolation { kind, job: id(j), machine: i, interval: (a, b), idle: c, bound });
        }
    };

    for (j, tr) in trace.jobs.iter().enumerate() {
        let (Some(b), Some(own)) = (tr.begin, tr.machine) else {
            continue;
        };
        let slack = if comm { 2 } else { 0 };
        for i in 1..=m {
            if i == own {
                check(&mut report, AuditKind::OwnMachine, j, i, b, tr.completion, slack);
            } else {
                check(&mut report, AuditKind::Conservation, j, i, b, tr.completion, tr.scheduled + slack);
            }
        }
    }

    let (empty_bound, total_bound) = if comm { (3 * delta, 6 * delta) } else { (delta, 2 * delta) };
    for (j, tr) in trace.jobs.iter().enumerate() {
        let (r, d) = (inst.release(j), inst.deadline(j));
        let lost = tr.scheduled < inst.size(j);
        for q in inst.interval_of(r)..=inst.interval_of(d) {
            let (lo, hi) = inst.interval_bounds(q);
            let (a, b) = (lo.max(r), hi.min(d));
            let waiting_end = match tr.begin {
                None => b,
                Some(bj) => b.min(bj.saturating_sub(1)),
            };
            for i in 1..=m {
                if waiting_end >= a {
                    check(&mut report, AuditKind::EmptySlots, j, i, a, waiting_end, empty_bound);
                }
                if lost {
                    check(&mut report, AuditKind::TotalEmptySlots, j, i, a, b, total_bound);
                }
            }
        }
    }

    let prec = inst.instance().precedence();
    for i in 1..=m {
        for t in 1..=horizon {
            if !idle(i, t) {
                continue;
            }
            for (js, tr) in trace.jobs.iter().enumerate() {
                let waiting = tr.begin.is_none_or(|b| b > t);
                if !waiting || t < inst.release(js) || t > inst.deadline(js) {
                    continue;
                }
                report.checks += 1;
                let explained = prec.predecessors(js).any(|j| {
                    let pj = &trace.jobs[j];
                    match (pj.begin, pj.machine) {
                        (Some(b), Some(mj)) => b <= t && t <= pj.completion && (comm || mj != i),
                        _ => false,
                    }
                });
                if !explained {
                    report.violations.push(AuditViolation {
                        kind: AuditKind::ActiveJob,
                        job: id(js),
                        machine: i,
                        interval: (t, t),
                        idle: 1,
                        bound: 0,
                    });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deadline_sched::{edf_ect, DeadlineJob};

    #[test]
    fn empty_instance_has_empty_audit() {
        let inst = DeadlineInstance::new(2, 1, vec![vec![true; 2]], vec![], &[], None).unwrap();
        let tr = edf_ect(&inst);
        let rep = idle_audit(&tr, &inst, DeadlineMode::NoDelay).unwrap();
        assert!(rep.is_clean());
    }

    #[test]
    fn conservation_bound_is_tight() {
        // two identical jobs land on different machines
        let jobs = vec![
            DeadlineJob { id: "a".into(), size: 2, release: 1, deadline: 4 },
            DeadlineJob { id: "b".into(), size: 2, release: 1, deadline: 4 },
        ];
        let cap = vec![vec![true, true, true, true], vec![true, true, true, true]];
        let inst = DeadlineInstance::new(4, 1, cap, jobs, &[], None).unwrap();
        let tr = edf_ect(&inst);
        assert_eq!(tr.jobs[0].machine, Some(1));
        assert_eq!(tr.jobs[1].machine, Some(2));
        let rep = idle_audit(&tr, &inst, DeadlineMode::NoDelay).unwrap();
        assert!(rep.is_clean(), "{rep:?}");

        // a single 2-task job leaves exactly 2 idle slots on the other machine
        let job = vec![DeadlineJob { id: "a".into(), size: 2, release: 1, deadline: 2 }];
        let inst = DeadlineInstance::new(2, 1, vec![vec![true; 2]; 2], job, &[], None).unwrap();
        let tr = edf_ect(&inst);
        let rep = idle_audit(&tr, &inst, DeadlineMode::NoDelay).unwrap();
        assert!(rep.is_clean());
        let other = rep.checks;
        assert!(other > 0);
        let idle_other = (1..=2).filter(|&t| !tr.busy(2, t)).count();
        assert_eq!(idle_other, tr.jobs[0].scheduled);
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let inst = DeadlineInstance::new(2, 1, vec![vec![true; 2]], vec![], &[], None).unwrap();
        let tr = edf_ect(&inst);
        assert!(matches!(idle_audit(&tr, &inst, DeadlineMode::Comm), Err(DeadlineError::TraceMismatch(_))));
    }
}
