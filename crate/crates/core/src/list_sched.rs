//! Greedy non-idling list scheduling, with and without communication delays.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{Instance, TaskRef};
use crate::schedule::Schedule;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ListError {
    #[error("priority order is not a permutation of the jobs")]
    NotAPermutation,
    #[error("priority order places {later:?} before its predecessor {earlier:?}")]
    InvalidOrder { earlier: String, later: String },
    #[error("job {0} pinned to machine {1} which does not exist")]
    BadPin(String, usize),
}

/// Options for the greedy engine. `pins` forces a job onto a machine.
#[derive(Debug, Clone, Default)]
pub struct ListOptions {
    pub order: Option<Vec<usize>>,
    pub pins: BTreeMap<usize, usize>,
}

fn checked_order(inst: &Instance, order: Option<&[usize]>) -> Result<Vec<usize>, ListError> {
    let n = inst.num_jobs();
    let order: Vec<usize> = match order {
        Some(o) => o.to_vec(),
        None => return Ok(inst.precedence().topological().to_vec()),
    };
    let mut pos = vec![usize::MAX; n];
    if order.len() != n {
        return Err(ListError::NotAPermutation);
    }
    for (i, &j) in order.iter().enumerate() {
        if j >= n || pos[j] != usize::MAX {
            return Err(ListError::NotAPermutation);
        }
        pos[j] = i;
    }
    for (a, b) in inst.precedence().pairs() {
        if pos[a] > pos[b] {
            return Err(ListError::InvalidOrder { earlier: inst.id(a).into(), later: inst.id(b).into() });
        }
    }
    Ok(order)
}

/// Non-preemptive, non-migratory greedy schedule; precedence only.
pub fn graham_list(inst: &Instance, order: Option<&[usize]>) -> Result<Schedule, ListError> {
    let order = checked_order(inst, order)?;
    run(inst, &order, false, &BTreeMap::new())
}

/// Greedy schedule honouring communication delays; machine choice minimizes
/// the start slot, ties to the lowest machine.
pub fn graham_list_comm(inst: &Instance, order: Option<&[usize]>) -> Result<Schedule, ListError> {
    let order = checked_order(inst, order)?;
    run(inst, &order, true, &BTreeMap::new())
}

pub fn graham_list_with(inst: &Instance, opts: &ListOptions, with_delays: bool) -> Result<Schedule, ListError> {
    let order = checked_order(inst, opts.order.as_deref())?;
    for (&j, &m) in &opts.pins {
        if m == 0 || m > inst.machines() {
            return Err(ListError::BadPin(inst.id(j).into(), m));
        }
    }
    run(inst, &order, with_delays, &opts.pins)
}

fn run(inst: &Instance, order: &[usize], with_delays: bool, pins: &BTreeMap<usize, usize>) -> Result<Schedule, ListError> {
    let n = inst.num_jobs();
    let m = inst.machines();
    let mut completion = vec![0usize; n];
    let mut machine_of = vec![0usize; n];
    let mut started = vec![false; n];
    let mut busy_until = vec![0usize; m + 1];
    let mut sched = Schedule::new(0);
    let mut remaining = n;
    let mut t = 0;
    while remaining > 0 {
        t += 1;
        for &j in order {
            if started[j] {
                continue;
            }
            let preds_done = inst
                .precedence()
                .predecessors(j)
                .all(|p| started[p] && completion[p] < t);
            if !preds_done {
                continue;
            }
            let fits = |i: usize| {
                if busy_until[i] >= t {
                    return false;
                }
                if let Some(&pin) = pins.get(&j) {
                    if pin != i {
                        return false;
                    }
                }
                if with_delays {
                    for p in inst.precedence().predecessors(j) {
                        let c = inst.delay(p, j).unwrap_or(0) as usize;
                        if machine_of[p] != i && t <= completion[p] + c {
                            return false;
                        }
                    }
                }
                true
            };
            if let Some(i) = (1..=m).find(|&i| fits(i)) {
                let p = inst.size(j) as usize;
                started[j] = true;
                machine_of[j] = i;
                completion[j] = t + p - 1;
                busy_until[i] = completion[j];
                for k in 0..p {
                    sched.assign(TaskRef::new(j, k as u32 + 1), i, t + k);
                }
                remaining -= 1;
            }
        }
    }
    Ok(sched)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Job;
    use crate::schedule::{makespan, validate, Mode};

    #[test]
    fn empty_and_packing() {
        let inst = Instance::new(2, vec![], &[], 0, &[]).unwrap();
        assert_eq!(makespan(&graham_list(&inst, None).unwrap()), 0);
        let jobs = (0..4).map(|i| Job::new(format!("j{i}"), 1)).collect();
        let inst = Instance::new(2, jobs, &[], 0, &[]).unwrap();
        assert_eq!(makespan(&graham_list(&inst, None).unwrap()), 2);
    }

    fn pair(c: u32) -> Instance {
        Instance::new(2, vec![Job::new("a", 1), Job::new("b", 1)], &[("a".into(), "b".into())], c, &[]).unwrap()
    }

    #[test]
    fn comm_prefers_same_machine() {
        let inst = pair(1);
        let s = graham_list_comm(&inst, None).unwrap();
        assert_eq!(makespan(&s), 2);
        assert_eq!(s.get(TaskRef::new(0, 1)).unwrap().machine, s.get(TaskRef::new(1, 1)).unwrap().machine);
        assert!(validate(&s, &inst, Mode::Delay).unwrap().is_valid());
        let opts = ListOptions { order: None, pins: [(0, 1), (1, 2)].into_iter().collect() };
        let s = graham_list_with(&inst, &opts, true).unwrap();
        assert_eq!(makespan(&s), 3);
        assert!(validate(&s, &inst, Mode::Delay).unwrap().is_valid());
    }

    #[test]
    fn invalid_order_rejected() {
        let inst = pair(0);
        assert!(matches!(graham_list(&inst, Some(&[1, 0])), Err(ListError::InvalidOrder { .. })));
        assert!(matches!(graham_list(&inst, Some(&[0])), Err(ListError::NotAPermutation)));
    }
}
