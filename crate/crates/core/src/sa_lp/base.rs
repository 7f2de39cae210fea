//! The time-indexed scheduling LP over events (task, machine, slot).

use num_traits::One;

use crate::model::{Instance, TaskRef};
use crate::rational::{int, Rational};

use super::lp::{Event, LinearProgram, Relation, VarLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaseLpOptions {
    /// Machine-marginal equalities between sibling tasks.
    pub no_migration: bool,
    /// Communication-delay rows for every precedence pair with a positive delay.
    pub comm: bool,
    /// Prefix rows for every task pair in the precedence closure instead of
    /// only the covering pairs.
    pub full_precedence: bool,
}

impl Default for BaseLpOptions {
    fn default() -> Self {
        BaseLpOptions { no_migration: true, comm: false, full_precedence: false }
    }
}

/// Base LP with its event indexing.
#[derive(Debug, Clone)]
pub struct BaseLp {
    pub lp: LinearProgram,
    pub machines: usize,
    pub horizon: usize,
    pub tasks: Vec<TaskRef>,
}

impl BaseLp {
    pub fn var(&self, inst: &Instance, e: Event) -> usize {
        (inst.task_index(e.task) * self.machines + e.machine - 1) * self.horizon + e.slot - 1
    }

    pub fn event(&self, inst: &Instance, v: usize) -> Event {
        let slot = v % self.horizon + 1;
        let rest = v / self.horizon;
        let machine = rest % self.machines + 1;
        Event { task: inst.task_at(rest / self.machines), machine, slot }
    }

    pub fn num_events(&self) -> usize {
        self.lp.num_vars()
    }
}

pub fn build_base_lp(inst: &Instance, horizon: usize, with_comm: bool) -> BaseLp {
    build_base_lp_with(inst, horizon, &BaseLpOptions { comm: with_comm, ..BaseLpOptions::default() })
}

pub fn build_base_lp_with(inst: &Instance, horizon: usize, opts: &BaseLpOptions) -> BaseLp {
    let m = inst.machines();
    let tasks: Vec<TaskRef> = inst.tasks().collect();
    let mut lp = LinearProgram::new();
    for &task in &tasks {
        for machine in 1..=m {
            for slot in 1..=horizon {
                lp.add_var(VarLabel::Event(Event { task, machine, slot }));
            }
        }
    }
    let base = BaseLp { lp: LinearProgram::new(), machines: m, horizon, tasks: tasks.clone() };
    let v = |task: TaskRef, machine: usize, slot: usize| base.var(inst, Event { task, machine, slot });
    let one = Rational::one;

    for &a in &tasks {
        let row = (1..=m).flat_map(|i| (1..=horizon).map(move |t| (i, t))).map(|(i, t)| (v(a, i, t), one())).collect();
        lp.add_row(row, Relation::Eq, one(), "assign").expect("declared");
    }
    for i in 1..=m {
        for t in 1..=horizon {
            let row = tasks.iter().map(|&a| (v(a, i, t), one())).collect();
            lp.add_row(row, Relation::Le, one(), "capacity").expect("declared");
        }
    }

    let mut pairs: Vec<(TaskRef, TaskRef)> = Vec::new();
    if opts.full_precedence {
        for &a in &tasks {
            for &b in &tasks {
                if inst.task_precedes(a, b) {
                    pairs.push((a, b));
                }
            }
        }
    } else {
        for j in 0..inst.num_jobs() {
            for k in 1..inst.size(j) {
                pairs.push((TaskRef::new(j, k), TaskRef::new(j, k + 1)));
            }
        }
        for (j, k) in inst.precedence().reduction() {
            pairs.push((TaskRef::new(j, inst.size(j)), TaskRef::new(k, 1)));
        }
    }
    // prefix of a' up to t+1 is at most prefix of a up to t, for t = 0..T-1
    for &(a, b) in &pairs {
        for t in 0..horizon {
            let mut row = Vec::new();
            for i in 1..=m {
                for s in 1..=(t + 1).min(horizon) {
                    row.push((v(b, i, s), one()));
                }
                for s in 1..=t {
                    row.push((v(a, i, s), -one()));
                }
            }
            lp.add_row(row, Relation::Le, int(0), "precedence").expect("declared");
        }
    }

    if opts.no_migration {
        for j in 0..inst.num_jobs() {
            let p = inst.size(j);
            for k in 1..=p {
                for l in k + 1..=p {
                    let (a, b) = (TaskRef::new(j, k), TaskRef::new(j, l));
                    for i in 1..=m {
                        let mut row: Vec<(usize, Rational)> = (1..=horizon).map(|t| (v(b, i, t), one())).collect();
                        row.extend((1..=horizon).map(|t| (v(a, i, t), -one())));
                        lp.add_row(row, Relation::Eq, int(0), "no_migration").expect("declared");
                    }
                }
            }
        }
    }

    if opts.comm {
        for (j, k) in inst.precedence().pairs() {
            let c = inst.delay(j, k).unwrap_or(0) as usize;
            if c == 0 {
                continue;
            }
            let last = TaskRef::new(j, inst.size(j));
            let first = TaskRef::new(k, 1);
            for i in 1..=m {
                for t in 1..horizon {
                    let mut row = vec![(v(first, i, t + 1), one())];
                    for i2 in (1..=m).filter(|&x| x != i) {
                        for s in (t + 1).saturating_sub(c).max(1)..=t {
                            row.push((v(last, i2, s), one()));
                        }
                    }
                    lp.add_row(row, Relation::Le, one(), "comm").expect("declared");
                }
            }
        }
    }
    BaseLp { lp, ..base }
}
