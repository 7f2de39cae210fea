//! Schedules of unit tasks on (machine, slot) pairs, validity checks for
//! both problem variants, and reinsertion of discarded tasks.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Instance, TaskRef};
use crate::rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("task {0:?} is not part of the instance")]
    UnknownTask(TaskRef),
    #[error("unknown job id {0:?}")]
    UnknownJob(String),
    #[error("task {task:?} placed at machine {machine}, slot {slot} outside [1,{machines}] x [1,{horizon}]")]
    OutOfRange { task: TaskRef, machine: usize, slot: usize, machines: usize, horizon: usize },
    #[error("task {0:?} is both assigned and discarded")]
    AssignedAndDiscarded(TaskRef),
    #[error("malformed schedule json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    NoDelay,
    Delay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Placement {
    pub machine: usize,
    pub slot: usize,
}

impl Placement {
    pub fn new(machine: usize, slot: usize) -> Self {
        Placement { machine, slot }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schedule {
    pub horizon: usize,
    pub assignment: BTreeMap<TaskRef, Placement>,
    pub discarded: BTreeSet<TaskRef>,
}

impl Schedule {
    pub fn new(horizon: usize) -> Self {
        Schedule { horizon, ..Default::default() }
    }

    /// Assigns a task, growing the horizon if needed.
    pub fn assign(&mut self, t: TaskRef, machine: usize, slot: usize) {
        self.discarded.remove(&t);
        self.assignment.insert(t, Placement::new(machine, slot));
        self.horizon = self.horizon.max(slot);
    }

    pub fn discard(&mut self, t: TaskRef) {
        self.assignment.remove(&t);
        self.discarded.insert(t);
    }

    pub fn get(&self, t: TaskRef) -> Option<Placement> {
        self.assignment.get(&t).copied()
    }

    pub fn makespan(&self) -> usize {
        makespan(self)
    }

    /// Every task of the instance is assigned.
    pub fn is_complete(&self, inst: &Instance) -> bool {
        self.assignment.len() == inst.total_tasks() && self.discarded.is_empty()
    }

    /// Union of two schedules over disjoint task sets.
    pub fn merge(&mut self, other: &Schedule) {
        for (&t, &p) in &other.assignment {
            self.assign(t, p.machine, p.slot);
        }
        for &t in &other.discarded {
            self.discard(t);
        }
        self.horizon = self.horizon.max(other.horizon);
    }
}

/// Latest occupied slot; 0 when nothing is assigned.
pub fn makespan(s: &Schedule) -> usize {
    s.assignment.values().map(|p| p.slot).max().unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Capacity,
    Migration,
    Precedence,
    CommDelay,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub tasks: Vec<TaskRef>,
    pub slots: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub mode: Mode,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    pub fn to_json(&self, inst: &Instance) -> String {
        #[derive(Serialize)]
        struct V {
            kind: ViolationKind,
            tasks: Vec<TaskJson>,
            slots: Vec<usize>,
        }
        #[derive(Serialize)]
        struct R {
            mode: Mode,
            valid: bool,
            violations: Vec<V>,
        }
        let r = R {
            mode: self.mode,
            valid: self.is_valid(),
            violations: self
                .violations
                .iter()
                .map(|v| V {
                    kind: v.kind,
                    tasks: v.tasks.iter().map(|&t| TaskJson::of(inst, t)).collect(),
                    slots: v.slots.clone(),
                })
                .collect(),
        };
        rational::to_canonical_json(&r).expect("report serializes")
    }
}

fn check_ranges(s: &Schedule, inst: &Instance) -> Result<(), ScheduleError> {
    for (&t, &p) in &s.assignment {
        if !inst.contains_task(t) {
            return Err(ScheduleError::UnknownTask(t));
        }
        if p.machine == 0 || p.machine > inst.machines() || p.slot == 0 || p.slot > s.horizon {
            return Err(ScheduleError::OutOfRange {
                task: t,
                machine: p.machine,
                slot: p.slot,
                machines: inst.machines(),
                horizon: s.horizon,
            });
        }
        if s.discarded.contains(&t) {
            return Err(ScheduleError::AssignedAndDiscarded(t));
        }
    }
    for &t in &s.discarded {
        if !inst.contains_task(t) {
            return Err(ScheduleError::UnknownTask(t));
        }
    }
    Ok(())
}

/// Checks capacity, no-migration, precedence and (in delay mode) communication
/// delays over the assigned tasks.
pub fn validate(s: &Schedule, inst: &Instance, mode: Mode) -> Result<ValidationReport, ScheduleError> {
    check_ranges(s, inst)?;
    let mut violations = Vec::new();

    let mut cells: BTreeMap<(usize, usize), Vec<TaskRef>> = BTreeMap::new();
    for (&t, &p) in &s.assignment {
        cells.entry((p.machine, p.slot)).or_default().push(t);
    }
    for (&(_, slot), tasks) in &cells {
        if tasks.len() > 1 {
            violations.push(Violation {
                kind: ViolationKind::Capacity,
                tasks: tasks.clone(),
                slots: vec![slot; tasks.len()],
            });
        }
    }

    let n = inst.num_jobs();
    let mut by_job: Vec<Vec<(TaskRef, Placement)>> = vec![Vec::new(); n];
    for (&t, &p) in &s.assignment {
        by_job[t.job].push((t, p));
    }

    for placed in &by_job {
        let machines: BTreeSet<usize> = placed.iter().map(|(_, p)| p.machine).collect();
        if machines.len() > 1 {
            violations.push(Violation {
                kind: ViolationKind::Migration,
                tasks: placed.iter().map(|(t, _)| *t).collect(),
                slots: placed.iter().map(|(_, p)| p.slot).collect(),
            });
        }
    }

    for placed in &by_job {
        for (i, (a, pa)) in placed.iter().enumerate() {
            for (b, pb) in &placed[i + 1..] {
                if pa.slot >= pb.slot {
                    violations.push(Violation {
                        kind: ViolationKind::Precedence,
                        tasks: vec![*a, *b],
                        slots: vec![pa.slot, pb.slot],
                    });
                }
            }
        }
    }
    for (j, k) in inst.precedence().pairs() {
        for (a, pa) in &by_job[j] {
            for (b, pb) in &by_job[k] {
                if pa.slot >= pb.slot {
                    violations.push(Violation {
                        kind: ViolationKind::Precedence,
                        tasks: vec![*a, *b],
                        slots: vec![pa.slot, pb.slot],
                    });
                }
            }
        }
    }

    if mode == Mode::Delay {
        for (j, k) in inst.precedence().pairs() {
            let last = TaskRef::new(j, inst.size(j));
            let first = TaskRef::new(k, 1);
            if let (Some(pl), Some(pf)) = (s.get(last), s.get(first)) {
                let c = inst.delay(j, k).unwrap_or(0) as usize;
                if pl.machine != pf.machine && pf.slot <= pl.slot + c {
                    violations.push(Violation {
                        kind: ViolationKind::CommDelay,
                        tasks: vec![last, first],
                        slots: vec![pl.slot, pf.slot],
                    });
                }
            }
        }
    }

    Ok(ValidationReport { mode, violations })
}

/// Gives every discarded task private slots: one in no-delay mode, 2β+1 in
/// delay mode with the task in the middle. Each block opens at the earliest
/// slot after all assigned predecessors and pushes later slots right.
pub fn reinsert_discarded(s: &Schedule, inst: &Instance, mode: Mode) -> Schedule {
    let beta = inst.beta() as usize;
    let (width, offset) = match mode {
        Mode::NoDelay => (1, 0),
        Mode::Delay => (2 * beta + 1, beta),
    };
    let mut out = s.clone();
    let order: Vec<TaskRef> = inst.task_topological().into_iter().filter(|t| s.discarded.contains(t)).collect();
    for a in order {
        let t = out
            .assignment
            .iter()
            .filter(|(b, _)| inst.task_precedes(**b, a))
            .map(|(_, p)| p.slot)
            .max()
            .unwrap_or(0)
            + 1;
        for p in out.assignment.values_mut() {
            if p.slot >= t {
                p.slot += width;
            }
        }
        let machine = inst
            .tasks_of(a.job)
            .filter_map(|b| out.assignment.get(&b))
            .map(|p| p.machine)
            .next()
            .unwrap_or(1);
        out.discarded.remove(&a);
        out.assignment.insert(a, Placement::new(machine, t + offset));
        out.horizon += width;
    }
    out.horizon = out.horizon.max(makespan(&out));
    out
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TaskJson {
    pub job: String,
    pub index: u32,
}

impl TaskJson {
    pub fn of(inst: &Instance, t: TaskRef) -> Self {
        TaskJson { job: inst.id(t.job).to_string(), index: t.index }
    }

    pub fn resolve(&self, inst: &Instance) -> Result<TaskRef, ScheduleError> {
        let j = inst.job_index(&self.job).ok_or_else(|| ScheduleError::UnknownJob(self.job.clone()))?;
        let t = TaskRef::new(j, self.index);
        if !inst.contains_task(t) {
            return Err(ScheduleError::UnknownTask(t));
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AssignmentJson {
    job: String,
    index: u32,
    machine: usize,
    slot: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScheduleFile {
    horizon: usize,
    #[serde(default)]
    assignments: Vec<AssignmentJson>,
    #[serde(default)]
    discarded: Vec<TaskJson>,
}

impl Schedule {
    pub fn to_json(&self, inst: &Instance) -> String {
        let f = ScheduleFile {
            horizon: self.horizon,
            assignments: self
                .assignment
                .iter()
                .map(|(t, p)| AssignmentJson {
                    job: inst.id(t.job).to_string(),
                    index: t.index,
                    machine: p.machine,
                    slot: p.slot,
                })
                .collect(),
            discarded: self.discarded.iter().map(|&t| TaskJson::of(inst, t)).collect(),
        };
        rational::to_canonical_json(&f).expect("schedule serializes")
    }

    pub fn from_json(s: &str, inst: &Instance) -> Result<Self, ScheduleError> {
        let f: ScheduleFile = serde_json::from_str(s).map_err(|e| ScheduleError::Json(e.to_string()))?;
        let mut out = Schedule::new(f.horizon);
        for a in f.assignments {
            let t = TaskJson { job: a.job, index: a.index }.resolve(inst)?;
            out.assignment.insert(t, Placement::new(a.machine, a.slot));
        }
        for d in f.discarded {
            out.discarded.insert(d.resolve(inst)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Job;

    fn fig3() -> Instance {
        Instance::new(2, vec![Job::new("a", 2), Job::new("b", 2), Job::new("c", 2)], &[], 0, &[]).unwrap()
    }

    #[test]
    fn migratory_optimum_has_one_migration() {
        let inst = fig3();
        let mut s = Schedule::new(3);
        s.assign(TaskRef::new(0, 1), 1, 1);
        s.assign(TaskRef::new(0, 2), 1, 2);
        s.assign(TaskRef::new(1, 1), 2, 1);
        s.assign(TaskRef::new(1, 2), 1, 3);
        s.assign(TaskRef::new(2, 1), 2, 2);
        s.assign(TaskRef::new(2, 2), 2, 3);
        let r = validate(&s, &inst, Mode::NoDelay).unwrap();
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.count(ViolationKind::Migration), 1);
        assert_eq!(r.violations[0].tasks[0].job, 1);
    }

    #[test]
    fn empty_is_valid() {
        let inst = fig3();
        assert!(validate(&Schedule::new(0), &inst, Mode::Delay).unwrap().is_valid());
        assert_eq!(makespan(&Schedule::new(0)), 0);
    }

    #[test]
    fn same_slot_precedence() {
        let inst = Instance::new(2, vec![Job::new("a", 1), Job::new("b", 1)], &[("a".into(), "b".into())], 0, &[])
            .unwrap();
        let mut s = Schedule::new(1);
        s.assign(TaskRef::new(0, 1), 1, 1);
        s.assign(TaskRef::new(1, 1), 2, 1);
        let r = validate(&s, &inst, Mode::NoDelay).unwrap();
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].kind, ViolationKind::Precedence);
    }

    #[test]
    fn unknown_task_is_error() {
        let inst = fig3();
        let mut s = Schedule::new(2);
        s.assign(TaskRef::new(0, 3), 1, 1);
        assert!(matches!(validate(&s, &inst, Mode::NoDelay), Err(ScheduleError::UnknownTask(_))));
    }

    #[test]
    fn reinsert_counts() {
        let inst = Instance::new(
            2,
            vec![Job::new("a", 1), Job::new("b", 1), Job::new("c", 1)],
            &[("a".into(), "b".into()), ("b".into(), "c".into())],
            1,
            &[],
        )
        .unwrap();
        let mut s = Schedule::new(3);
        s.assign(TaskRef::new(0, 1), 1, 1);
        s.discard(TaskRef::new(1, 1));
        s.assign(TaskRef::new(2, 1), 2, 3);
        let r = reinsert_discarded(&s, &inst, Mode::NoDelay);
        assert_eq!(makespan(&r), makespan(&s) + 1);
        assert!(validate(&r, &inst, Mode::NoDelay).unwrap().is_valid());
        let r = reinsert_discarded(&s, &inst, Mode::Delay);
        assert_eq!(makespan(&r), makespan(&s) + 3);
        assert!(validate(&r, &inst, Mode::Delay).unwrap().is_valid());
        let none = reinsert_discarded(&r, &inst, Mode::Delay);
        assert_eq!(none, r);
    }

    #[test]
    fn json_round_trip() {
        let inst = fig3();
        let mut s = Schedule::new(4);
        s.assign(TaskRef::new(0, 1), 1, 1);
        s.assign(TaskRef::new(0, 2), 1, 2);
        s.discard(TaskRef::new(2, 1));
        let text = s.to_json(&inst);
        let back = Schedule::from_json(&text, &inst).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json(&inst), text);
    }
}
