//! Exact optimal makespan by two independent searches.
//!
//! `slot_dfs` decides, slot by slot, which job runs on each machine.
//! `sequence_dfs` fixes the order in which tasks (or whole jobs) start and
//! places each one greedily at its earliest feasible slot; ordering the tasks
//! of any optimal schedule by start time and replaying it greedily never
//! delays a task, so the search is exact.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::list_sched::{graham_list, graham_list_comm};
use crate::model::{Instance, TaskRef};
use crate::schedule::{makespan, Schedule};

use super::{OracleCaps, OracleError, OracleResult};

/// A: migratory preemptive, B: non-migratory preemptive, C: non-preemptive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Model {
    A,
    B,
    C,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::A, Model::B, Model::C];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    SlotDfs,
    SequenceDfs,
}

pub fn opt_makespan(inst: &Instance, model: Model, with_delays: bool) -> Result<OracleResult, OracleError> {
    opt_makespan_with(inst, model, with_delays, Strategy::SlotDfs, &OracleCaps::default())
}

pub fn opt_makespan_with(
    inst: &Instance,
    model: Model,
    with_delays: bool,
    strategy: Strategy,
    caps: &OracleCaps,
) -> Result<OracleResult, OracleError> {
    let n_tasks = inst.total_tasks();
    if n_tasks > caps.max_tasks {
        return Err(OracleError::CapExceeded(format!("N = {n_tasks} > {}", caps.max_tasks)));
    }
    if inst.machines() > caps.max_machines {
        return Err(OracleError::CapExceeded(format!("m = {} > {}", inst.machines(), caps.max_machines)));
    }
    if n_tasks == 0 {
        return Ok(OracleResult { value: 0, witness: Schedule::new(0), nodes: 0 });
    }
    let upper = if with_delays && inst.beta() > 0 {
        graham_list_comm(inst, None).expect("default order")
    } else {
        graham_list(inst, None).expect("default order")
    };
    let ub = makespan(&upper);
    if strategy == Strategy::SequenceDfs && ub >= 64 {
        return Err(OracleError::CapExceeded(format!("horizon {ub} >= 64 for sequence search")));
    }
    let m = inst.machines();
    let lb = n_tasks.div_ceil(m).max(inst.max_chain_all() as usize);
    let mut nodes = 0;
    for t in lb..ub {
        let found = match strategy {
            Strategy::SlotDfs => {
                let mut s = SlotSearch::new(inst, model, with_delays, t);
                let r = s.run();
                nodes += s.nodes;
                r
            }
            Strategy::SequenceDfs => {
                let mut s = SeqSearch::new(inst, model, with_delays, t);
                let r = s.run();
                nodes += s.nodes;
                r
            }
        };
        if let Some(w) = found {
            return Ok(OracleResult { value: t, witness: w, nodes });
        }
    }
    let mut witness = upper;
    witness.horizon = ub;
    Ok(OracleResult { value: ub, witness, nodes })
}

/// Feasibility of makespan ≤ `horizon`; returns a witness.
pub fn feasible_at(inst: &Instance, model: Model, with_delays: bool, horizon: usize) -> Option<Schedule> {
    if inst.total_tasks() == 0 {
        return Some(Schedule::new(horizon));
    }
    SlotSearch::new(inst, model, with_delays, horizon).run()
}

/// Collects up to `limit` distinct schedules with makespan ≤ `horizon`,
/// exploring machine and job choices in an order drawn from `seed`.
pub fn sample_feasible(
    inst: &Instance,
    model: Model,
    with_delays: bool,
    horizon: usize,
    limit: usize,
    seed: u64,
) -> Vec<Schedule> {
    let mut out: Vec<Schedule> = Vec::new();
    let mut seen = HashSet::new();
    let mut rng = crate::gen::rng(seed);
    for _ in 0..limit * 4 {
        if out.len() >= limit {
            break;
        }
        let mut s = SlotSearch::new(inst, model, with_delays, horizon);
        s.shuffle = Some(rand::Rng::gen(&mut rng));
        s.no_symmetry = true;
        if let Some(w) = s.run() {
            let key: Vec<_> = w.assignment.iter().map(|(t, p)| (*t, p.machine, p.slot)).collect();
            if seen.insert(key) {
                out.push(w);
            }
        } else {
            break;
        }
    }
    out
}

struct Common {
    n: usize,
    m: usize,
    horizon: usize,
    p: Vec<usize>,
    preds: Vec<Vec<(usize, usize)>>,
    succ_tail: Vec<usize>,
    out_delay: Vec<usize>,
}

impl Common {
    fn new(inst: &Instance, with_delays: bool, horizon: usize) -> Self {
        let n = inst.num_jobs();
        let p: Vec<usize> = (0..n).map(|j| inst.size(j) as usize).collect();
        let preds: Vec<Vec<(usize, usize)>> = (0..n)
            .map(|j| {
                inst.precedence()
                    .predecessors(j)
                    .map(|q| (q, if with_delays { inst.delay(q, j).unwrap_or(0) as usize } else { 0 }))
                    .collect()
            })
            .collect();
        let mut tail = vec![0usize; n];
        let mut succ_tail = vec![0usize; n];
        for &j in inst.precedence().topological().iter().rev() {
            let st = inst.precedence().successors(j).map(|s| tail[s]).max().unwrap_or(0);
            succ_tail[j] = st;
            tail[j] = p[j] + st;
        }
        let out_delay = (0..n)
            .map(|j| {
                if !with_delays {
                    return 0;
                }
                inst.precedence().successors(j).map(|s| inst.delay(j, s).unwrap_or(0) as usize).max().unwrap_or(0)
            })
            .collect();
        Common { n, m: inst.machines(), horizon, p, preds, succ_tail, out_delay }
    }
}

struct SlotSearch {
    c: Common,
    model: Model,
    delays: bool,
    done: Vec<usize>,
    mach: Vec<usize>,
    comp: Vec<usize>,
    used: Vec<bool>,
    busy_now: Vec<bool>,
    trail: Vec<(usize, usize, usize, u32)>,
    failed: HashSet<Vec<u32>>,
    nodes: u64,
    shuffle: Option<u64>,
    no_symmetry: bool,
}

impl SlotSearch {
    fn new(inst: &Instance, model: Model, delays: bool, horizon: usize) -> Self {
        let c = Common::new(inst, delays, horizon);
        let n = c.n;
        let m = c.m;
        SlotSearch {
            c,
            model,
            delays,
            done: vec![0; n],
            mach: vec![0; n],
            comp: vec![0; n],
            used: vec![false; m + 1],
            busy_now: vec![false; n],
            trail: Vec::new(),
            failed: HashSet::new(),
            nodes: 0,
            shuffle: None,
            no_symmetry: false,
        }
    }

    fn run(&mut self) -> Option<Schedule> {
        if self.search(1) {
            let mut s = Schedule::new(self.c.horizon);
            for &(j, i, t, k) in &self.trail {
                s.assign(TaskRef::new(j, k), i, t);
            }
            s.horizon = self.c.horizon;
            Some(s)
        } else {
            None
        }
    }

    fn key(&self, t: usize) -> Vec<u32> {
        let mut k = Vec::with_capacity(3 * self.c.n + self.c.m + 1);
        k.push(t as u32);
        for j in 0..self.c.n {
            k.push(self.done[j] as u32);
            let finished = self.done[j] == self.c.p[j];
            let mach = match self.model {
                Model::A => {
                    if finished && self.delays {
                        self.mach[j]
                    } else {
                        0
                    }
                }
                _ => self.mach[j],
            };
            k.push(mach as u32);
            let resid = if finished && self.delays {
                (self.comp[j] + self.c.out_delay[j]).saturating_sub(t - 1)
            } else {
                0
            };
            k.push(resid as u32);
        }
        for i in 1..=self.c.m {
            k.push(self.used[i] as u32);
        }
        k
    }

    fn search(&mut self, t: usize) -> bool {
        self.nodes += 1;
        let remaining: usize = (0..self.c.n).map(|j| self.c.p[j] - self.done[j]).sum();
        if remaining == 0 {
            return true;
        }
        if t > self.c.horizon {
            return false;
        }
        let slots_left = self.c.horizon - t + 1;
        if remaining > self.c.m * slots_left {
            return false;
        }
        for j in 0..self.c.n {
            if self.done[j] < self.c.p[j] && self.c.p[j] - self.done[j] + self.c.succ_tail[j] > slots_left {
                return false;
            }
        }
        let key = self.key(t);
        if self.failed.contains(&key) {
            return false;
        }
        let mut chosen = Vec::new();
        if self.assign_machine(t, 1, None, false, &mut chosen) {
            return true;
        }
        self.failed.insert(key);
        false
    }

    fn eligible(&self, j: usize, i: usize, t: usize) -> bool {
        if self.done[j] >= self.c.p[j] || self.busy_now[j] {
            return false;
        }
        for &(q, c) in &self.c.preds[j] {
            if self.done[q] < self.c.p[q] || self.comp[q] >= t {
                return false;
            }
            if self.done[j] == 0 && c > 0 && self.mach[q] != i && t <= self.comp[q] + c {
                return false;
            }
        }
        match self.model {
            Model::A => true,
            Model::B | Model::C => self.mach[j] == 0 || self.mach[j] == i,
        }
    }

    fn symmetric(&self, i: usize) -> bool {
        if self.no_symmetry {
            return false;
        }
        (self.model == Model::A && !self.delays) || !self.used[i]
    }

    fn forced_on(&self, i: usize) -> Option<usize> {
        if self.model != Model::C {
            return None;
        }
        (0..self.c.n).find(|&j| self.mach[j] == i && self.done[j] > 0 && self.done[j] < self.c.p[j])
    }

    fn candidate_order(&self, t: usize, i: usize) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.c.n).collect();
        if let Some(seed) = self.shuffle {
            let mut r = crate::gen::rng(seed ^ ((t as u64) << 20) ^ (i as u64));
            rand::seq::SliceRandom::shuffle(&mut v[..], &mut r);
        }
        v
    }

    fn assign_machine(
        &mut self,
        t: usize,
        i: usize,
        prev_sym: Option<usize>,
        sym_idle: bool,
        chosen: &mut Vec<(usize, usize)>,
    ) -> bool {
        if i > self.c.m {
            return self.descend(t, chosen);
        }
        if let Some(j) = self.forced_on(i) {
            if !self.eligible(j, i, t) {
                return false;
            }
            return self.try_job(t, i, j, prev_sym, sym_idle, chosen, false);
        }
        let sym = self.symmetric(i);
        let idle_first = self.shuffle.map(|s| (s >> (t % 60)) & 1 == 1).unwrap_or(false);
        if idle_first && self.assign_machine(t, i + 1, prev_sym, sym_idle || sym, chosen) {
            return true;
        }
        if !(sym && sym_idle) {
            for j in self.candidate_order(t, i) {
                if sym {
                    if let Some(pj) = prev_sym {
                        if j <= pj {
                            continue;
                        }
                    }
                }
                if !self.eligible(j, i, t) {
                    continue;
                }
                if self.try_job(t, i, j, prev_sym, sym_idle, chosen, sym) {
                    return true;
                }
            }
        }
        if !idle_first && self.assign_machine(t, i + 1, prev_sym, sym_idle || sym, chosen) {
            return true;
        }
        false
    }

    #[allow(clippy::too_many_arguments)]
    fn try_job(
        &mut self,
        t: usize,
        i: usize,
        j: usize,
        prev_sym: Option<usize>,
        sym_idle: bool,
        chosen: &mut Vec<(usize, usize)>,
        sym: bool,
    ) -> bool {
        self.busy_now[j] = true;
        chosen.push((j, i));
        let next_prev = if sym { Some(j) } else { prev_sym };
        let ok = self.assign_machine(t, i + 1, next_prev, sym_idle, chosen);
        chosen.pop();
        self.busy_now[j] = false;
        ok
    }

    fn descend(&mut self, t: usize, chosen: &[(usize, usize)]) -> bool {
        let mut saved = Vec::with_capacity(chosen.len());
        for &(j, i) in chosen {
            saved.push((j, self.mach[j], self.comp[j], self.used[i]));
            self.done[j] += 1;
            self.mach[j] = i;
            self.used[i] = true;
            if self.done[j] == self.c.p[j] {
                self.comp[j] = t;
            }
            self.trail.push((j, i, t, self.done[j] as u32));
            self.busy_now[j] = false;
        }
        let ok = self.search(t + 1);
        for &(j, _) in chosen {
            self.busy_now[j] = true;
        }
        if !ok {
            for (k, &(j, i)) in chosen.iter().enumerate().rev() {
                let (_, mach, comp, used) = saved[k];
                self.done[j] -= 1;
                self.mach[j] = mach;
                self.comp[j] = comp;
                self.used[i] = used;
                self.trail.pop();
            }
        }
        ok
    }
}

struct SeqSearch {
    c: Common,
    model: Model,
    delays: bool,
    done: Vec<usize>,
    mach: Vec<usize>,
    last_slot: Vec<usize>,
    occ: Vec<u64>,
    trail: Vec<(usize, usize, usize, u32)>,
    failed: HashSet<Vec<u64>>,
    nodes: u64,
}

impl SeqSearch {
    fn new(inst: &Instance, model: Model, delays: bool, horizon: usize) -> Self {
        let c = Common::new(inst, delays, horizon);
        assert!(horizon < 64, "sequence search supports horizons below 64");
        let n = c.n;
        let m = c.m;
        SeqSearch {
            c,
            model,
            delays,
            done: vec![0; n],
            mach: vec![0; n],
            last_slot: vec![0; n],
            occ: vec![0; m + 1],
            trail: Vec::new(),
            failed: HashSet::new(),
            nodes: 0,
        }
    }

    fn run(&mut self) -> Option<Schedule> {
        if self.search(1) {
            let mut s = Schedule::new(self.c.horizon);
            for &(j, i, t, k) in &self.trail {
                s.assign(TaskRef::new(j, k), i, t);
            }
            s.horizon = self.c.horizon;
            Some(s)
        } else {
            None
        }
    }

    fn key(&self, prev: usize) -> Vec<u64> {
        let mut k = vec![prev as u64];
        for j in 0..self.c.n {
            k.push(((self.done[j] as u64) << 40) | ((self.mach[j] as u64) << 20) | self.last_slot[j] as u64);
        }
        k.extend(self.occ.iter().copied());
        k
    }

    fn free(&self, i: usize, s: usize) -> bool {
        self.occ[i] & (1u64 << s) == 0
    }

    fn search(&mut self, prev: usize) -> bool {
        self.nodes += 1;
        if (0..self.c.n).all(|j| self.done[j] == self.c.p[j]) {
            return true;
        }
        for j in 0..self.c.n {
            if self.done[j] < self.c.p[j] {
                let ready = if self.done[j] > 0 { self.last_slot[j] + 1 } else { prev.max(1) };
                if ready.max(prev) + (self.c.p[j] - self.done[j]) - 1 + self.c.succ_tail[j] > self.c.horizon {
                    return false;
                }
            }
        }
        let key = self.key(prev);
        if self.failed.contains(&key) {
            return false;
        }
        for j in 0..self.c.n {
            if self.done[j] == self.c.p[j] {
                continue;
            }
            if self.model == Model::C && self.done[j] > 0 {
                continue;
            }
            if self.done[j] == 0 && self.c.preds[j].iter().any(|&(q, _)| self.done[q] < self.c.p[q]) {
                continue;
            }
            let machines: Vec<usize> = match self.model {
                Model::B if self.done[j] > 0 => vec![self.mach[j]],
                _ => {
                    let mut v = Vec::new();
                    let mut fresh_taken = false;
                    for i in 1..=self.c.m {
                        let fresh = self.occ[i] == 0;
                        if fresh {
                            if fresh_taken {
                                continue;
                            }
                            fresh_taken = true;
                        }
                        v.push(i);
                    }
                    v
                }
            };
            for i in machines {
                if self.place(j, i, prev) {
                    return true;
                }
            }
        }
        self.failed.insert(key);
        false
    }

    fn ready(&self, j: usize, i: usize) -> usize {
        if self.done[j] > 0 {
            return self.last_slot[j] + 1;
        }
        let mut r = 1;
        for &(q, c) in &self.c.preds[j] {
            let extra = if self.delays && self.mach[q] != i { c } else { 0 };
            r = r.max(self.last_slot[q] + 1 + extra);
        }
        r
    }

    fn place(&mut self, j: usize, i: usize, prev: usize) -> bool {
        let start_min = self.ready(j, i).max(prev).max(1);
        let len = if self.model == Model::C { self.c.p[j] } else { 1 };
        let mut s = start_min;
        while s + len - 1 <= self.c.horizon {
            if (s..s + len).all(|x| self.free(i, x)) {
                break;
            }
            s += 1;
        }
        if s + len - 1 > self.c.horizon {
            return false;
        }
        let saved = (self.done[j], self.mach[j], self.last_slot[j], self.occ[i]);
        for k in 0..len {
            self.occ[i] |= 1u64 << (s + k);
            self.done[j] += 1;
            self.trail.push((j, i, s + k, self.done[j] as u32));
        }
        self.mach[j] = i;
        self.last_slot[j] = s + len - 1;
        if self.search(s) {
            return true;
        }
        for _ in 0..len {
            self.trail.pop();
        }
        (self.done[j], self.mach[j], self.last_slot[j], self.occ[i]) = saved;
        false
    }
}
