//! One call of the recursive rounding on a partial instance.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::deadline_sched::{edf_ect, edf_ect_comm, DeadlineInstance, DeadlineJob};
use crate::model::{longest_chain, max_chain, Instance, TaskRef};
use crate::rational::{self, int, Rational};
use crate::sa_lp::LiftedSolution;
use crate::schedule::{Mode, Placement, Schedule};

use super::laminar::{IntervalId, LaminarTree};
use super::matching::hopcroft_karp;
use super::{HierarchyError, HierarchyParams};

/// Everything shared by the calls of one run. Event variables are indexed as
/// in the base LP over the padded horizon.
#[derive(Debug, Clone)]
pub struct Context<'a> {
    pub inst: &'a Instance,
    pub tree: LaminarTree,
    pub params: &'a HierarchyParams,
    pub mode: Mode,
    /// Recurse on bottom intervals right to left; the output must not change.
    pub reverse_children: bool,
}

impl<'a> Context<'a> {
    pub fn new(inst: &'a Instance, tree: LaminarTree, params: &'a HierarchyParams, mode: Mode) -> Self {
        Context { inst, tree, params, mode, reverse_children: false }
    }

    pub fn var(&self, task: TaskRef, machine: usize, slot: usize) -> u32 {
        let m = self.inst.machines();
        ((self.inst.task_index(task) * m + machine - 1) * self.tree.horizon() + slot - 1) as u32
    }

    /// `(task, machine, slot)` of a variable.
    pub fn event(&self, v: u32) -> (TaskRef, usize, usize) {
        let h = self.tree.horizon();
        let v = v as usize;
        let rest = v / h;
        let m = self.inst.machines();
        (self.inst.task_at(rest / m), rest % m + 1, v % h + 1)
    }

    /// Delay that the comm rules must respect; zero without delays.
    fn beta(&self) -> usize {
        match self.mode {
            Mode::NoDelay => 0,
            Mode::Delay => self.inst.beta() as usize,
        }
    }
}

/// Positive-mass events `(slot, machine)` of every task, sorted.
#[derive(Debug, Clone)]
pub struct Supports {
    by_task: Vec<Vec<(usize, usize)>>,
}

impl Supports {
    pub fn of(ctx: &Context, x: &LiftedSolution) -> Self {
        let mut by_task = vec![Vec::new(); ctx.inst.total_tasks()];
        for v in x.support() {
            let (t, machine, slot) = ctx.event(v);
            by_task[ctx.inst.task_index(t)].push((slot, machine));
        }
        for s in &mut by_task {
            s.sort_unstable();
        }
        Supports { by_task }
    }

    pub fn task(&self, ctx: &Context, t: TaskRef) -> &[(usize, usize)] {
        &self.by_task[ctx.inst.task_index(t)]
    }

    /// First and last slot carrying mass of any task of `j`.
    pub fn job_span(&self, ctx: &Context, j: usize) -> Option<(usize, usize)> {
        let slots = ctx.inst.tasks_of(j).flat_map(|t| self.task(ctx, t).iter().map(|e| e.0));
        slots.fold(None, |acc, s| match acc {
            None => Some((s, s)),
            Some((lo, hi)) => Some((lo.min(s), hi.max(s))),
        })
    }

    fn has_mass_in(&self, ctx: &Context, t: TaskRef, iv: IntervalId) -> bool {
        self.task(ctx, t).iter().any(|e| ctx.tree.contains(iv, e.0))
    }
}

/// Smallest tree interval containing each job's support.
pub fn ownership(
    ctx: &Context,
    sup: &Supports,
    jobs: &[usize],
    within: IntervalId,
) -> Result<BTreeMap<usize, IntervalId>, HierarchyError> {
    let mut out = BTreeMap::new();
    for &j in jobs {
        let outside = || HierarchyError::SupportOutsideRoot(ctx.inst.id(j).to_string());
        let (lo, hi) = sup.job_span(ctx, j).ok_or_else(outside)?;
        if !ctx.tree.contains(within, lo) || !ctx.tree.contains(within, hi) {
            return Err(outside());
        }
        out.insert(j, ctx.tree.owner(lo, hi));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct PartialInstance {
    pub interval: IntervalId,
    pub jobs: Vec<usize>,
    /// Special jobs and their machines.
    pub special: BTreeMap<usize, usize>,
    pub x: LiftedSolution,
}

impl PartialInstance {
    /// Tasks of the jobs plus the special tasks with mass in the interval.
    pub fn tasks(&self, ctx: &Context, sup: &Supports) -> Vec<TaskRef> {
        let mut out: Vec<TaskRef> = self.jobs.iter().flat_map(|&j| ctx.inst.tasks_of(j)).collect();
        for &j in self.special.keys() {
            out.extend(ctx.inst.tasks_of(j).filter(|&t| sup.has_mass_in(ctx, t, self.interval)));
        }
        out
    }

    /// The structural conditions on a partial instance, apart from the bound
    /// on the number of special jobs.
    pub fn check(&self, ctx: &Context) -> Result<(), String> {
        let sup = Supports::of(ctx, &self.x);
        ownership(ctx, &sup, &self.jobs, self.interval).map_err(|e| e.to_string())?;
        for (&j, &sigma) in &self.special {
            if self.jobs.contains(&j) {
                return Err(format!("job {} is both regular and special", ctx.inst.id(j)));
            }
            for t in ctx.inst.tasks_of(j) {
                let events = sup.task(ctx, t);
                if events.iter().any(|e| e.1 != sigma) {
                    return Err(format!("special job {} has mass off machine {sigma}", ctx.inst.id(j)));
                }
                let inside = events.iter().filter(|e| ctx.tree.contains(self.interval, e.0)).count();
                if inside != 0 && inside != events.len() {
                    return Err(format!("special task {t:?} straddles the interval"));
                }
            }
        }
        Ok(())
    }
}

/// Conditions on `v` unless it already has mass one.
fn condition(x: &mut LiftedSolution, v: u32, used: &mut usize) -> Result<(), HierarchyError> {
    if x.marginal(v).is_one() {
        return Ok(());
    }
    *x = x.condition(v)?;
    *used += 1;
    Ok(())
}

/// Sweeps the intervals `k^2` levels below `within` from left to right and
/// conditions the last task of `j` with mass in each one on its latest slot
/// there. Afterwards each task of `j` lies in a single such interval.
pub fn split_special(
    ctx: &Context,
    x: &LiftedSolution,
    j: usize,
    sigma: usize,
    within: IntervalId,
) -> Result<(LiftedSolution, usize), HierarchyError> {
    let level = (within.level + ctx.params.batch()).min(ctx.tree.depth());
    let mut x = x.clone();
    let mut used = 0;
    for iv in ctx.tree.descendants_at(within, level) {
        let sup = Supports::of(ctx, &x);
        let mut pick = None;
        for t in ctx.inst.tasks_of(j) {
            let last = sup.task(ctx, t).iter().rev().find(|e| e.1 == sigma && ctx.tree.contains(iv, e.0));
            if let Some(&(slot, _)) = last {
                pick = Some((t, slot));
            }
        }
        if let Some((t, slot)) = pick {
            condition(&mut x, ctx.var(t, sigma, slot), &mut used)?;
        }
    }
    Ok((x, used))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CutReport {
    pub iterations: usize,
    pub conditionings: usize,
    /// Longest chain among jobs owned in the first `k^2` levels, on exit.
    pub chain_hat: u64,
    /// `k^2 δ T*`.
    #[serde(with = "rational::serde_str")]
    pub chain_bound: Rational,
    #[serde(with = "rational::serde_str")]
    pub k_bound: Rational,
    pub within_k_bound: bool,
}

/// Conditions away long chains: while some interval in the first `k^2`
/// levels owns a chain of size at least `δ|I|`, fixes the last task of the
/// chain's first job at its latest slot and makes that job special.
pub fn cut_chains(ctx: &Context, partial: PartialInstance) -> Result<(PartialInstance, CutReport), HierarchyError> {
    let mut p = partial;
    let within = p.interval;
    let batch = ctx.params.batch();
    let last_level = (within.level + batch).min(ctx.tree.depth() + 1);
    let (mut iterations, mut used) = (0, 0);
    loop {
        let sup = Supports::of(ctx, &p.x);
        let owners = ownership(ctx, &sup, &p.jobs, within)?;
        let mut found = None;
        'search: for level in within.level..last_level {
            for iv in ctx.tree.descendants_at(within, level) {
                let owned: Vec<usize> = owners.iter().filter(|(_, &o)| o == iv).map(|(&j, _)| j).collect();
                let chain = longest_chain(ctx.inst, &owned);
                let size: u64 = chain.iter().map(|&j| ctx.inst.size(j) as u64).sum();
                if !chain.is_empty() && int(size as i64) >= &ctx.params.delta * int(ctx.tree.len(iv) as i64) {
                    found = Some(chain[0]);
                    break 'search;
                }
            }
        }
        let Some(j) = found else { break };
        let last = TaskRef::new(j, ctx.inst.size(j));
        let events = sup.task(ctx, last);
        let t = events.last().expect("jobs in the instance have mass").0;
        let machine = events.iter().filter(|e| e.0 == t).map(|e| e.1).min().expect("nonempty");
        condition(&mut p.x, ctx.var(last, machine, t), &mut used)?;
        p.jobs.retain(|&q| q != j);
        p.special.insert(j, machine);
        let (x, c) = split_special(ctx, &p.x, j, machine, within)?;
        p.x = x;
        used += c;
        iterations += 1;
    }
    let sup = Supports::of(ctx, &p.x);
    let owners = ownership(ctx, &sup, &p.jobs, within)?;
    let hat: Vec<usize> = owners.iter().filter(|(_, o)| o.level < within.level + batch).map(|(&j, _)| j).collect();
    let k_bound = ctx.params.k_bound(ctx.inst.machines());
    let report = CutReport {
        iterations,
        conditionings: used,
        chain_hat: max_chain(ctx.inst, &hat),
        chain_bound: int(batch as i64) * &ctx.params.delta * int(ctx.tree.len(within) as i64),
        within_k_bound: int(iterations as i64) <= k_bound,
        k_bound,
    };
    Ok((p, report))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelChoice {
    /// Bottom level, relative to the call's interval.
    pub level: u32,
    /// False when no level met the bound and the minimizer was taken.
    pub satisfied: bool,
    pub mid_tasks: u64,
    pub top_tasks: u64,
}

/// Smallest `l* in [k, k^2]` with
/// `|A(mid)| <= (ε/4) T*/log T + (ε/2m)(|A(mid)| + |A(top)|)`, where mid
/// covers levels `l*-k..l*` and top the levels above. `counts[l]` is the
/// number of tasks owned at relative level `l`.
pub fn select_level_star(
    counts: &[u64],
    k: u32,
    epsilon: &Rational,
    m: usize,
    t_star: usize,
    log_t: u32,
) -> LevelChoice {
    let top_level = (k * k).min(counts.len().saturating_sub(1) as u32).max(k);
    let sum = |a: u32, b: u32| -> u64 { (a..b).map(|l| counts.get(l as usize).copied().unwrap_or(0)).sum() };
    let slack = epsilon / int(4) * int(t_star as i64) / int(log_t.max(1) as i64);
    let mut best: Option<LevelChoice> = None;
    for l in k..=top_level {
        let (mid, top) = (sum(l - k, l), sum(0, l - k));
        let bound = &slack + epsilon / int(2 * m as i64) * int((mid + top) as i64);
        if int(mid as i64) <= bound {
            return LevelChoice { level: l, satisfied: true, mid_tasks: mid, top_tasks: top };
        }
        if best.as_ref().is_none_or(|b| mid < b.mid_tasks) {
            best = Some(LevelChoice { level: l, satisfied: false, mid_tasks: mid, top_tasks: top });
        }
    }
    best.expect("the level range is nonempty")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopWindow {
    pub job: usize,
    /// Support hull.
    pub r: usize,
    pub d: usize,
    /// Hull widened to bottom-interval boundaries.
    pub r_prime: usize,
    pub d_prime: usize,
    /// The hull with its two end intervals removed; `None` when nothing is left.
    pub window: Option<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct TentativeAssignment {
    pub windows: Vec<TopWindow>,
    pub assigned: BTreeMap<TaskRef, Placement>,
    pub discarded: Vec<TaskRef>,
    /// Matched top tasks respect every precedence with the fixed tasks.
    pub precedence_ok: bool,
    /// `4 m 2^{-k} T*`.
    pub bound: Rational,
}

/// Matches top tasks to the cells of `within` left free by `fixed`, each task
/// inside its job's shrunken window; unmatched tasks are discarded.
pub fn tentative_top_assign(
    ctx: &Context,
    top: &[usize],
    sup: &Supports,
    fixed: &Schedule,
    within: IntervalId,
    bottom_level: u32,
) -> TentativeAssignment {
    let tree = &ctx.tree;
    let bottoms = tree.descendants_at(within, bottom_level);
    let blen = tree.len(bottoms[0]);
    let index = |slot: usize| (slot - tree.begin(within)) / blen;
    let mut windows = Vec::new();
    for &j in top {
        let (r, d) = sup.job_span(ctx, j).expect("top jobs have support");
        let (u, v) = (index(r), index(d));
        let window = (v >= u + 2).then(|| (tree.begin(bottoms[u + 1]), tree.end(bottoms[v - 1])));
        windows.push(TopWindow { job: j, r, d, r_prime: tree.begin(bottoms[u]), d_prime: tree.end(bottoms[v]), window });
    }

    let occupied: BTreeSet<(usize, usize)> = fixed.assignment.values().map(|p| (p.machine, p.slot)).collect();
    let mut cells = Vec::new();
    for slot in tree.begin(within)..=tree.end(within) {
        for machine in 1..=ctx.inst.machines() {
            if !occupied.contains(&(machine, slot)) {
                cells.push((machine, slot));
            }
        }
    }
    let mut tasks = Vec::new();
    let mut adj = Vec::new();
    let mut discarded = Vec::new();
    for w in &windows {
        for t in ctx.inst.tasks_of(w.job) {
            match w.window {
                Some((lo, hi)) => {
                    tasks.push(t);
                    adj.push((0..cells.len()).filter(|&c| (lo..=hi).contains(&cells[c].1)).collect());
                }
                None => discarded.push(t),
            }
        }
    }
    let matching = hopcroft_karp(&adj, cells.len());
    let mut assigned = BTreeMap::new();
    for (i, m) in matching.into_iter().enumerate() {
        match m {
            Some(c) => {
                assigned.insert(tasks[i], Placement::new(cells[c].0, cells[c].1));
            }
            None => discarded.push(tasks[i]),
        }
    }
    let precedence_ok = assigned.iter().all(|(&a, pa)| {
        fixed.assignment.iter().all(|(&b, pb)| {
            (!ctx.inst.task_precedes(b, a) || pb.slot < pa.slot) && (!ctx.inst.task_precedes(a, b) || pa.slot < pb.slot)
        })
    });
    let m = ctx.inst.machines() as i64;
    let bound = int(4 * m * tree.len(within) as i64) / int(1i64 << ctx.params.k);
    TentativeAssignment { windows, assigned, discarded, precedence_ok, bound }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DiscardLedger {
    pub middle: usize,
    /// Discards made by the recursive calls below this one.
    pub bottom_recursive: usize,
    pub top_stage1: usize,
    pub top_stage2: usize,
    pub last_slot_comm: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CallLedger {
    pub interval: IntervalId,
    pub begin: usize,
    pub end: usize,
    pub base_case: bool,
    pub jobs: usize,
    pub special: usize,
    /// `|A*|`: tasks of the jobs and special tasks inside the interval.
    pub tasks: usize,
    /// Conditionings made by this call itself.
    pub conditionings: usize,
    /// `(log(T/|I*|) + 1) K 2^{k^2}`; recursive calls only.
    #[serde(with = "rational::serde_str")]
    pub conditioning_bound: Rational,
    pub chain_cuts: Option<CutReport>,
    pub level_star: Option<LevelChoice>,
    pub discards: DiscardLedger,
    /// All discards of this call and its descendants.
    pub total_discarded: usize,
    /// Total without the last-slot comm discards, checked against the bound.
    pub counted_discarded: usize,
    /// `(ε/2)(log|I*| / log T)|I*| + (ε/2m)|A*|`.
    #[serde(with = "rational::serde_str")]
    pub discard_bound: Rational,
    pub within_discard_bound: bool,
    pub tentative_precedence_ok: Option<bool>,
    #[serde(with = "rational::option_str")]
    pub tentative_bound: Option<Rational>,
}

#[derive(Debug, Clone)]
pub struct PartialOutput {
    pub schedule: Schedule,
    pub discarded: BTreeSet<TaskRef>,
    /// Ledgers of this call and all calls below, in preorder.
    pub calls: Vec<CallLedger>,
    /// Special jobs created anywhere in the subtree, with their machines.
    pub special: BTreeMap<usize, usize>,
    pub last_slot_comm: usize,
}

/// Schedules a partial instance inside its interval. Base case: intervals
/// shorter than `2^{k^2}` are fixed task by task by conditioning. Otherwise
/// splits specials, cuts chains, picks the bottom level, discards middle
/// jobs, recurses on the bottom intervals and inserts top jobs.
pub fn partial_schedule(ctx: &Context, partial: PartialInstance) -> Result<PartialOutput, HierarchyError> {
    let within = partial.interval;
    let tree = &ctx.tree;
    let sup = Supports::of(ctx, &partial.x);
    let tasks = partial.tasks(ctx, &sup);
    let mut out = PartialOutput {
        schedule: Schedule::new(tree.horizon()),
        discarded: BTreeSet::new(),
        calls: Vec::new(),
        special: BTreeMap::new(),
        last_slot_comm: 0,
    };
    let mut ledger = CallLedger {
        interval: within,
        begin: tree.begin(within),
        end: tree.end(within),
        base_case: tree.len(within) < 1 << ctx.params.batch(),
        jobs: partial.jobs.len(),
        special: partial.special.len(),
        tasks: tasks.len(),
        conditionings: 0,
        conditioning_bound: Rational::zero(),
        chain_cuts: None,
        level_star: None,
        discards: DiscardLedger::default(),
        total_discarded: 0,
        counted_discarded: 0,
        discard_bound: Rational::zero(),
        within_discard_bound: true,
        tentative_precedence_ok: None,
        tentative_bound: None,
    };
    let mut children = Vec::new();
    if ledger.base_case {
        base_case(ctx, partial, tasks, &mut out, &mut ledger)?;
    } else {
        recursive_case(ctx, partial, &mut out, &mut ledger, &mut children)?;
    }

    let bottom = ledger.discards.bottom_recursive;
    let own = ledger.discards.middle + ledger.discards.top_stage1 + ledger.discards.top_stage2;
    ledger.total_discarded = own + bottom + ledger.discards.last_slot_comm;
    debug_assert_eq!(ledger.total_discarded, out.discarded.len());
    ledger.counted_discarded = out.discarded.len() - out.last_slot_comm;
    let eps = &ctx.params.epsilon;
    let log_t = tree.depth();
    let log_i = log_t - within.level;
    let first = if log_t == 0 {
        Rational::zero()
    } else {
        eps / int(2) * int(log_i as i64) / int(log_t as i64) * int(tree.len(within) as i64)
    };
    ledger.discard_bound = first + eps / int(2 * ctx.inst.machines() as i64) * int(ledger.tasks as i64);
    ledger.within_discard_bound = int(ledger.counted_discarded as i64) <= ledger.discard_bound;
    let per_batch = ctx.params.k_bound(ctx.inst.machines()) * int(1i64 << ctx.params.batch());
    ledger.conditioning_bound = int(within.level as i64 + 1) * per_batch;
    out.calls.insert(0, ledger);
    for c in children {
        out.calls.extend(c);
    }
    Ok(out)
}

fn base_case(
    ctx: &Context,
    partial: PartialInstance,
    tasks: Vec<TaskRef>,
    out: &mut PartialOutput,
    ledger: &mut CallLedger,
) -> Result<(), HierarchyError> {
    let within = partial.interval;
    let mut x = partial.x;
    let wanted: BTreeSet<TaskRef> = tasks.into_iter().collect();
    let order: Vec<TaskRef> = ctx.inst.task_topological().into_iter().filter(|t| wanted.contains(t)).collect();
    let mut used = BTreeSet::new();
    for a in order {
        let sup = Supports::of(ctx, &x);
        let Some(&(slot, machine)) = sup.task(ctx, a).iter().find(|e| ctx.tree.contains(within, e.0)) else {
            return Err(HierarchyError::Inconsistent(format!("task {a:?} lost its mass in the interval")));
        };
        condition(&mut x, ctx.var(a, machine, slot), &mut ledger.conditionings)?;
        if !used.insert((machine, slot)) {
            return Err(HierarchyError::Inconsistent(format!("cell ({machine}, {slot}) fixed twice")));
        }
        if partial.special.get(&a.job).is_some_and(|&s| s != machine) {
            return Err(HierarchyError::Inconsistent(format!("special task {a:?} left its machine")));
        }
        out.schedule.assign(a, machine, slot);
    }
    let beta = ctx.beta();
    if beta > 0 {
        let cut = ctx.tree.end(within).saturating_sub(beta);
        let late: Vec<TaskRef> = out.schedule.assignment.iter().filter(|(_, p)| p.slot > cut).map(|(&t, _)| t).collect();
        for t in late {
            out.schedule.assignment.remove(&t);
            out.schedule.discard(t);
        }
        ledger.discards.last_slot_comm = out.schedule.discarded.len();
        out.last_slot_comm = ledger.discards.last_slot_comm;
    }
    out.discarded = out.schedule.discarded.clone();
    Ok(())
}

fn recursive_case(
    ctx: &Context,
    partial: PartialInstance,
    out: &mut PartialOutput,
    ledger: &mut CallLedger,
    children: &mut Vec<Vec<CallLedger>>,
) -> Result<(), HierarchyError> {
    let within = partial.interval;
    let tree = &ctx.tree;
    let mut p = partial;

    let sup = Supports::of(ctx, &p.x);
    let incoming: Vec<(usize, usize)> = p
        .special
        .iter()
        .filter(|(&j, _)| ctx.inst.tasks_of(j).any(|t| sup.has_mass_in(ctx, t, within)))
        .map(|(&j, &s)| (j, s))
        .collect();
    for (j, sigma) in incoming {
        let (x, c) = split_special(ctx, &p.x, j, sigma, within)?;
        p.x = x;
        ledger.conditionings += c;
    }
    let before: BTreeSet<usize> = p.special.keys().copied().collect();
    let (p, cut) = cut_chains(ctx, p)?;
    ledger.conditionings += cut.conditionings;
    for (&j, &s) in &p.special {
        if !before.contains(&j) {
            out.special.insert(j, s);
        }
    }
    ledger.chain_cuts = Some(cut);

    let sup = Supports::of(ctx, &p.x);
    let owners = ownership(ctx, &sup, &p.jobs, within)?;
    let rel_depth = (tree.depth() - within.level) as usize;
    let mut counts = vec![0u64; rel_depth + 1];
    for (&j, o) in &owners {
        counts[(o.level - within.level) as usize] += ctx.inst.size(j) as u64;
    }
    let k = ctx.params.k;
    let choice = select_level_star(&counts, k, &ctx.params.epsilon, ctx.inst.machines(), tree.len(within), tree.depth());
    let (l_star, top_below) = (choice.level, choice.level - k);
    ledger.level_star = Some(choice);
    let bottom_level = within.level + l_star;

    let mut top = Vec::new();
    let mut bottom = Vec::new();
    for (&j, o) in &owners {
        let rel = o.level - within.level;
        if rel < top_below {
            top.push(j);
        } else if rel < l_star {
            for t in ctx.inst.tasks_of(j) {
                out.schedule.discard(t);
            }
            ledger.discards.middle += ctx.inst.size(j) as usize;
        } else {
            bottom.push(j);
        }
    }

    let mut bottoms = tree.descendants_at(within, bottom_level);
    if ctx.reverse_children {
        bottoms.reverse();
    }
    for b in bottoms {
        let jobs = bottom.iter().copied().filter(|j| tree.is_within(owners[j], b)).collect();
        let special = p
            .special
            .iter()
            .filter(|(&j, _)| ctx.inst.tasks_of(j).any(|t| sup.has_mass_in(ctx, t, b)))
            .map(|(&j, &s)| (j, s))
            .collect();
        let child = partial_schedule(ctx, PartialInstance { interval: b, jobs, special, x: p.x.clone() })?;
        out.schedule.merge(&child.schedule);
        ledger.discards.bottom_recursive += child.discarded.len();
        out.last_slot_comm += child.last_slot_comm;
        out.special.extend(child.special);
        children.push(child.calls);
    }

    if !top.is_empty() {
        let tent = tentative_top_assign(ctx, &top, &sup, &out.schedule, within, bottom_level);
        ledger.tentative_precedence_ok = Some(tent.precedence_ok);
        ledger.tentative_bound = Some(tent.bound.clone());
        let (placed, lost1, lost2) = top_stage_two(ctx, &tent, &out.schedule, within, bottom_level)?;
        ledger.discards.top_stage1 = lost1.len();
        ledger.discards.top_stage2 = lost2.len();
        for (t, pl) in placed {
            out.schedule.assign(t, pl.machine, pl.slot);
        }
        for t in lost1.into_iter().chain(lost2) {
            out.schedule.discard(t);
        }
    }
    out.discarded = out.schedule.discarded.clone();
    Ok(())
}

type StageTwo = (Vec<(TaskRef, Placement)>, Vec<TaskRef>, Vec<TaskRef>);

/// Turns the tentative assignment into a non-migratory one with the deadline
/// scheduler. Each top job keeps as many tasks as were matched, inside its
/// window; windows are first made monotone along precedence.
fn top_stage_two(
    ctx: &Context,
    tent: &TentativeAssignment,
    fixed: &Schedule,
    within: IntervalId,
    bottom_level: u32,
) -> Result<StageTwo, HierarchyError> {
    let inst = ctx.inst;
    let tree = &ctx.tree;
    let offset = tree.begin(within) - 1;
    let mut matched: BTreeMap<usize, u32> = BTreeMap::new();
    for t in tent.assigned.keys() {
        *matched.entry(t.job).or_default() += 1;
    }
    let mut win: BTreeMap<usize, (usize, usize)> = tent
        .windows
        .iter()
        .filter(|w| matched.contains_key(&w.job))
        .filter_map(|w| w.window.map(|win| (w.job, win)))
        .collect();
    let topo = inst.precedence().topological();
    for &j in topo {
        if let Some(&(_, d)) = win.get(&j) {
            let r = inst.precedence().predecessors(j).filter_map(|q| win.get(&q)).map(|w| w.0).fold(win[&j].0, usize::max);
            win.insert(j, (r, d));
        }
    }
    for &j in topo.iter().rev() {
        if let Some(&(r, _)) = win.get(&j) {
            let d = inst.precedence().successors(j).filter_map(|q| win.get(&q)).map(|w| w.1).fold(win[&j].1, usize::min);
            win.insert(j, (r, d));
        }
    }

    let mut lost1 = Vec::new();
    let mut lost2 = Vec::new();
    for w in &tent.windows {
        let keep = if win.contains_key(&w.job) { matched[&w.job] } else { 0 };
        lost1.extend(inst.tasks_of(w.job).skip(keep as usize));
    }
    let (good, empty): (BTreeMap<usize, (usize, usize)>, BTreeMap<usize, (usize, usize)>) =
        win.into_iter().partition(|(_, (r, d))| r <= d);
    for j in empty.keys() {
        lost2.extend(inst.tasks_of(*j).take(matched[j] as usize));
    }
    if good.is_empty() {
        return Ok((Vec::new(), lost1, lost2));
    }

    let horizon = tree.len(within);
    let occupied: BTreeSet<(usize, usize)> = fixed.assignment.values().map(|p| (p.machine, p.slot)).collect();
    let capacity = (1..=inst.machines())
        .map(|i| (1..=horizon).map(|t| !occupied.contains(&(i, t + offset))).collect())
        .collect();
    let jobs = good
        .iter()
        .map(|(&j, &(r, d))| DeadlineJob {
            id: inst.id(j).to_string(),
            size: matched[&j],
            release: r - offset,
            deadline: d - offset,
        })
        .collect();
    let pairs: Vec<(String, String)> = inst
        .precedence()
        .pairs()
        .into_iter()
        .filter(|(a, b)| good.contains_key(a) && good.contains_key(b))
        .map(|(a, b)| (inst.id(a).to_string(), inst.id(b).to_string()))
        .collect();
    let comm = ctx.mode == Mode::Delay && inst.beta() > 0;
    let dinst = DeadlineInstance::new(
        horizon,
        1 << (bottom_level - within.level),
        capacity,
        jobs,
        &pairs,
        comm.then(|| inst.beta()),
    )?;
    let trace = if comm { edf_ect_comm(&dinst) } else { edf_ect(&dinst) };
    let mut placed = Vec::new();
    for dj in 0..dinst.num_jobs() {
        let j = inst.job_index(dinst.instance().id(dj)).expect("same ids");
        for t in dinst.instance().tasks_of(dj) {
            let orig = TaskRef::new(j, t.index);
            match trace.schedule.get(t) {
                Some(p) => placed.push((orig, Placement::new(p.machine, p.slot + offset))),
                None => lost2.push(orig),
            }
        }
    }
    Ok((placed, lost1, lost2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy_sched::build_laminar;
    use crate::model::Job;
    use crate::rational::ratio;
    use crate::sa_lp::build_base_lp;

    fn point(ctx: &Context, cells: &[(TaskRef, usize, usize)]) -> BTreeSet<u32> {
        cells.iter().map(|&(t, m, s)| ctx.var(t, m, s)).collect()
    }

    #[test]
    fn indexing_matches_the_base_lp() {
        let inst = Instance::new(2, vec![Job::new("a", 2), Job::new("b", 1)], &[], 0, &[]).unwrap();
        let params = HierarchyParams::default();
        let ctx = Context::new(&inst, build_laminar(4), &params, Mode::NoDelay);
        let base = build_base_lp(&inst, 4, false);
        for v in 0..base.num_events() {
            let e = base.event(&inst, v);
            assert_eq!(ctx.var(e.task, e.machine, e.slot), v as u32);
            assert_eq!(ctx.event(v as u32), (e.task, e.machine, e.slot));
        }
    }

    #[test]
    fn ownership_follows_support() {
        let inst = Instance::new(1, vec![Job::new("a", 1), Job::new("b", 1)], &[], 0, &[]).unwrap();
        let params = HierarchyParams::default();
        let ctx = Context::new(&inst, build_laminar(8), &params, Mode::NoDelay);
        let (a, b) = (TaskRef::new(0, 1), TaskRef::new(1, 1));
        let x = LiftedSolution::mixture(
            4,
            vec![(ratio(1, 2), point(&ctx, &[(a, 1, 1), (b, 1, 4)])), (ratio(1, 2), point(&ctx, &[(a, 1, 2), (b, 1, 5)]))],
        )
        .unwrap();
        let sup = Supports::of(&ctx, &x);
        let own = ownership(&ctx, &sup, &[0, 1], ctx.tree.root()).unwrap();
        assert_eq!(own[&0], IntervalId { level: 2, pos: 0 });
        assert_eq!(own[&1], ctx.tree.root());
        let left = IntervalId { level: 1, pos: 0 };
        assert!(matches!(ownership(&ctx, &sup, &[1], left), Err(HierarchyError::SupportOutsideRoot(_))));
    }

    #[test]
    fn split_confines_each_task() {
        // two tasks, fractionally straddling the middle of [1, 4]
        let inst = Instance::new(1, vec![Job::new("a", 2)], &[], 0, &[]).unwrap();
        let params = HierarchyParams::default();
        let ctx = Context::new(&inst, build_laminar(4), &params, Mode::NoDelay);
        let (a1, a2) = (TaskRef::new(0, 1), TaskRef::new(0, 2));
        let x = LiftedSolution::mixture(
            8,
            vec![
                (ratio(1, 3), point(&ctx, &[(a1, 1, 1), (a2, 1, 2)])),
                (ratio(1, 3), point(&ctx, &[(a1, 1, 2), (a2, 1, 3)])),
                (ratio(1, 3), point(&ctx, &[(a1, 1, 3), (a2, 1, 4)])),
            ],
        )
        .unwrap();
        let (y, used) = split_special(&ctx, &x, 0, 1, ctx.tree.root()).unwrap();
        assert!(used <= 2);
        let sup = Supports::of(&ctx, &y);
        let halves = ctx.tree.descendants_at(ctx.tree.root(), 1);
        for t in [a1, a2] {
            let per: Vec<Rational> = halves
                .iter()
                .map(|&h| sup.task(&ctx, t).iter().filter(|e| ctx.tree.contains(h, e.0)).map(|e| y.marginal(ctx.var(t, 1, e.0))).sum())
                .collect();
            assert!(per.iter().all(|m| m.is_zero() || m.is_one()), "{per:?}");
        }
        // with mass straddling the middle only between the tasks: task 1 left, task 2 right
        let w = LiftedSolution::mixture(
            8,
            vec![
                (ratio(1, 2), point(&ctx, &[(a1, 1, 2), (a2, 1, 3)])),
                (ratio(1, 2), point(&ctx, &[(a1, 1, 1), (a2, 1, 4)])),
            ],
        )
        .unwrap();
        let (w2, _) = split_special(&ctx, &w, 0, 1, ctx.tree.root()).unwrap();
        let sup = Supports::of(&ctx, &w2);
        assert!(sup.task(&ctx, a1).iter().all(|e| e.0 <= 2));
        assert!(sup.task(&ctx, a2).iter().all(|e| e.0 >= 3));

        // a job already inside one half costs at most one conditioning
        let z = LiftedSolution::mixture(8, vec![(ratio(1, 1), point(&ctx, &[(a1, 1, 1), (a2, 1, 2)]))]).unwrap();
        let (z2, used) = split_special(&ctx, &z, 0, 1, ctx.tree.root()).unwrap();
        assert!(used <= 1);
        assert_eq!(z2.support(), z.support());
    }

    #[test]
    fn level_star_choices() {
        let eps = ratio(1, 2);
        // nothing owned above the bottom band
        let c = select_level_star(&[0, 0, 0, 5, 5], 2, &eps, 2, 16, 4);
        assert_eq!((c.level, c.satisfied), (2, true));
        // everything at the root: with k = 1 the only band is level 0, with
        // k = 2 the smallest band that skips level 0 is chosen
        let c = select_level_star(&[9, 0, 0, 0, 0], 1, &eps, 2, 16, 4);
        assert_eq!((c.level, c.satisfied), (1, false));
        let c = select_level_star(&[40, 0, 0, 0, 0], 2, &eps, 1, 16, 4);
        assert_eq!((c.level, c.satisfied, c.mid_tasks), (3, true, 0));
        // counts heavy on every band
        let c = select_level_star(&[0, 50, 60, 70, 80], 2, &eps, 2, 16, 4);
        assert!(!c.satisfied);
        assert_eq!((c.level, c.mid_tasks), (2, 50));
    }

    fn top_ctx_inst() -> Instance {
        Instance::new(2, vec![Job::new("a", 2), Job::new("b", 3)], &[], 0, &[]).unwrap()
    }

    #[test]
    fn tentative_windows() {
        let inst = top_ctx_inst();
        let params = HierarchyParams::default();
        let ctx = Context::new(&inst, build_laminar(8), &params, Mode::NoDelay);
        let cells = |j: usize, slots: &[usize]| -> Vec<(TaskRef, usize, usize)> {
            slots.iter().enumerate().map(|(i, &s)| (TaskRef::new(j, i as u32 + 1), 1 + j, s)).collect()
        };
        let mut all = cells(0, &[1, 8]);
        all.extend(cells(1, &[3, 4, 5]));
        let x = LiftedSolution::mixture(4, vec![(ratio(1, 1), point(&ctx, &all))]).unwrap();
        let sup = Supports::of(&ctx, &x);
        let tent = tentative_top_assign(&ctx, &[0, 1], &sup, &Schedule::new(8), ctx.tree.root(), 2);
        // a spans all four bottom intervals: window is slots 3..6; b spans two: nothing left
        assert_eq!(tent.windows[0].window, Some((3, 6)));
        assert_eq!((tent.windows[1].r_prime, tent.windows[1].d_prime), (3, 6));
        assert_eq!(tent.windows[1].window, None);
        assert_eq!(tent.assigned.len(), 2);
        assert!(tent.assigned.values().all(|p| (3..=6).contains(&p.slot)));
        assert_eq!(tent.discarded.len(), 3);
        assert!(tent.precedence_ok);
    }

    #[test]
    fn empty_partial_instance() {
        let inst = Instance::new(1, vec![Job::new("a", 1)], &[], 0, &[]).unwrap();
        let params = HierarchyParams::default();
        let ctx = Context::new(&inst, build_laminar(4), &params, Mode::NoDelay);
        let x = LiftedSolution::mixture(4, vec![(ratio(1, 1), point(&ctx, &[(TaskRef::new(0, 1), 1, 1)]))]).unwrap();
        let right = IntervalId { level: 1, pos: 1 };
        let out = partial_schedule(&ctx, PartialInstance { interval: right, jobs: vec![], special: BTreeMap::new(), x }).unwrap();
        assert!(out.schedule.assignment.is_empty());
        assert!(out.discarded.is_empty());
    }

    #[test]
    fn one_chain_cut_at_the_root() {
        let pairs = [("a".to_string(), "b".to_string())];
        let inst = Instance::new(1, vec![Job::new("a", 2), Job::new("b", 2)], &pairs, 0, &[]).unwrap();
        let params = HierarchyParams::default();
        let ctx = Context::new(&inst, build_laminar(8), &params, Mode::NoDelay);
        let t = |j: usize, i: u32| TaskRef::new(j, i);
        let p = |slots: [usize; 4]| point(&ctx, &[(t(0, 1), 1, slots[0]), (t(0, 2), 1, slots[1]), (t(1, 1), 1, slots[2]), (t(1, 2), 1, slots[3])]);
        let x = LiftedSolution::mixture(
            16,
            vec![(ratio(1, 3), p([1, 2, 5, 6])), (ratio(1, 3), p([4, 5, 6, 7])), (ratio(1, 3), p([1, 2, 3, 4]))],
        )
        .unwrap();
        let root = ctx.tree.root();
        let sup = Supports::of(&ctx, &x);
        let own = ownership(&ctx, &sup, &[0, 1], root).unwrap();
        assert_eq!((own[&0], own[&1]), (root, root));
        let partial = PartialInstance { interval: root, jobs: vec![0, 1], special: BTreeMap::new(), x };
        partial.check(&ctx).unwrap();
        let (after, report) = cut_chains(&ctx, partial).unwrap();
        assert_eq!(report.iterations, 1);
        assert_eq!(after.special.get(&0), Some(&1));
        assert_eq!(after.jobs, vec![1]);
        let sup = Supports::of(&ctx, &after.x);
        let own = ownership(&ctx, &sup, &after.jobs, root).unwrap();
        assert!(own[&1].level > 0);
        assert!(int(report.chain_hat as i64) <= report.chain_bound);
        assert_eq!(report.chain_bound, int(2));
        after.check(&ctx).unwrap();
    }

    #[test]
    fn base_case_lands_on_an_integral_point() {
        let inst = Instance::new(2, vec![Job::new("a", 1), Job::new("b", 1), Job::new("c", 2)], &[], 0, &[]).unwrap();
        let params = HierarchyParams { k: 2, ..HierarchyParams::default() };
        let ctx = Context::new(&inst, build_laminar(4), &params, Mode::NoDelay);
        let found = crate::oracle::sample_feasible(&inst, crate::oracle::Model::B, false, 2, 4, 1);
        assert!(found.len() >= 2);
        let points: Vec<BTreeSet<u32>> = found
            .iter()
            .map(|s| s.assignment.iter().map(|(&t, p)| ctx.var(t, p.machine, p.slot)).collect())
            .collect();
        let x = LiftedSolution::mixture(16, points.iter().map(|p| (ratio(1, 1), p.clone())).collect()).unwrap();
        let root = PartialInstance { interval: ctx.tree.root(), jobs: vec![0, 1, 2], special: BTreeMap::new(), x };
        let out = partial_schedule(&ctx, root).unwrap();
        assert!(out.calls[0].base_case);
        assert!(out.discarded.is_empty());
        assert!(out.schedule.is_complete(&inst));
        assert!(crate::schedule::validate(&out.schedule, &inst, Mode::NoDelay).unwrap().is_valid());
        let got: BTreeSet<u32> = out.schedule.assignment.iter().map(|(&t, p)| ctx.var(t, p.machine, p.slot)).collect();
        assert!(points.contains(&got));
    }
}
