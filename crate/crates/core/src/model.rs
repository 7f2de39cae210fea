//! Instances: jobs made of unit tasks, a transitively closed precedence
//! relation, communication delays and the machine count.

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::FixedBitSet;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("precedence cycle: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("unknown job {0:?}")]
    UnknownJob(String),
    #[error("duplicate job id {0:?}")]
    DuplicateJob(String),
    #[error("job {0:?} has size 0")]
    ZeroSize(String),
    #[error("machine count must be at least 1")]
    NoMachines,
    #[error("delay override on ({0:?}, {1:?}) which is not a precedence pair")]
    DelayOnNonPrecedence(String, String),
    #[error("epsilon must lie in (0,1), got {0}")]
    InvalidEpsilon(String),
    #[error("instance has no jobs")]
    NoJobs,
    #[error("malformed instance json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub id: String,
    pub size: u32,
}

impl Job {
    pub fn new(id: impl Into<String>, size: u32) -> Self {
        Job { id: id.into(), size }
    }
}

/// Task `index` (1-based) of the job at position `job` in the instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskRef {
    pub job: usize,
    pub index: u32,
}

impl TaskRef {
    pub fn new(job: usize, index: u32) -> Self {
        TaskRef { job, index }
    }
}

/// Cycle found while closing a relation, as a list of node indices with the
/// first node repeated at the end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleWitness(pub Vec<usize>);

/// Transitively closed, acyclic relation over `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Precedence {
    succ: Vec<FixedBitSet>,
    pred: Vec<FixedBitSet>,
    topo: Vec<usize>,
}

/// Smallest transitive superset of `pairs` over nodes `0..n`.
pub fn transitive_closure(n: usize, pairs: &[(usize, usize)]) -> Result<Precedence, CycleWitness> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in pairs {
        adj[a].push(b);
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    if let Some(c) = find_cycle(&adj) {
        return Err(CycleWitness(c));
    }
    let topo = topo_order(n, &adj);
    let mut succ = vec![FixedBitSet::with_capacity(n); n];
    for &v in topo.iter().rev() {
        let mut row = FixedBitSet::with_capacity(n);
        for &w in &adj[v] {
            row.insert(w);
            row.union_with(&succ[w]);
        }
        succ[v] = row;
    }
    let mut pred = vec![FixedBitSet::with_capacity(n); n];
    for (v, row) in succ.iter().enumerate() {
        for w in row.ones() {
            pred[w].insert(v);
        }
    }
    Ok(Precedence { succ, pred, topo })
}

fn find_cycle(adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut color = vec![0u8; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if color[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        color[root] = 1;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                match color[w] {
                    0 => {
                        color[w] = 1;
                        parent[w] = v;
                        stack.push((w, 0));
                    }
                    1 => {
                        let mut cyc = vec![v];
                        let mut u = v;
                        while u != w {
                            u = parent[u];
                            cyc.push(u);
                        }
                        cyc.reverse();
                        cyc.push(w);
                        return Some(cyc);
                    }
                    _ => {}
                }
            } else {
                color[v] = 2;
                stack.pop();
            }
        }
    }
    None
}

fn topo_order(n: usize, adj: &[Vec<usize>]) -> Vec<usize> {
    let mut indeg = vec![0usize; n];
    for a in adj {
        for &b in a {
            indeg[b] += 1;
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut out = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        out.push(v);
        for &w in &adj[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.insert(w);
            }
        }
    }
    out
}

impl Precedence {
    pub fn empty(n: usize) -> Self {
        transitive_closure(n, &[]).expect("empty relation is acyclic")
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.succ[a].contains(b)
    }

    pub fn successors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.succ[a].ones()
    }

    pub fn predecessors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.pred[a].ones()
    }

    pub fn successor_set(&self, a: usize) -> &FixedBitSet {
        &self.succ[a]
    }

    pub fn predecessor_set(&self, a: usize) -> &FixedBitSet {
        &self.pred[a]
    }

    /// All closed pairs in lexicographic order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            for b in self.succ[a].ones() {
                out.push((a, b));
            }
        }
        out
    }

    pub fn pair_count(&self) -> usize {
        self.succ.iter().map(|s| s.count_ones(..)).sum()
    }

    /// Pairs (a,b) with no c strictly between them.
    pub fn reduction(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            for b in self.succ[a].ones() {
                let mut between = self.succ[a].clone();
                between.intersect_with(&self.pred[b]);
                if between.count_ones(..) == 0 {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Topological order, ties broken by smallest index.
    pub fn topological(&self) -> &[usize] {
        &self.topo
    }
}

/// Communication delays on precedence pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelaySpec {
    pub default: u32,
    pub overrides: BTreeMap<(usize, usize), u32>,
    beta: u32,
}

impl DelaySpec {
    pub fn none() -> Self {
        DelaySpec { default: 0, overrides: BTreeMap::new(), beta: 0 }
    }

    pub fn beta(&self) -> u32 {
        self.beta
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    jobs: Vec<Job>,
    precedence: Precedence,
    delays: DelaySpec,
    machines: usize,
    offsets: Vec<usize>,
}

/// Zero-padded job id that sorts in numeric order.
pub fn job_id(i: usize, n: usize) -> String {
    let width = n.saturating_sub(1).to_string().len().max(2);
    format!("j{:0width$}", i, width = width)
}

impl Instance {
    /// Builds an instance. Jobs are reordered by id; pairs and overrides name jobs by id.
    pub fn new(
        machines: usize,
        jobs: Vec<Job>,
        pairs: &[(String, String)],
        delay_default: u32,
        overrides: &[(String, String, u32)],
    ) -> Result<Self, ModelError> {
        if machines == 0 {
            return Err(ModelError::NoMachines);
        }
        let mut jobs = jobs;
        jobs.sort_by(|a, b| a.id.cmp(&b.id));
        for w in jobs.windows(2) {
            if w[0].id == w[1].id {
                return Err(ModelError::DuplicateJob(w[0].id.clone()));
            }
        }
        if let Some(j) = jobs.iter().find(|j| j.size == 0) {
            return Err(ModelError::ZeroSize(j.id.clone()));
        }
        let index: BTreeMap<&str, usize> =
            jobs.iter().enumerate().map(|(i, j)| (j.id.as_str(), i)).collect();
        let lookup = |s: &str| index.get(s).copied().ok_or_else(|| ModelError::UnknownJob(s.to_string()));
        let mut idx_pairs = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            idx_pairs.push((lookup(a)?, lookup(b)?));
        }
        let precedence = transitive_closure(jobs.len(), &idx_pairs)
            .map_err(|c| ModelError::CycleDetected(c.0.iter().map(|&i| jobs[i].id.clone()).collect()))?;
        let mut ov = BTreeMap::new();
        for (a, b, c) in overrides {
            let (ia, ib) = (lookup(a)?, lookup(b)?);
            if !precedence.precedes(ia, ib) {
                return Err(ModelError::DelayOnNonPrecedence(a.clone(), b.clone()));
            }
            ov.insert((ia, ib), *c);
        }
        Ok(Self::assemble(machines, jobs, precedence, delay_default, ov))
    }

    /// Builds an instance from jobs already sorted by id and index pairs.
    pub fn from_sorted(
        machines: usize,
        jobs: Vec<Job>,
        pairs: &[(usize, usize)],
        delay_default: u32,
    ) -> Result<Self, ModelError> {
        let ids: Vec<(String, String)> =
            pairs.iter().map(|&(a, b)| (jobs[a].id.clone(), jobs[b].id.clone())).collect();
        Self::new(machines, jobs, &ids, delay_default, &[])
    }

    fn assemble(
        machines: usize,
        jobs: Vec<Job>,
        precedence: Precedence,
        delay_default: u32,
        overrides: BTreeMap<(usize, usize), u32>,
    ) -> Self {
        let mut beta = 0;
        for (a, b) in precedence.pairs() {
            beta = beta.max(*overrides.get(&(a, b)).unwrap_or(&delay_default));
        }
        let mut offsets = Vec::with_capacity(jobs.len() + 1);
        let mut acc = 0;
        for j in &jobs {
            offsets.push(acc);
            acc += j.size as usize;
        }
        offsets.push(acc);
        Instance {
            jobs,
            precedence,
            delays: DelaySpec { default: delay_default, overrides, beta },
            machines,
            offsets,
        }
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn num_jobs(&self) -> usize {
        self.jobs.len()
    }

    pub fn size(&self, j: usize) -> u32 {
        self.jobs[j].size
    }

    pub fn id(&self, j: usize) -> &str {
        &self.jobs[j].id
    }

    pub fn job_index(&self, id: &str) -> Option<usize> {
        self.jobs.binary_search_by(|j| j.id.as_str().cmp(id)).ok()
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn precedence(&self) -> &Precedence {
        &self.precedence
    }

    pub fn delays(&self) -> &DelaySpec {
        &self.delays
    }

    pub fn beta(&self) -> u32 {
        self.delays.beta
    }

    /// Delay c_{a,b}; `None` when a does not precede b.
    pub fn delay(&self, a: usize, b: usize) -> Option<u32> {
        if !self.precedence.precedes(a, b) {
            return None;
        }
        Some(*self.delays.overrides.get(&(a, b)).unwrap_or(&self.delays.default))
    }

    pub fn with_uniform_delay(&self, c: u32) -> Instance {
        Self::assemble(self.machines, self.jobs.clone(), self.precedence.clone(), c, BTreeMap::new())
    }

    pub fn with_machines(&self, m: usize) -> Instance {
        let mut out = self.clone();
        out.machines = m.max(1);
        out
    }

    /// N = Σ p_j.
    pub fn total_tasks(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn total_size(&self) -> u64 {
        self.total_tasks() as u64
    }

    pub fn task_offset(&self, j: usize) -> usize {
        self.offsets[j]
    }

    /// Dense index of a task in `0..N`.
    pub fn task_index(&self, t: TaskRef) -> usize {
        self.offsets[t.job] + (t.index as usize - 1)
    }

    pub fn task_at(&self, g: usize) -> TaskRef {
        let j = match self.offsets.binary_search(&g) {
            Ok(mut j) => {
                while self.jobs[j].size == 0 {
                    j += 1;
                }
                j
            }
            Err(j) => j - 1,
        };
        TaskRef::new(j, (g - self.offsets[j] + 1) as u32)
    }

    pub fn contains_task(&self, t: TaskRef) -> bool {
        t.job < self.jobs.len() && t.index >= 1 && t.index <= self.jobs[t.job].size
    }

    pub fn tasks_of(&self, j: usize) -> impl Iterator<Item = TaskRef> {
        (1..=self.jobs[j].size).map(move |i| TaskRef::new(j, i))
    }

    /// All tasks, ordered by job index then task index.
    pub fn tasks(&self) -> impl Iterator<Item = TaskRef> + '_ {
        (0..self.jobs.len()).flat_map(move |j| self.tasks_of(j))
    }

    /// Task-level precedence: within-job chain plus every pair across j ≺ j′.
    pub fn task_precedes(&self, a: TaskRef, b: TaskRef) -> bool {
        if a.job == b.job {
            a.index < b.index
        } else {
            self.precedence.precedes(a.job, b.job)
        }
    }

    /// Tasks in topological order of task-level precedence, ties by job index then task index.
    pub fn task_topological(&self) -> Vec<TaskRef> {
        let n = self.num_jobs();
        let mut indeg: Vec<usize> = (0..n).map(|j| self.precedence.predecessor_set(j).count_ones(..)).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&j| indeg[j] == 0).collect();
        let mut out = Vec::with_capacity(self.total_tasks());
        // Job-level Kahn order with smallest-index ties gives a valid task order
        // because all tasks of a job are emitted together.
        while let Some(j) = ready.pop_first() {
            out.extend(self.tasks_of(j));
            for s in self.precedence.successors(j) {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    ready.insert(s);
                }
            }
        }
        out
    }

    /// Δ(subset): largest total size along a precedence chain inside `subset`.
    pub fn max_chain(&self, subset: &[usize]) -> u64 {
        max_chain(self, subset)
    }

    pub fn max_chain_all(&self) -> u64 {
        let all: Vec<usize> = (0..self.num_jobs()).collect();
        max_chain(self, &all)
    }
}

/// Δ over a subset of jobs by longest path in topological order.
pub fn max_chain(inst: &Instance, subset: &[usize]) -> u64 {
    let n = inst.num_jobs();
    let mut member = vec![false; n];
    for &j in subset {
        member[j] = true;
    }
    let mut best = vec![0u64; n];
    let mut overall = 0;
    for &j in inst.precedence().topological() {
        if !member[j] {
            continue;
        }
        let prev = inst
            .precedence()
            .predecessors(j)
            .filter(|&p| member[p])
            .map(|p| best[p])
            .max()
            .unwrap_or(0);
        best[j] = prev + inst.size(j) as u64;
        overall = overall.max(best[j]);
    }
    overall
}

/// Longest chain through each job of `subset`, returned as the chain itself.
pub fn longest_chain(inst: &Instance, subset: &[usize]) -> Vec<usize> {
    let n = inst.num_jobs();
    let mut member = vec![false; n];
    for &j in subset {
        member[j] = true;
    }
    let mut best = vec![0u64; n];
    let mut from = vec![usize::MAX; n];
    let mut end = usize::MAX;
    for &j in inst.precedence().topological() {
        if !member[j] {
            continue;
        }
        let mut b = 0;
        for p in inst.precedence().predecessors(j) {
            if member[p] && best[p] > b {
                b = best[p];
                from[j] = p;
            }
        }
        best[j] = b + inst.size(j) as u64;
        if end == usize::MAX || best[j] > best[end] {
            end = j;
        }
    }
    let mut chain = Vec::new();
    let mut cur = end;
    while cur != usize::MAX {
        chain.push(cur);
        cur = from[cur];
    }
    chain.reverse();
    chain
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationReport {
    #[serde(with = "rational::serde_str")]
    pub unit: Rational,
    pub discarded: Vec<String>,
    pub total_discarded_size: u64,
    #[serde(with = "rational::serde_str")]
    pub discard_bound: Rational,
    pub normalized_tasks: u64,
    #[serde(with = "rational::serde_str")]
    pub n_squared_over_eps: Rational,
    pub within_n_squared_over_eps: bool,
}

/// Rounds sizes down to multiples of u = ε·p_max/n and drops jobs shorter than u.
pub fn normalize_sizes(inst: &Instance, eps: &Rational) -> Result<(Instance, NormalizationReport), ModelError> {
    if *eps <= Rational::zero() || *eps >= rational::int(1) {
        return Err(ModelError::InvalidEpsilon(rational::format(eps)));
    }
    let n = inst.num_jobs();
    if n == 0 {
        return Err(ModelError::NoJobs);
    }
    let pmax = inst.jobs().iter().map(|j| j.size).max().unwrap_or(0);
    let unit = eps * rational::int(pmax as i64) / rational::int(n as i64);
    let mut keep = Vec::new();
    let mut discarded = Vec::new();
    let mut total_discarded = 0u64;
    let mut new_jobs = Vec::new();
    for (j, job) in inst.jobs().iter().enumerate() {
        let p = rational::int(job.size as i64);
        if p < unit {
            discarded.push(job.id.clone());
            total_discarded += job.size as u64;
        } else {
            keep.push(j);
            let s = rational::floor_u64(&(p / &unit)) as u32;
            new_jobs.push(Job::new(job.id.clone(), s));
        }
    }
    let mut remap = vec![usize::MAX; n];
    for (k, &j) in keep.iter().enumerate() {
        remap[j] = k;
    }
    let mut pairs = Vec::new();
    let mut overrides = Vec::new();
    for (a, b) in inst.precedence().pairs() {
        if remap[a] != usize::MAX && remap[b] != usize::MAX {
            pairs.push((inst.id(a).to_string(), inst.id(b).to_string()));
            if let Some(c) = inst.delays().overrides.get(&(a, b)) {
                overrides.push((inst.id(a).to_string(), inst.id(b).to_string(), *c));
            }
        }
    }
    let out = Instance::new(inst.machines(), new_jobs, &pairs, inst.delays().default, &overrides)?;
    let normalized_tasks = out.total_size();
    let n2 = rational::int((n * n) as i64) / eps;
    let report = NormalizationReport {
        discard_bound: eps * rational::int(pmax as i64),
        within_n_squared_over_eps: rational::int(normalized_tasks as i64) <= n2,
        n_squared_over_eps: n2,
        unit,
        discarded,
        total_discarded_size: total_discarded,
        normalized_tasks,
    };
    Ok((out, report))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DelaysFile {
    #[serde(default)]
    default: u32,
    #[serde(default)]
    overrides: Vec<(String, String, u32)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InstanceFile {
    machines: usize,
    jobs: Vec<Job>,
    #[serde(default)]
    precedence: Vec<(String, String)>,
    #[serde(default = "no_delays")]
    delays: DelaysFile,
}

fn no_delays() -> DelaysFile {
    DelaysFile { default: 0, overrides: Vec::new() }
}

impl Instance {
    pub fn from_json(s: &str) -> Result<Self, ModelError> {
        let f: InstanceFile = serde_json::from_str(s).map_err(|e| ModelError::Json(e.to_string()))?;
        Instance::new(f.machines, f.jobs, &f.precedence, f.delays.default, &f.delays.overrides)
    }

    /// Canonical JSON; precedence is written as its transitive reduction.
    pub fn to_json(&self) -> String {
        let precedence = self
            .precedence
            .reduction()
            .into_iter()
            .map(|(a, b)| (self.id(a).to_string(), self.id(b).to_string()))
            .collect();
        let overrides = self
            .delays
            .overrides
            .iter()
            .map(|(&(a, b), &c)| (self.id(a).to_string(), self.id(b).to_string(), c))
            .collect();
        let f = InstanceFile {
            machines: self.machines,
            jobs: self.jobs.clone(),
            precedence,
            delays: DelaysFile { default: self.delays.default, overrides },
        };
        rational::to_canonical_json(&f).expect("instance serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[(&str, &str)]) -> Vec<(String, String)> {
        v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn closure_of_path() {
        let p = transitive_closure(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(p.pairs(), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(p.reduction(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn closure_of_empty() {
        let p = transitive_closure(4, &[]).unwrap();
        assert!(p.pairs().is_empty());
    }

    #[test]
    fn cycle_has_witness() {
        let err = transitive_closure(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]).unwrap_err();
        let c = err.0;
        assert_eq!(c.first(), c.last());
        for w in c.windows(2) {
            assert!([(0, 1), (1, 2), (2, 0)].contains(&(w[0], w[1])), "{c:?}");
        }
    }

    #[test]
    fn self_loop_is_cycle() {
        let err = transitive_closure(2, &[(1, 1)]).unwrap_err();
        assert_eq!(err.0, vec![1, 1]);
    }

    #[test]
    fn chains() {
        let jobs = vec![Job::new("a", 2), Job::new("b", 3), Job::new("c", 4)];
        let inst = Instance::new(1, jobs.clone(), &ids(&[("a", "b"), ("b", "c")]), 0, &[]).unwrap();
        assert_eq!(inst.max_chain_all(), 9);
        let anti = Instance::new(1, vec![Job::new("a", 5), Job::new("b", 1), Job::new("c", 2)], &[], 0, &[]).unwrap();
        assert_eq!(anti.max_chain_all(), 5);
        assert_eq!(anti.max_chain(&[]), 0);
    }

    #[test]
    fn delay_override_must_be_precedence() {
        let jobs = vec![Job::new("a", 1), Job::new("b", 1)];
        let err = Instance::new(2, jobs, &[], 1, &[("a".into(), "b".into(), 2)]).unwrap_err();
        assert!(matches!(err, ModelError::DelayOnNonPrecedence(..)));
    }

    #[test]
    fn beta_is_max_delay() {
        let jobs = vec![Job::new("a", 1), Job::new("b", 1), Job::new("c", 1)];
        let inst =
            Instance::new(2, jobs, &ids(&[("a", "b"), ("b", "c")]), 1, &[("a".into(), "c".into(), 3)]).unwrap();
        assert_eq!(inst.beta(), 3);
        assert_eq!(inst.delay(0, 1), Some(1));
        assert_eq!(inst.delay(1, 0), None);
    }

    #[test]
    fn normalize_example() {
        let jobs = vec![Job::new("a", 100), Job::new("b", 40), Job::new("c", 7)];
        let inst = Instance::new(1, jobs, &[], 0, &[]).unwrap();
        let (out, rep) = normalize_sizes(&inst, &rational::ratio(1, 2)).unwrap();
        assert_eq!(rep.unit, rational::ratio(50, 3));
        assert_eq!(rep.discarded, vec!["c".to_string()]);
        let sizes: Vec<u32> = out.jobs().iter().map(|j| j.size).collect();
        assert_eq!(sizes, vec![6, 2]);
        assert!(rational::int(rep.total_discarded_size as i64) <= rep.discard_bound);
    }

    #[test]
    fn normalize_single_and_equal() {
        let inst = Instance::new(1, vec![Job::new("a", 13)], &[], 0, &[]).unwrap();
        let (out, _) = normalize_sizes(&inst, &rational::ratio(1, 3)).unwrap();
        assert_eq!(out.size(0), 3);
        let inst = Instance::new(1, vec![Job::new("a", 4), Job::new("b", 4)], &[], 0, &[]).unwrap();
        let (out, rep) = normalize_sizes(&inst, &rational::ratio(1, 2)).unwrap();
        assert!(rep.discarded.is_empty());
        assert_eq!(out.size(0), out.size(1));
        assert!(normalize_sizes(&inst, &rational::int(1)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let jobs = vec![Job::new("b", 2), Job::new("a", 1), Job::new("c", 1)];
        let inst = Instance::new(
            2,
            jobs,
            &ids(&[("a", "b"), ("b", "c"), ("a", "c")]),
            1,
            &[("a".into(), "c".into(), 2)],
        )
        .unwrap();
        let s = inst.to_json();
        let back = Instance::from_json(&s).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.to_json(), s);
    }

    #[test]
    fn task_indexing() {
        let inst = Instance::new(1, vec![Job::new("a", 2), Job::new("b", 3)], &[], 0, &[]).unwrap();
        for (g, t) in inst.tasks().enumerate() {
            assert_eq!(inst.task_index(t), g);
            assert_eq!(inst.task_at(g), t);
        }
    }
}
