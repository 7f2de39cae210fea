//! The laminar binary-tree instance, aligned placements and the product-form
//! lifted solution over them.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::rational::{int, Rational};
use crate::sa_lp::{subsets_up_to, LiftedSolution};

use super::smi::{SingleMachineInstance, SmiJob};

/// Tree instance with `2^(L+1) - 1` jobs. Jobs are listed level by level,
/// left to right; job `(l, k)` with `k` 1-based has size `2^(L-l)` and window
/// `((L+1)(k-1)2^(L-l), (L+1)k 2^(L-l)]`.
pub fn gen_tree_instance(l: u32) -> SingleMachineInstance {
    let mut jobs = Vec::new();
    for level in 0..=l {
        let p = 1u32 << (l - level);
        for k in 1..=(1u32 << level) {
            jobs.push(SmiJob {
                id: format!("t{level}_{k}"),
                size: p,
                release: (l + 1) * (k - 1) * p,
                deadline: (l + 1) * k * p,
            });
        }
    }
    let horizon = (l + 1) << l;
    SingleMachineInstance::new(jobs, horizon).expect("tree windows are well formed")
}

/// Level of the job at position `j` of [`gen_tree_instance`].
pub fn tree_level(j: usize) -> u32 {
    (j + 1).ilog2()
}

/// Warning text when `L + 1` is not a power of two.
pub fn tree_warning(l: u32) -> Option<String> {
    (!(l + 1).is_power_of_two()).then(|| format!("L + 1 = {} is not a power of two", l + 1))
}

/// Job `job` processed in `(start, start + len]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PlacementVar {
    pub job: usize,
    pub start: u32,
    pub len: u32,
}

impl PlacementVar {
    /// A full placement whose start is a multiple of the size, inside the window.
    pub fn aligned(smi: &SingleMachineInstance, job: usize, start: u32) -> Option<Self> {
        let j = smi.jobs.get(job)?;
        let ok = start >= j.release && start < j.deadline && start.is_multiple_of(j.size) && start + j.size <= j.deadline;
        ok.then_some(PlacementVar { job, start, len: j.size })
    }

    /// A possibly partial placement `(start, start + len]` inside the window.
    pub fn partial(smi: &SingleMachineInstance, job: usize, start: u32, len: u32) -> Option<Self> {
        let j = smi.jobs.get(job)?;
        let ok = len >= 1 && len <= j.size && start >= j.release && start + len <= j.deadline;
        ok.then_some(PlacementVar { job, start, len })
    }

    pub fn end(&self) -> u32 {
        self.start + self.len
    }

    /// Whether `(start, end]` contains slot `t`.
    pub fn covers(&self, t: u32) -> bool {
        self.start < t && t <= self.end()
    }

    pub fn overlaps(&self, other: &PlacementVar) -> bool {
        self.start < other.end() && other.start < self.end()
    }

    /// Two distinct placements that cannot both hold.
    pub fn conflicts(&self, other: &PlacementVar) -> bool {
        self != other && (self.job == other.job || self.overlaps(other))
    }
}

/// All aligned placements, job by job in start order.
pub fn aligned_domain(smi: &SingleMachineInstance) -> Vec<PlacementVar> {
    let mut out = Vec::new();
    for (j, job) in smi.jobs.iter().enumerate() {
        let mut t = job.release.div_ceil(job.size) * job.size;
        while let Some(v) = PlacementVar::aligned(smi, j, t) {
            out.push(v);
            t += job.size;
        }
    }
    out
}

/// True iff a job repeats in `set` or two of its intervals intersect.
/// Repeated identical entries count once.
pub fn check_contradiction(set: &[PlacementVar]) -> bool {
    for (a, x) in set.iter().enumerate() {
        for y in &set[a + 1..] {
            if x.conflicts(y) {
                return true;
            }
        }
    }
    false
}

/// `x_S = ((1 - eps') / (L + 1))^|S|` on contradiction-free `S`, else 0.
#[derive(Debug, Clone)]
pub struct ClosedFormSolution {
    pub l: u32,
    pub eps_prime: Rational,
    pub instance: SingleMachineInstance,
    pub domain: Vec<PlacementVar>,
    ratio: Rational,
}

pub fn sa_closed_form(l: u32, eps_prime: Rational) -> ClosedFormSolution {
    let instance = gen_tree_instance(l);
    let domain = aligned_domain(&instance);
    let ratio = (Rational::one() - &eps_prime) / int(l as i64 + 1);
    ClosedFormSolution { l, eps_prime, instance, domain, ratio }
}

impl ClosedFormSolution {
    /// `(1 - eps') / (L + 1)`.
    pub fn ratio(&self) -> &Rational {
        &self.ratio
    }

    pub fn value(&self, set: &[PlacementVar]) -> Rational {
        let mut s = set.to_vec();
        s.sort_unstable();
        s.dedup();
        if check_contradiction(&s) {
            return Rational::zero();
        }
        num_traits::pow(self.ratio.clone(), s.len())
    }

    /// Value of a set of domain indices.
    pub fn value_of(&self, idx: &[usize]) -> Rational {
        let set: Vec<PlacementVar> = idx.iter().map(|&i| self.domain[i]).collect();
        self.value(&set)
    }

    /// Table over all subsets of the domain up to `level`.
    pub fn to_table(&self, level: usize) -> LiftedSolution {
        let values: BTreeMap<Vec<u32>, Rational> = subsets_up_to(self.domain.len(), level)
            .into_iter()
            .map(|s| {
                let idx: Vec<usize> = s.iter().map(|&i| i as usize).collect();
                let v = self.value_of(&idx);
                (s, v)
            })
            .collect();
        LiftedSolution::Table { level, values }
    }
}
