use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

use super::lift::{subsets_up_to, LiftedLp};
use super::SaError;

/// A point of a lifted LP, indexed by sets of base variables.
///
/// `Table` stores every subset up to its level. `Mixture` is a convex
/// combination of 0/1 points, given by the sets of events that are 1; its
/// subset values are probabilities and exist at every size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LiftedSolution {
    Table { level: usize, values: BTreeMap<Vec<u32>, Rational> },
    Mixture { level: usize, support: Vec<(Rational, BTreeSet<u32>)> },
}

impl LiftedSolution {
    /// Reads a solution of `lifted` back into subset form.
    pub fn from_point(lifted: &LiftedLp, x: &[Rational]) -> Self {
        let mut values: BTreeMap<Vec<u32>, Rational> = lifted.subsets().map(|(s, i)| (s.clone(), x[i].clone())).collect();
        values.insert(Vec::new(), Rational::one());
        LiftedSolution::Table { level: lifted.level, values }
    }

    /// Mixture over integral points; weights are normalized and merged.
    pub fn mixture(level: usize, points: Vec<(Rational, BTreeSet<u32>)>) -> Result<Self, SaError> {
        let total: Rational = points.iter().map(|(w, _)| w.clone()).sum();
        if !total.is_positive() || points.iter().any(|(w, _)| w.is_negative()) {
            return Err(SaError::ZeroMass);
        }
        let mut merged: BTreeMap<BTreeSet<u32>, Rational> = BTreeMap::new();
        for (w, s) in points {
            if w.is_positive() {
                *merged.entry(s).or_insert_with(Rational::zero) += w / &total;
            }
        }
        Ok(LiftedSolution::Mixture { level, support: merged.into_iter().map(|(s, w)| (w, s)).collect() })
    }

    pub fn level(&self) -> usize {
        match self {
            LiftedSolution::Table { level, .. } | LiftedSolution::Mixture { level, .. } => *level,
        }
    }

    pub fn value(&self, subset: &[u32]) -> Result<Rational, SaError> {
        let mut s = subset.to_vec();
        s.sort_unstable();
        s.dedup();
        match self {
            LiftedSolution::Table { level, values } => {
                if s.len() > *level {
                    return Err(SaError::MissingSubset(s));
                }
                Ok(values.get(&s).cloned().unwrap_or_else(Rational::zero))
            }
            LiftedSolution::Mixture { support, .. } => {
                Ok(support.iter().filter(|(_, set)| s.iter().all(|e| set.contains(e))).map(|(w, _)| w.clone()).sum())
            }
        }
    }

    pub fn marginal(&self, event: u32) -> Rational {
        self.value(&[event]).expect("singletons exist at level >= 1")
    }

    /// Events with positive marginal.
    pub fn support(&self) -> BTreeSet<u32> {
        match self {
            LiftedSolution::Table { values, .. } => values
                .iter()
                .filter(|(s, v)| s.len() == 1 && v.is_positive())
                .map(|(s, _)| s[0])
                .collect(),
            LiftedSolution::Mixture { support, .. } => support.iter().flat_map(|(_, s)| s.iter().copied()).collect(),
        }
    }

    /// Conditions on `event`: `x'_S = x_{S ∪ {event}} / x_event`, one level lower.
    pub fn condition(&self, event: u32) -> Result<LiftedSolution, SaError> {
        if self.level() < 2 {
            return Err(SaError::LevelExhausted);
        }
        let mass = self.marginal(event);
        if mass.is_zero() {
            return Err(SaError::ZeroMass);
        }
        Ok(match self {
            LiftedSolution::Table { level, values } => {
                let mut out = BTreeMap::new();
                for s in values.keys().filter(|s| s.len() < *level) {
                    let mut with = s.clone();
                    if let Err(pos) = with.binary_search(&event) {
                        with.insert(pos, event);
                    }
                    let v = values.get(&with).cloned().unwrap_or_else(Rational::zero);
                    out.insert(s.clone(), v / &mass);
                }
                LiftedSolution::Table { level: level - 1, values: out }
            }
            LiftedSolution::Mixture { level, support } => LiftedSolution::Mixture {
                level: level - 1,
                support: support
                    .iter()
                    .filter(|(_, s)| s.contains(&event))
                    .map(|(w, s)| (w / &mass, s.clone()))
                    .collect(),
            },
        })
    }

    /// Checks x_∅ = 1, values in [0, 1] and monotonicity under inclusion.
    pub fn check_invariants(&self) -> Result<(), String> {
        match self {
            LiftedSolution::Table { values, .. } => {
                if values.get(&Vec::new()) != Some(&Rational::one()) {
                    return Err("x_empty != 1".into());
                }
                for (s, v) in values {
                    if v.is_negative() || *v > Rational::one() {
                        return Err(format!("x_{s:?} = {v} outside [0, 1]"));
                    }
                    for k in 0..s.len() {
                        let mut smaller = s.clone();
                        smaller.remove(k);
                        if let Some(w) = values.get(&smaller) {
                            if w < v {
                                return Err(format!("x_{smaller:?} = {w} < x_{s:?} = {v}"));
                            }
                        }
                    }
                }
                Ok(())
            }
            LiftedSolution::Mixture { support, .. } => {
                let total: Rational = support.iter().map(|(w, _)| w.clone()).sum();
                if total != Rational::one() || support.iter().any(|(w, _)| !w.is_positive()) {
                    return Err("mixture weights are not a distribution".into());
                }
                Ok(())
            }
        }
    }

    /// Whether this solution satisfies `lifted` (which must be at this level or lower).
    pub fn satisfies(&self, lifted: &LiftedLp) -> Result<bool, SaError> {
        let mut x = vec![Rational::zero(); lifted.lp.num_vars()];
        for (s, i) in lifted.subsets() {
            x[i] = self.value(s)?;
        }
        Ok(lifted.lp.is_satisfied(&x))
    }

    /// Table form over `n` base variables up to `level`.
    pub fn to_table(&self, n: usize, level: usize) -> Result<LiftedSolution, SaError> {
        let mut values = BTreeMap::new();
        for s in subsets_up_to(n, level) {
            let v = self.value(&s)?;
            values.insert(s, v);
        }
        Ok(LiftedSolution::Table { level, values })
    }
}
