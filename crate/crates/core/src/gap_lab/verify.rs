//! Mechanical check of the lifted constraints for the closed-form solution on
//! the tree instance.
//!
//! For a base row `a·x <= b` and disjoint sets `S, R` of placements, the lifted
//! row reads `sum_{R' ⊆ R} (-1)^|R'| (b x_{S∪R'} - sum_i a_i x_{S∪R'∪{i}}) >= 0`;
//! `>=` rows flip the sign. Three families are checked: scheduled-once (one row
//! per job), congestion (one row per slot) and the objective row
//! `sum p_j x_{j,t} >= (1 - eps) T` with `eps = 4 eps'`.
//!
//! The fast path works in scaled integers. A placement that conflicts with
//! nothing in `S ∪ R` contributes `a_i x_{|U|+1}` to every term, so rows whose
//! support avoids `S ∪ R` and its conflicts share one slack per coefficient
//! total. Failures are re-evaluated term by term with exact rationals.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::gen::rng;
use crate::rational::{self, int, Rational};

use super::tree::{check_contradiction, sa_closed_form, ClosedFormSolution, PlacementVar};

/// Largest number of `(S, R)` pairs an exhaustive run may enumerate.
pub const EXHAUSTIVE_CAP: u64 = 2_000_000;
const MAX_EXAMPLES: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("size cap exceeded: {0}")]
    SizeBlowup(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scope {
    Exhaustive,
    Sampled { seed: u64, count: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Scheduled,
    Congestion,
    Objective,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Scheduled, Family::Congestion, Family::Objective];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub s: Vec<PlacementVar>,
    pub r: Vec<PlacementVar>,
    /// Job index for scheduled rows, slot for congestion rows, 0 for the objective.
    pub row: usize,
    #[serde(with = "rational::serde_str")]
    pub slack: Rational,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FamilyReport {
    pub checked: u64,
    pub failed: u64,
    pub examples: Vec<Counterexample>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Families {
    pub scheduled: FamilyReport,
    pub congestion: FamilyReport,
    pub objective: FamilyReport,
}

impl Families {
    fn get_mut(&mut self, f: Family) -> &mut FamilyReport {
        match f {
            Family::Scheduled => &mut self.scheduled,
            Family::Congestion => &mut self.congestion,
            Family::Objective => &mut self.objective,
        }
    }

    pub fn get(&self, f: Family) -> &FamilyReport {
        match f {
            Family::Scheduled => &self.scheduled,
            Family::Congestion => &self.congestion,
            Family::Objective => &self.objective,
        }
    }

    pub fn all_passed(&self) -> bool {
        Family::ALL.iter().all(|&f| self.get(f).failed == 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Preconditions {
    #[serde(rename = "q_le_eps_L1")]
    pub q_le_eps_l1: bool,
    #[serde(rename = "q_le_L1_over_4")]
    pub q_le_l1_over_4: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    #[serde(rename = "L")]
    pub l: u32,
    #[serde(with = "rational::serde_str")]
    pub eps_prime: Rational,
    pub q: usize,
    pub scope: Scope,
    pub families: Families,
    pub preconditions: Preconditions,
    /// Number of `(S, R)` pairs evaluated.
    pub pairs: u64,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        rational::to_canonical_json(self).expect("report serializes")
    }
}

/// One base row: `(domain index, coefficient)` pairs.
#[derive(Debug, Clone)]
struct BaseRow {
    family: Family,
    key: usize,
    support: Vec<(usize, i64)>,
}

/// Rows of the three families over the domain of `cf`.
struct RowSet {
    rows: Vec<BaseRow>,
    /// Rows each domain index appears in, with its coefficient there.
    rows_of: Vec<Vec<(usize, i64)>>,
    totals: Vec<i64>,
    /// For each family, coefficient total to the rows with that total.
    classes: BTreeMap<(Family, i64), Vec<usize>>,
    /// `(1 - eps) T` as `en / ed`.
    objective_rhs: Rational,
}

impl RowSet {
    fn new(cf: &ClosedFormSolution) -> Self {
        let dom = &cf.domain;
        let mut rows = Vec::new();
        for j in 0..cf.instance.len() {
            let support = (0..dom.len()).filter(|&i| dom[i].job == j).map(|i| (i, 1)).collect();
            rows.push(BaseRow { family: Family::Scheduled, key: j, support });
        }
        for t in 1..=cf.instance.horizon {
            let support = (0..dom.len()).filter(|&i| dom[i].covers(t)).map(|i| (i, 1)).collect();
            rows.push(BaseRow { family: Family::Congestion, key: t as usize, support });
        }
        let support = (0..dom.len()).map(|i| (i, dom[i].len as i64)).collect();
        rows.push(BaseRow { family: Family::Objective, key: 0, support });

        let mut rows_of = vec![Vec::new(); dom.len()];
        let mut totals = Vec::with_capacity(rows.len());
        let mut classes: BTreeMap<(Family, i64), Vec<usize>> = BTreeMap::new();
        for (r, row) in rows.iter().enumerate() {
            for &(i, a) in &row.support {
                rows_of[i].push((r, a));
            }
            let total = row.support.iter().map(|(_, a)| a).sum();
            totals.push(total);
            classes.entry((row.family, total)).or_default().push(r);
        }
        let eps = int(4) * &cf.eps_prime;
        let objective_rhs = (Rational::one() - eps) * int(cf.instance.total_size() as i64);
        RowSet { rows, rows_of, totals, classes, objective_rhs }
    }

    fn rhs(&self, f: Family) -> Rational {
        match f {
            Family::Objective => self.objective_rhs.clone(),
            _ => Rational::one(),
        }
    }

    /// +1 for `<=` rows (slack is rhs minus activity), -1 for the `>=` objective.
    fn orientation(f: Family) -> i64 {
        match f {
            Family::Objective => -1,
            _ => 1,
        }
    }
}

/// Scalar arithmetic for the fast path: `i128` when the magnitudes fit, else `BigInt`.
trait Scalar:
    Clone
    + Zero
    + PartialOrd
    + From<i64>
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Neg<Output = Self>
    + Send
    + Sync
{
}

impl Scalar for i128 {}

impl Scalar for BigInt {}

/// Scaled values: `x_U = xs[|U|] / scale`, `rhs_f x_U = rhs_x[f][|U|] / scale`.
struct Scaled<T> {
    xs: Vec<T>,
    rhs_x: BTreeMap<Family, Vec<T>>,
}

impl<T: Scalar> Scaled<T> {
    fn new(cf: &ClosedFormSolution, rows: &RowSet, q: usize, conv: impl Fn(&BigInt) -> T) -> Self {
        // scale = cd^(q+1) * lcm of rhs denominators
        let c = cf.ratio();
        let rhs_den = rows.objective_rhs.denom().clone();
        let mut xs = Vec::new();
        for k in 0..=q + 1 {
            let v = num_traits::pow(c.numer().clone(), k) * num_traits::pow(c.denom().clone(), q + 1 - k) * &rhs_den;
            xs.push(v);
        }
        let mut rhs_x = BTreeMap::new();
        for f in Family::ALL {
            let rhs = rows.rhs(f);
            let scaled: Vec<T> = xs
                .iter()
                .map(|x| {
                    let v = Rational::from_integer(x.clone()) * &rhs;
                    debug_assert!(v.is_integer());
                    conv(&v.to_integer())
                })
                .collect();
            rhs_x.insert(f, scaled);
        }
        Scaled { xs: xs.iter().map(&conv).collect(), rhs_x }
    }
}

/// Evaluates every row for one `(S, R)` pair.
struct PairEval<'a, T> {
    cf: &'a ClosedFormSolution,
    rows: &'a RowSet,
    scaled: &'a Scaled<T>,
}

#[derive(Debug, Default)]
struct PairOutcome {
    checked: [u64; 3],
    failed: [u64; 3],
    /// Failing rows, first few per family.
    failures: Vec<(Family, usize)>,
}

fn family_pos(f: Family) -> usize {
    match f {
        Family::Scheduled => 0,
        Family::Congestion => 1,
        Family::Objective => 2,
    }
}

impl<T: Scalar> PairEval<'_, T> {
    fn run(&self, s: &[usize], r: &[usize]) -> PairOutcome {
        let dom = &self.cf.domain;
        let mut out = PairOutcome::default();
        for (&(f, _), members) in &self.rows.classes {
            out.checked[family_pos(f)] += members.len() as u64;
        }

        // terms: (sign, U) for R' ⊆ R with S ∪ R' contradiction-free
        let mut terms: Vec<(bool, Vec<usize>)> = Vec::new();
        for mask in 0..(1u32 << r.len()) {
            let mut u: Vec<usize> = s.to_vec();
            u.extend((0..r.len()).filter(|b| mask & (1 << b) != 0).map(|b| r[b]));
            let places: Vec<PlacementVar> = u.iter().map(|&i| dom[i]).collect();
            if !check_contradiction(&places) {
                terms.push((mask.count_ones() % 2 == 1, u));
            }
        }
        if terms.is_empty() {
            return out;
        }

        // placements equal to or in conflict with something in S ∪ R
        let base: Vec<usize> = s.iter().chain(r).copied().collect();
        let touched: Vec<usize> = (0..dom.len())
            .filter(|&i| base.iter().any(|&b| b == i || dom[b].conflicts(&dom[i])))
            .collect();
        let mut touched_in_row: BTreeMap<usize, Vec<(usize, i64)>> = BTreeMap::new();
        for &i in &touched {
            for &(row, a) in &self.rows.rows_of[i] {
                touched_in_row.entry(row).or_default().push((i, a));
            }
        }

        let x_with = |u: &[usize], i: usize| -> T {
            if u.contains(&i) {
                self.scaled.xs[u.len()].clone()
            } else if u.iter().any(|&b| dom[b].conflicts(&dom[i])) {
                T::zero()
            } else {
                self.scaled.xs[u.len() + 1].clone()
            }
        };

        // rows untouched by S ∪ R: one slack per class
        for (&(f, total), members) in &self.rows.classes {
            let free = members.iter().filter(|r| !touched_in_row.contains_key(r)).count() as u64;
            if free == 0 {
                continue;
            }
            let mut acc = T::zero();
            for (odd, u) in &terms {
                let k = u.len();
                let term = self.scaled.rhs_x[&f][k].clone() - T::from(total) * self.scaled.xs[k + 1].clone();
                acc = if *odd { acc - term } else { acc + term };
            }
            if RowSet::orientation(f) < 0 {
                acc = -acc;
            }
            if acc < T::zero() {
                out.failed[family_pos(f)] += free;
                if let Some(&row) = members.iter().find(|r| !touched_in_row.contains_key(r)) {
                    out.failures.push((f, row));
                }
            }
        }

        for (&row_idx, hits) in &touched_in_row {
            let f = self.rows.rows[row_idx].family;
            let total = self.rows.totals[row_idx];
            let hit_total: i64 = hits.iter().map(|(_, a)| a).sum();
            let mut acc = T::zero();
            for (odd, u) in &terms {
                let k = u.len();
                let mut activity = T::from(total - hit_total) * self.scaled.xs[k + 1].clone();
                for &(i, a) in hits {
                    activity = activity + T::from(a) * x_with(u, i);
                }
                let term = self.scaled.rhs_x[&f][k].clone() - activity;
                acc = if *odd { acc - term } else { acc + term };
            }
            if RowSet::orientation(f) < 0 {
                acc = -acc;
            }
            if acc < T::zero() {
                out.failed[family_pos(f)] += 1;
                out.failures.push((f, row_idx));
            }
        }
        out
    }
}

/// Exact lifted slack of one row, term by term with rational values.
fn exact_slack(cf: &ClosedFormSolution, rows: &RowSet, row_idx: usize, s: &[usize], r: &[usize]) -> Rational {
    let row = &rows.rows[row_idx];
    let rhs = rows.rhs(row.family);
    let mut acc = Rational::zero();
    for mask in 0..(1u32 << r.len()) {
        let mut u: Vec<usize> = s.to_vec();
        u.extend((0..r.len()).filter(|b| mask & (1 << b) != 0).map(|b| r[b]));
        let mut term = &rhs * cf.value_of(&u);
        for &(i, a) in &row.support {
            let mut ui = u.clone();
            ui.push(i);
            term -= int(a) * cf.value_of(&ui);
        }
        if mask.count_ones() % 2 == 1 {
            acc -= term;
        } else {
            acc += term;
        }
    }
    if RowSet::orientation(row.family) < 0 {
        -acc
    } else {
        acc
    }
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// All subsets of `0..n` of size `k`, lexicographic.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn exhaustive_pairs(n: usize, q: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    for s_size in 0..=q {
        for s in combinations(n, s_size) {
            for r_size in 0..=q - s_size {
                for r in combinations(n - s_size, r_size) {
                    // map indices of the complement of s back to the domain
                    let rest: Vec<usize> = (0..n).filter(|i| !s.contains(i)).collect();
                    out.push((s.clone(), r.iter().map(|&i| rest[i]).collect()));
                }
            }
        }
    }
    out
}

/// Seeded sampler: sizes uniform with `|S| + |R| <= q`, `S` contradiction-free,
/// `R` uniform among placements outside `S`.
pub fn sample_pairs(cf: &ClosedFormSolution, q: usize, seed: u64, count: u64) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut g = rng(seed);
    let n = cf.domain.len();
    let all: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(count as usize);
    while (out.len() as u64) < count {
        let s_size = g.gen_range(0..=q);
        let r_size = g.gen_range(0..=q - s_size);
        if s_size + r_size > n {
            continue;
        }
        let mut s: Vec<usize> = Vec::new();
        for _ in 0..1000 {
            let cand: Vec<usize> = all.choose_multiple(&mut g, s_size).copied().collect();
            let places: Vec<PlacementVar> = cand.iter().map(|&i| cf.domain[i]).collect();
            if !check_contradiction(&places) {
                s = cand;
                break;
            }
        }
        if s.len() != s_size {
            continue;
        }
        let rest: Vec<usize> = all.iter().copied().filter(|i| !s.contains(i)).collect();
        let r: Vec<usize> = rest.choose_multiple(&mut g, r_size).copied().collect();
        s.sort_unstable();
        out.push((s, r));
    }
    out
}

pub fn verify_lifted_constraints(
    l: u32,
    eps_prime: &Rational,
    q: usize,
    scope: Scope,
) -> Result<VerificationReport, VerifyError> {
    if q == 0 {
        return Err(VerifyError::InvalidParameter("q must be at least 1".into()));
    }
    if !eps_prime.is_positive() || *eps_prime >= Rational::one() {
        return Err(VerifyError::InvalidParameter(format!("eps' = {} outside (0, 1)", rational::format(eps_prime))));
    }
    if l > 12 {
        return Err(VerifyError::SizeBlowup(format!("L = {l} > 12")));
    }
    let cf = sa_closed_form(l, eps_prime.clone());
    let pairs = match scope {
        Scope::Exhaustive => {
            let n = cf.domain.len() as u64;
            let count: u64 = (0..=q as u64)
                .flat_map(|s| (0..=q as u64 - s).map(move |r| (s, r)))
                .map(|(s, r)| binom(n, s).saturating_mul(binom(n.saturating_sub(s), r)))
                .fold(0u64, |a, b| a.saturating_add(b));
            if count > EXHAUSTIVE_CAP {
                return Err(VerifyError::SizeBlowup(format!("{count} (S, R) pairs > {EXHAUSTIVE_CAP}")));
            }
            exhaustive_pairs(cf.domain.len(), q)
        }
        Scope::Sampled { seed, count } => sample_pairs(&cf, q, seed, count),
    };
    let families = evaluate_pairs(&cf, q, &pairs);
    let l1 = int(l as i64 + 1);
    let qr = int(q as i64);
    Ok(VerificationReport {
        l,
        eps_prime: eps_prime.clone(),
        q,
        scope,
        families,
        preconditions: Preconditions { q_le_eps_l1: qr <= eps_prime * &l1, q_le_l1_over_4: qr <= l1 / int(4) },
        pairs: pairs.len() as u64,
    })
}

fn evaluate_pairs(cf: &ClosedFormSolution, q: usize, pairs: &[(Vec<usize>, Vec<usize>)]) -> Families {
    let rows = RowSet::new(cf);
    // magnitude bound for the scaled sums: 2^q * (coefficient total + rhs) * largest x
    let c = cf.ratio();
    let bits = |b: &BigInt| b.bits() as f64;
    let x_bits = (q as f64 + 1.0) * bits(c.numer()).max(bits(c.denom())) + bits(rows.objective_rhs.denom());
    let row_bits = ((cf.instance.total_size() * (cf.l as u64 + 1)) as f64).log2()
        + bits(&rows.objective_rhs.abs().ceil().to_integer())
        + 2.0;
    let fits = x_bits + row_bits + q as f64 + 2.0 < 120.0;
    let outcomes: Vec<PairOutcome> = if fits {
        let scaled = Scaled::<i128>::new(cf, &rows, q, |b| b.to_i128().expect("checked magnitude"));
        let ev = PairEval { cf, rows: &rows, scaled: &scaled };
        pairs.par_iter().map(|(s, r)| ev.run(s, r)).collect()
    } else {
        let scaled = Scaled::<BigInt>::new(cf, &rows, q, |b| b.clone());
        let ev = PairEval { cf, rows: &rows, scaled: &scaled };
        pairs.par_iter().map(|(s, r)| ev.run(s, r)).collect()
    };

    let mut fam = Families::default();
    for ((s, r), o) in pairs.iter().zip(&outcomes) {
        for f in Family::ALL {
            let rep = fam.get_mut(f);
            rep.checked += o.checked[family_pos(f)];
            rep.failed += o.failed[family_pos(f)];
        }
        for &(f, row_idx) in &o.failures {
            let rep = fam.get_mut(f);
            if rep.examples.len() < MAX_EXAMPLES {
                let slack = exact_slack(cf, &rows, row_idx, s, r);
                debug_assert!(slack.is_negative(), "fast and exact paths disagree");
                rep.examples.push(Counterexample {
                    s: s.iter().map(|&i| cf.domain[i]).collect(),
                    r: r.iter().map(|&i| cf.domain[i]).collect(),
                    row: rows.rows[row_idx].key,
                    slack,
                });
            }
        }
    }
    fam
}

/// Exact term-by-term evaluation of every row for the given pairs. Slow; used
/// to cross-check the fast path.
pub fn verify_pairs_exact(cf: &ClosedFormSolution, pairs: &[(Vec<usize>, Vec<usize>)]) -> BTreeMap<Family, (u64, u64)> {
    let rows = RowSet::new(cf);
    let mut out: BTreeMap<Family, (u64, u64)> = Family::ALL.iter().map(|&f| (f, (0, 0))).collect();
    for (s, r) in pairs {
        for (idx, row) in rows.rows.iter().enumerate() {
            let e = out.get_mut(&row.family).expect("all families");
            e.0 += 1;
            if exact_slack(cf, &rows, idx, s, r).is_negative() {
                e.1 += 1;
            }
        }
    }
    out
}

/// Fast-path counts for explicit pairs, in the same shape as [`verify_pairs_exact`].
pub fn verify_pairs_fast(cf: &ClosedFormSolution, q: usize, pairs: &[(Vec<usize>, Vec<usize>)]) -> BTreeMap<Family, (u64, u64)> {
    let fam = evaluate_pairs(cf, q, pairs);
    Family::ALL.iter().map(|&f| (f, (fam.get(f).checked, fam.get(f).failed))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn exhaustive_small_regime_passes() {
        let rep = verify_lifted_constraints(3, &ratio(1, 4), 1, Scope::Exhaustive).unwrap();
        assert_eq!(rep.pairs, 121);
        assert!(rep.families.all_passed(), "{}", rep.to_json());
        assert_eq!(rep.families.scheduled.checked, 121 * 15);
        assert_eq!(rep.families.congestion.checked, 121 * 32);
        assert_eq!(rep.families.objective.checked, 121);
        assert!(rep.preconditions.q_le_eps_l1 && rep.preconditions.q_le_l1_over_4);
    }

    #[test]
    fn fast_path_matches_exact_evaluation() {
        for (l, e, q) in [(1u32, ratio(1, 4), 2usize), (3, ratio(1, 4), 2), (1, ratio(1, 10), 3), (0, ratio(1, 10), 2)] {
            let cf = sa_closed_form(l, e.clone());
            let pairs = sample_pairs(&cf, q, 7, 60);
            assert_eq!(verify_pairs_fast(&cf, q, &pairs), verify_pairs_exact(&cf, &pairs), "L={l} eps'={e} q={q}");
        }
        // outside the proven regime the checks do fail, and both paths agree on where
        let cf = sa_closed_form(1, ratio(1, 10));
        let pairs = exhaustive_pairs(cf.domain.len(), 3);
        let fast = verify_pairs_fast(&cf, 3, &pairs);
        assert_eq!(fast, verify_pairs_exact(&cf, &pairs));
        assert!(fast.values().all(|&(_, failed)| failed > 0));
    }

    #[test]
    fn breach_is_flagged() {
        let rep = verify_lifted_constraints(3, &ratio(1, 4), 2, Scope::Sampled { seed: 1, count: 200 }).unwrap();
        assert!(!rep.preconditions.q_le_eps_l1);
        assert!(!rep.preconditions.q_le_l1_over_4);
    }

    #[test]
    fn exhaustive_cap() {
        let err = verify_lifted_constraints(7, &ratio(1, 4), 2, Scope::Exhaustive).unwrap_err();
        assert!(matches!(err, VerifyError::SizeBlowup(_)));
        assert!(verify_lifted_constraints(3, &ratio(1, 4), 0, Scope::Exhaustive).is_err());
    }

    #[test]
    fn exhaustive_pairs_are_disjoint_and_complete() {
        let p = exhaustive_pairs(5, 2);
        // 1 + 5 + 5 + C(5,2) + 5*4 + C(5,2)
        assert_eq!(p.len(), 1 + 5 + 5 + 10 + 20 + 10);
        assert!(p.iter().all(|(s, r)| s.iter().all(|i| !r.contains(i))));
    }
}
