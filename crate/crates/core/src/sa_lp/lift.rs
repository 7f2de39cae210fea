//! Sherali-Adams lifting of a unit-box LP.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::rational::{int, Rational};

use super::lp::{LinearProgram, Relation, Row, VarLabel};
use super::SaError;

#[derive(Debug, Clone)]
pub struct LiftCaps {
    pub max_vars: usize,
    pub max_rows: usize,
    pub max_level: usize,
}

impl Default for LiftCaps {
    fn default() -> Self {
        LiftCaps { max_vars: 200_000, max_rows: 2_000_000, max_level: 4 }
    }
}

/// Lifted LP over the nonempty subsets of at most `level` base variables;
/// the empty set is the constant 1.
#[derive(Debug, Clone)]
pub struct LiftedLp {
    pub lp: LinearProgram,
    pub base_vars: usize,
    pub level: usize,
    index: HashMap<Vec<u32>, usize>,
}

impl LiftedLp {
    pub fn var(&self, subset: &[u32]) -> Option<usize> {
        self.index.get(subset).copied()
    }

    pub fn subsets(&self) -> impl Iterator<Item = (&Vec<u32>, usize)> {
        self.index.iter().map(|(s, &i)| (s, i))
    }
}

fn binom(n: usize, k: usize) -> usize {
    let mut r: usize = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// All sorted subsets of `0..n` with at most `k` elements, by size then lexicographically.
pub fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.last().map_or(0, |&x: &u32| x + 1);
            for i in start..n as u32 {
                let mut t = s.clone();
                t.push(i);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn union(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut v: Vec<u32> = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}

pub fn sa_lift(lp: &LinearProgram, r: usize) -> Result<LiftedLp, SaError> {
    sa_lift_with(lp, r, &LiftCaps::default())
}

pub fn sa_lift_with(lp: &LinearProgram, r: usize, caps: &LiftCaps) -> Result<LiftedLp, SaError> {
    if r == 0 {
        return Err(SaError::BadLevel(r));
    }
    if r > caps.max_level {
        return Err(SaError::SizeBlowup(format!("level {r} > {}", caps.max_level)));
    }
    let n = lp.num_vars();
    let nvars: usize = (1..=r).map(|k| binom(n, k)).fold(0usize, |a, b| a.saturating_add(b));
    if nvars > caps.max_vars {
        return Err(SaError::SizeBlowup(format!("{nvars} lifted variables > {}", caps.max_vars)));
    }
    let multipliers: usize = (0..r).map(|k| binom(n, k).saturating_mul(1 << k)).fold(0usize, |a, b| a.saturating_add(b));
    let nrows = (lp.num_rows() + 2 * n).saturating_mul(multipliers);
    if nrows > caps.max_rows {
        return Err(SaError::SizeBlowup(format!("{nrows} lifted rows > {}", caps.max_rows)));
    }

    let mut out = LinearProgram::new();
    let mut index = HashMap::new();
    for s in subsets_up_to(n, r).into_iter().skip(1) {
        let v = out.add_var(if r == 1 { lp.vars()[s[0] as usize].clone() } else { VarLabel::Subset(s.clone()) });
        index.insert(s, v);
    }

    let bound_rows: Vec<Row> = (0..n)
        .flat_map(|i| {
            [
                Row { coeffs: vec![(i, int(1))], rel: Relation::Le, rhs: int(1), family: "upper" },
                Row { coeffs: vec![(i, int(1))], rel: Relation::Ge, rhs: int(0), family: "lower" },
            ]
        })
        .collect();

    for u in subsets_up_to(n, r - 1) {
        let k = u.len();
        for mask in 0..(1u32 << k) {
            let s: Vec<u32> = (0..k).filter(|b| mask & (1 << b) == 0).map(|b| u[b]).collect();
            let t: Vec<u32> = (0..k).filter(|b| mask & (1 << b) != 0).map(|b| u[b]).collect();
            let plain = u.is_empty();
            let rows = lp.rows().iter().chain(if plain { [].iter() } else { bound_rows.iter() });
            for row in rows {
                let mut coeffs: Vec<(usize, Rational)> = Vec::new();
                let mut constant = Rational::zero();
                for tmask in 0..(1u32 << t.len()) {
                    let tp: Vec<u32> = (0..t.len()).filter(|b| tmask & (1 << b) != 0).map(|b| t[b]).collect();
                    let sign = if tp.len().is_multiple_of(2) { Rational::one() } else { -Rational::one() };
                    let base = union(&s, &tp);
                    for (i, a) in &row.coeffs {
                        let set = union(&base, &[*i as u32]);
                        coeffs.push((index[&set], &sign * a));
                    }
                    let term = -(&sign * &row.rhs);
                    if base.is_empty() {
                        constant += term;
                    } else {
                        coeffs.push((index[&base], term));
                    }
                }
                out.add_row(coeffs, row.rel, -constant, row.family)?;
            }
        }
    }
    Ok(LiftedLp { lp: out, base_vars: n, level: r, index })
}
