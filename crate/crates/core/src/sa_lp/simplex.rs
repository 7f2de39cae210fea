//! Exact phase-1 simplex over the unit box.
//!
//! Each row gets an activity variable `y_r = a_r · x` whose bounds come from
//! the relation. The dictionary expresses the basic variables as a linear map
//! of the nonbasic ones; the total bound violation of the basic variables is
//! driven to zero with Bland's rule, stopping at the first breakpoint.

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

use super::lp::{LinearProgram, Relation};
use super::SaError;

/// Cap on dictionary entries (rows × variables).
pub const MAX_DICTIONARY: usize = 4_000_000;
const MAX_PIVOTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Vec<Rational>),
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn point(&self) -> Option<&[Rational]> {
        match self {
            Feasibility::Feasible(x) => Some(x),
            Feasibility::Infeasible => None,
        }
    }
}

pub fn solve_feasible(lp: &LinearProgram) -> Result<Feasibility, SaError> {
    let n = lp.num_vars();
    let mut seen = HashSet::new();
    let mut rows = Vec::new();
    for r in lp.rows() {
        if r.coeffs.is_empty() {
            let zero = Rational::zero();
            let ok = match r.rel {
                Relation::Le => zero <= r.rhs,
                Relation::Eq => zero == r.rhs,
                Relation::Ge => zero >= r.rhs,
            };
            if !ok {
                return Ok(Feasibility::Infeasible);
            }
            continue;
        }
        if r.is_redundant() {
            continue;
        }
        let key = (r.coeffs.clone(), r.rel, r.rhs.clone());
        if seen.insert(key) {
            rows.push(r);
        }
    }
    let m = rows.len();
    if m.saturating_mul(n) > MAX_DICTIONARY {
        return Err(SaError::SizeBlowup(format!("dictionary {m} x {n} exceeds {MAX_DICTIONARY}")));
    }
    if m == 0 {
        return Ok(Feasibility::Feasible(vec![Rational::zero(); n]));
    }

    let mut lower: Vec<Option<Rational>> = vec![Some(Rational::zero()); n];
    let mut upper: Vec<Option<Rational>> = vec![Some(Rational::one()); n];
    let mut dict = vec![vec![Rational::zero(); n]; m];
    for (i, r) in rows.iter().enumerate() {
        for (k, a) in &r.coeffs {
            dict[i][*k] = a.clone();
        }
        let (lo, hi) = match r.rel {
            Relation::Le => (None, Some(r.rhs.clone())),
            Relation::Ge => (Some(r.rhs.clone()), None),
            Relation::Eq => (Some(r.rhs.clone()), Some(r.rhs.clone())),
        };
        lower.push(lo);
        upper.push(hi);
    }
    let mut s = Simplex {
        dict,
        basic: (n..n + m).collect(),
        nonbasic: (0..n).collect(),
        value: vec![Rational::zero(); n + m],
        lower,
        upper,
    };
    s.run()?;
    if s.infeasibility_signs().iter().any(|&c| c != 0) {
        return Ok(Feasibility::Infeasible);
    }
    let x = s.value[..n].to_vec();
    debug_assert!(lp.is_satisfied(&x));
    Ok(Feasibility::Feasible(x))
}

struct Simplex {
    dict: Vec<Vec<Rational>>,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    value: Vec<Rational>,
    lower: Vec<Option<Rational>>,
    upper: Vec<Option<Rational>>,
}

enum Step {
    Flip,
    Pivot(usize, Rational),
}

impl Simplex {
    /// −1 below the lower bound, +1 above the upper bound, 0 otherwise.
    fn infeasibility_signs(&self) -> Vec<i8> {
        self.basic
            .iter()
            .map(|&v| {
                let x = &self.value[v];
                if self.lower[v].as_ref().is_some_and(|l| x < l) {
                    -1
                } else if self.upper[v].as_ref().is_some_and(|u| x > u) {
                    1
                } else {
                    0
                }
            })
            .collect()
    }

    fn run(&mut self) -> Result<(), SaError> {
        for _ in 0..MAX_PIVOTS {
            let cost = self.infeasibility_signs();
            if cost.iter().all(|&c| c == 0) {
                return Ok(());
            }
            let Some((col, dir)) = self.entering(&cost) else {
                return Ok(());
            };
            let (theta, step) = self.ratio(col, dir, &cost);
            let delta = if dir > 0 { theta.clone() } else { -theta.clone() };
            let var = self.nonbasic[col];
            self.value[var] += &delta;
            for r in 0..self.basic.len() {
                if !self.dict[r][col].is_zero() {
                    let change = &self.dict[r][col] * &delta;
                    self.value[self.basic[r]] += change;
                }
            }
            if let Step::Pivot(row, bound) = step {
                let leaving = self.basic[row];
                self.value[leaving] = bound;
                self.pivot(row, col);
            }
        }
        Err(SaError::SolverStall(MAX_PIVOTS))
    }

    /// Lowest-index nonbasic variable whose move reduces total infeasibility.
    fn entering(&self, cost: &[i8]) -> Option<(usize, i8)> {
        let mut best: Option<(usize, usize, i8)> = None;
        for (col, &var) in self.nonbasic.iter().enumerate() {
            if best.is_some_and(|(v, _, _)| v < var) {
                continue;
            }
            let mut d = Rational::zero();
            for (r, &c) in cost.iter().enumerate() {
                if c != 0 && !self.dict[r][col].is_zero() {
                    if c > 0 {
                        d += &self.dict[r][col];
                    } else {
                        d -= &self.dict[r][col];
                    }
                }
            }
            let x = &self.value[var];
            let can_up = self.upper[var].as_ref().is_none_or(|u| x < u);
            let can_down = self.lower[var].as_ref().is_none_or(|l| x > l);
            let dir = if d.is_negative() && can_up {
                1
            } else if d.is_positive() && can_down {
                -1
            } else {
                continue;
            };
            best = Some((var, col, dir));
        }
        best.map(|(_, col, dir)| (col, dir))
    }

    fn ratio(&self, col: usize, dir: i8, cost: &[i8]) -> (Rational, Step) {
        let var = self.nonbasic[col];
        let mut best: Option<(Rational, usize, Step)> = None;
        let offer = |theta: Rational, tie: usize, step: Step, best: &mut Option<(Rational, usize, Step)>| {
            let better = match best {
                None => true,
                Some((t, v, _)) => theta < *t || (theta == *t && tie < *v),
            };
            if better {
                *best = Some((theta, tie, step));
            }
        };
        if let (Some(l), Some(u)) = (&self.lower[var], &self.upper[var]) {
            offer(u - l, var, Step::Flip, &mut best);
        }
        for (r, &b) in self.basic.iter().enumerate() {
            let a = &self.dict[r][col];
            if a.is_zero() {
                continue;
            }
            let rate = if dir > 0 { a.clone() } else { -a.clone() };
            let x = &self.value[b];
            let target = match (cost[r], rate.is_positive()) {
                (0, true) | (1, false) => self.upper[b].clone(),
                (0, false) | (-1, true) => self.lower[b].clone(),
                _ => None,
            };
            if let Some(t) = target {
                let theta = (&t - x) / &rate;
                offer(theta, b, Step::Pivot(r, t), &mut best);
            }
        }
        let (theta, _, step) = best.expect("an improving direction reaches a breakpoint");
        (theta, step)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let n = self.nonbasic.len();
        let piv = self.dict[row][col].clone();
        let mut new_row = vec![Rational::zero(); n];
        for q in 0..n {
            if q == col {
                new_row[q] = piv.recip();
            } else if !self.dict[row][q].is_zero() {
                new_row[q] = -&self.dict[row][q] / &piv;
            }
        }
        for r in 0..self.basic.len() {
            if r == row || self.dict[r][col].is_zero() {
                continue;
            }
            let f = self.dict[r][col].clone();
            for q in 0..n {
                if q == col {
                    self.dict[r][q] = &f * &new_row[col];
                } else if !new_row[q].is_zero() {
                    let add = &f * &new_row[q];
                    self.dict[r][q] += add;
                }
            }
        }
        self.dict[row] = new_row;
        std::mem::swap(&mut self.basic[row], &mut self.nonbasic[col]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::sa_lp::lp::VarLabel;

    fn one_var() -> LinearProgram {
        let mut lp = LinearProgram::new();
        lp.add_var(VarLabel::Generic("x1".into()));
        lp
    }

    #[test]
    fn trivial_examples() {
        let mut lp = one_var();
        lp.add_row(vec![(0, int(1))], Relation::Eq, int(1), "t").unwrap();
        assert_eq!(solve_feasible(&lp).unwrap(), Feasibility::Feasible(vec![int(1)]));
        let mut lp = one_var();
        lp.add_row(vec![(0, int(1))], Relation::Ge, int(2), "t").unwrap();
        assert_eq!(solve_feasible(&lp).unwrap(), Feasibility::Infeasible);
    }

    #[test]
    fn small_system() {
        // x + y = 3/2, x - y >= 1/2, y >= 1/4
        let mut lp = LinearProgram::new();
        lp.add_var(VarLabel::Generic("x".into()));
        lp.add_var(VarLabel::Generic("y".into()));
        let h = |a: i64, b: i64| crate::rational::ratio(a, b);
        lp.add_row(vec![(0, int(1)), (1, int(1))], Relation::Eq, h(3, 2), "a").unwrap();
        lp.add_row(vec![(0, int(1)), (1, int(-1))], Relation::Ge, h(1, 2), "b").unwrap();
        lp.add_row(vec![(1, int(1))], Relation::Ge, h(1, 4), "c").unwrap();
        let f = solve_feasible(&lp).unwrap();
        assert!(lp.is_satisfied(f.point().unwrap()));
        lp.add_row(vec![(1, int(1))], Relation::Ge, h(3, 4), "d").unwrap();
        assert_eq!(solve_feasible(&lp).unwrap(), Feasibility::Infeasible);
    }
}
