use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::model::TaskRef;
use crate::rational::Rational;

use super::SaError;

/// Task `task` runs on `machine` at `slot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Event {
    pub task: TaskRef,
    pub machine: usize,
    pub slot: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VarLabel {
    Event(Event),
    /// Lifted variable over a set of base variable indices.
    Subset(Vec<u32>),
    Generic(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub coeffs: Vec<(usize, Rational)>,
    pub rel: Relation,
    pub rhs: Rational,
    /// Family tag, e.g. "assign" or "capacity".
    pub family: &'static str,
}

impl Row {
    pub fn activity(&self, x: &[Rational]) -> Rational {
        self.coeffs.iter().map(|(i, a)| a * &x[*i]).sum()
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        let v = self.activity(x);
        match self.rel {
            Relation::Le => v <= self.rhs,
            Relation::Eq => v == self.rhs,
            Relation::Ge => v >= self.rhs,
        }
    }

    /// Satisfied by every point of the unit box.
    pub fn is_redundant(&self) -> bool {
        let lo: Rational = self.coeffs.iter().filter(|(_, a)| a.is_negative()).map(|(_, a)| a.clone()).sum();
        let hi: Rational = self.coeffs.iter().filter(|(_, a)| a.is_positive()).map(|(_, a)| a.clone()).sum();
        match self.rel {
            Relation::Le => hi <= self.rhs,
            Relation::Ge => lo >= self.rhs,
            Relation::Eq => lo == self.rhs && hi == self.rhs,
        }
    }
}

/// Feasibility LP over variables in `[0, 1]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearProgram {
    vars: Vec<VarLabel>,
    rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, label: VarLabel) -> usize {
        self.vars.push(label);
        self.vars.len() - 1
    }

    /// Adds a row; zero coefficients are dropped and repeated variables merged.
    pub fn add_row(
        &mut self,
        coeffs: Vec<(usize, Rational)>,
        rel: Relation,
        rhs: Rational,
        family: &'static str,
    ) -> Result<(), SaError> {
        let mut c = coeffs;
        c.sort_by_key(|(i, _)| *i);
        let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(c.len());
        for (i, a) in c {
            if i >= self.vars.len() {
                return Err(SaError::UnknownVariable(i));
            }
            match merged.last_mut() {
                Some((j, b)) if *j == i => *b += a,
                _ => merged.push((i, a)),
            }
        }
        merged.retain(|(_, a)| !a.is_zero());
        self.rows.push(Row { coeffs: merged, rel, rhs, family });
        Ok(())
    }

    pub fn vars(&self) -> &[VarLabel] {
        &self.vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn count_family(&self, family: &str) -> usize {
        self.rows.iter().filter(|r| r.family == family).count()
    }

    /// Whether `x` lies in the unit box and satisfies every row.
    pub fn is_satisfied(&self, x: &[Rational]) -> bool {
        x.len() == self.vars.len()
            && x.iter().all(|v| !v.is_negative() && *v <= Rational::from_integer(1.into()))
            && self.rows.iter().all(|r| r.holds(x))
    }

    pub fn violated_rows(&self, x: &[Rational]) -> Vec<usize> {
        (0..self.rows.len()).filter(|&i| !self.rows[i].holds(x)).collect()
    }
}
