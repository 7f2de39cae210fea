//! LP text export.

use std::fmt::Write;

use num_integer::Integer;
use num_traits::{One, Signed};

use crate::model::Instance;
use crate::rational::Rational;

use super::lp::{LinearProgram, Relation, VarLabel};

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect()
}

pub fn var_name(lp: &LinearProgram, inst: Option<&Instance>, v: usize) -> String {
    match &lp.vars()[v] {
        VarLabel::Event(e) => match inst {
            Some(inst) => format!("x_{}_{}_{}_{}", sanitize(inst.id(e.task.job)), e.task.index, e.machine, e.slot),
            None => format!("x_j{}_{}_{}_{}", e.task.job, e.task.index, e.machine, e.slot),
        },
        VarLabel::Subset(s) => {
            let parts: Vec<String> = s.iter().map(|i| i.to_string()).collect();
            format!("xs_{}", parts.join("_"))
        }
        VarLabel::Generic(name) => format!("v_{}", sanitize(name)),
    }
}

/// Writes `lp` in the CPLEX LP text format with objective `min 0`; each row
/// is scaled to integer coefficients.
pub fn export_lp(lp: &LinearProgram, inst: Option<&Instance>) -> String {
    let names: Vec<String> = (0..lp.num_vars()).map(|v| var_name(lp, inst, v)).collect();
    let mut out = String::new();
    out.push_str("\\ feasibility LP\nMinimize\n obj: 0");
    if let Some(first) = names.first() {
        write!(out, " {first}").unwrap();
    }
    out.push_str("\nSubject To\n");
    for (k, row) in lp.rows().iter().enumerate() {
        let scale = row
            .coeffs
            .iter()
            .map(|(_, a)| a.denom().clone())
            .chain(std::iter::once(row.rhs.denom().clone()))
            .fold(num_bigint::BigInt::one(), |acc, d| acc.lcm(&d));
        let scale = Rational::from_integer(scale);
        write!(out, " {}_{}:", row.family, k + 1).unwrap();
        if row.coeffs.is_empty() {
            write!(out, " 0 {}", names.first().map(String::as_str).unwrap_or("x")).unwrap();
        }
        for (i, (v, a)) in row.coeffs.iter().enumerate() {
            let c = (a * &scale).to_integer();
            let sign = if c.is_negative() { "- " } else if i == 0 { "" } else { "+ " };
            let mag = c.abs();
            if mag.is_one() {
                write!(out, " {sign}{}", names[*v]).unwrap();
            } else {
                write!(out, " {sign}{mag} {}", names[*v]).unwrap();
            }
        }
        let rel = match row.rel {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        let rhs = (&row.rhs * &scale).to_integer();
        writeln!(out, " {rel} {rhs}").unwrap();
    }
    out.push_str("Bounds\n");
    for n in &names {
        writeln!(out, " 0 <= {n} <= 1").unwrap();
    }
    out.push_str("End\n");
    out
}
