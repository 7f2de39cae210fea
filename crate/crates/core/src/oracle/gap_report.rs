//! Base-LP versus integral feasibility across horizons.

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::model::Instance;
use crate::sa_lp::{build_base_lp_with, solve_feasible, BaseLpOptions};

use super::makespan::{feasible_at, Model};
use super::{OracleCaps, OracleError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapRow {
    pub horizon: usize,
    /// Base LP without the machine-marginal rows.
    pub lp_migratory: bool,
    /// Base LP with the machine-marginal rows.
    pub lp: bool,
    pub a: bool,
    pub b: bool,
    pub c: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapReport {
    pub rows: Vec<GapRow>,
    pub first_lp_migratory: Option<usize>,
    pub first_lp: Option<usize>,
    pub first_a: Option<usize>,
    pub first_b: Option<usize>,
    pub first_c: Option<usize>,
}

pub fn lp_gap_report(inst: &Instance, horizons: RangeInclusive<usize>, with_delays: bool) -> Result<GapReport, OracleError> {
    let caps = OracleCaps::default();
    if inst.total_tasks() > caps.max_tasks || inst.machines() > caps.max_machines {
        return Err(OracleError::CapExceeded(format!(
            "N = {}, m = {} above {} / {}",
            inst.total_tasks(),
            inst.machines(),
            caps.max_tasks,
            caps.max_machines
        )));
    }
    let mut rows = Vec::new();
    for t in horizons {
        let lp_feasible = |no_migration: bool| -> Result<bool, OracleError> {
            let opts = BaseLpOptions { no_migration, comm: with_delays, full_precedence: false };
            let base = build_base_lp_with(inst, t, &opts);
            let f = solve_feasible(&base.lp).map_err(|e| OracleError::CapExceeded(e.to_string()))?;
            Ok(f.is_feasible())
        };
        let integral = |m: Model| feasible_at(inst, m, with_delays, t).is_some();
        rows.push(GapRow {
            horizon: t,
            lp_migratory: lp_feasible(false)?,
            lp: lp_feasible(true)?,
            a: integral(Model::A),
            b: integral(Model::B),
            c: integral(Model::C),
        });
    }
    let first = |f: fn(&GapRow) -> bool| rows.iter().find(|r| f(r)).map(|r| r.horizon);
    Ok(GapReport {
        first_lp_migratory: first(|r| r.lp_migratory),
        first_lp: first(|r| r.lp),
        first_a: first(|r| r.a),
        first_b: first(|r| r.b),
        first_c: first(|r| r.c),
        rows,
    })
}
