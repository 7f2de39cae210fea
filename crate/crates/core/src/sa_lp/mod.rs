//! Exact-rational LPs: the time-indexed scheduling LP, Sherali-Adams lifting,
//! conditioning, and a feasibility solver.

mod base;
mod export;
mod lift;
mod lp;
mod simplex;
mod solution;

use thiserror::Error;

pub use base::{build_base_lp, build_base_lp_with, BaseLp, BaseLpOptions};
pub use export::{export_lp, var_name};
pub use lift::{sa_lift, sa_lift_with, subsets_up_to, LiftCaps, LiftedLp};
pub use lp::{Event, LinearProgram, Relation, Row, VarLabel};
pub use simplex::{solve_feasible, Feasibility, MAX_DICTIONARY};
pub use solution::LiftedSolution;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SaError {
    #[error("size cap exceeded: {0}")]
    SizeBlowup(String),
    #[error("row references undeclared variable {0}")]
    UnknownVariable(usize),
    #[error("lift level must be at least 1, got {0}")]
    BadLevel(usize),
    #[error("conditioning event has zero mass")]
    ZeroMass,
    #[error("solution level is below 2; cannot condition")]
    LevelExhausted,
    #[error("subset {0:?} is above the solution level")]
    MissingSubset(Vec<u32>),
    #[error("simplex did not terminate within {0} pivots")]
    SolverStall(usize),
}

/// Solves a lifted LP and returns its point in subset form.
pub fn solve_lifted(lifted: &LiftedLp) -> Result<Option<LiftedSolution>, SaError> {
    Ok(solve_feasible(&lifted.lp)?.point().map(|x| LiftedSolution::from_point(lifted, x)))
}
