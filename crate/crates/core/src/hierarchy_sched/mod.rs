//! Recursive rounding of a lifted LP solution over a laminar decomposition
//! of the horizon: ownership, chain cutting, level selection, recursion on
//! bottom intervals, and top-job insertion through a deadline scheduler.
//!
//! Parameters are taken as given. The constants that would make the
//! analysis go through are far too large to run, so [`AsymptoticConstants`]
//! only reports them.

mod driver;
mod laminar;
mod matching;
mod partial;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::deadline_sched::DeadlineError;
use crate::oracle::OracleError;
use crate::rational::{self, int, ratio, Rational};
use crate::sa_lp::SaError;

pub use driver::{micro_instance, run_full, HierarchyRun, RunManifest, SolutionSource};
pub use laminar::{build_laminar, IntervalId, LaminarTree};
pub use matching::hopcroft_karp;
pub use partial::{
    cut_chains, ownership, partial_schedule, select_level_star, split_special, tentative_top_assign, CallLedger,
    Context, CutReport, DiscardLedger, LevelChoice, PartialInstance, PartialOutput, Supports, TentativeAssignment,
    TopWindow,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HierarchyError {
    #[error("the lifted solution ran out of levels")]
    LevelExhausted,
    #[error("job {0} has support outside the interval")]
    SupportOutsideRoot(String),
    #[error("size cap exceeded: {0}")]
    SizeBlowup(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no feasible horizon up to {0}")]
    NoFeasibleHorizon(usize),
    #[error("lifted solution is inconsistent: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Deadline(#[from] DeadlineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("lp: {0}")]
    Lp(SaError),
}

impl From<SaError> for HierarchyError {
    fn from(e: SaError) -> Self {
        match e {
            SaError::LevelExhausted => HierarchyError::LevelExhausted,
            SaError::SizeBlowup(s) => HierarchyError::SizeBlowup(s),
            other => HierarchyError::Lp(other),
        }
    }
}

/// Run parameters. Defaults: `k = 1`, `δ = 1/4`, `ε = 1/2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HierarchyParams {
    pub k: u32,
    #[serde(with = "rational::serde_str")]
    pub delta: Rational,
    #[serde(with = "rational::serde_str")]
    pub epsilon: Rational,
    /// Level given to the lifted solution when it is a mixture.
    pub level_budget: usize,
    pub source: SolutionSource,
}

impl Default for HierarchyParams {
    fn default() -> Self {
        HierarchyParams {
            k: 1,
            delta: ratio(1, 4),
            epsilon: ratio(1, 2),
            level_budget: 256,
            source: SolutionSource::Mixture { samples: 4, seed: 0 },
        }
    }
}

impl HierarchyParams {
    pub fn check(&self) -> Result<(), HierarchyError> {
        let bad = |s: &str| Err(HierarchyError::InvalidParameter(s.into()));
        if self.k == 0 || self.k > 3 {
            return bad("k must be in 1..=3");
        }
        if self.delta <= Rational::zero() || self.delta > Rational::one() {
            return bad("delta must be in (0, 1]");
        }
        if self.epsilon <= Rational::zero() || self.epsilon > Rational::one() {
            return bad("epsilon must be in (0, 1]");
        }
        if self.level_budget < 2 {
            return bad("level budget must be at least 2");
        }
        Ok(())
    }

    /// `k^2`: depth of one batch of levels.
    pub fn batch(&self) -> u32 {
        self.k * self.k
    }

    /// `K = m k^2 2^{k^2} / δ`, the chain-cutting iteration bound.
    pub fn k_bound(&self, m: usize) -> Rational {
        int(m as i64 * self.batch() as i64 * (1i64 << self.batch())) / &self.delta
    }
}

/// The analysis constants at a given `m`, `ε` and `T`, for display.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AsymptoticConstants {
    /// `k = ceil(m / ε · log log T)`, with the constant factor taken as 1.
    pub k: u64,
    /// `δ = ε / (8 k^2 m 2^{2k^2} log T)`.
    #[serde(with = "rational::serde_str")]
    pub delta: Rational,
    /// `K = m k^2 2^{k^2} / δ`, as a decimal string.
    pub k_bound: String,
    /// `K' = K 2^{k^2}`.
    pub k_prime: String,
    /// Level `(log T)^2 K'` the analysis asks of the lifted solution.
    pub level: String,
}

/// Returns `None` when `2^{2k^2}` would not fit in memory-friendly sizes.
pub fn asymptotic_constants(m: usize, epsilon: &Rational, horizon: usize) -> Option<AsymptoticConstants> {
    let log_t = horizon.max(2).next_power_of_two().trailing_zeros().max(1) as u64;
    let loglog = (64 - (log_t.max(2) - 1).leading_zeros()) as u64;
    let k = (int(m as i64) / epsilon * int(loglog as i64)).ceil().to_integer().to_u64()?;
    let k2 = k.checked_mul(k)?;
    if k2 > 1 << 16 {
        return None;
    }
    let pow = |e: u64| BigInt::one() << e;
    let delta = Rational::new(epsilon.numer().clone(), epsilon.denom() * BigInt::from(8 * k2 * m as u64 * log_t) * pow(2 * k2));
    let k_bound = Rational::from_integer(BigInt::from(m as u64 * k2) * pow(k2)) / &delta;
    let k_prime = &k_bound * Rational::from_integer(pow(k2));
    let level = &k_prime * int((log_t * log_t) as i64);
    let show = |r: &Rational| r.ceil().to_integer().to_string();
    Some(AsymptoticConstants { k, delta, k_bound: show(&k_bound), k_prime: show(&k_prime), level: show(&level) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = HierarchyParams::default();
        p.check().unwrap();
        assert_eq!(p.k_bound(2), int(16));
    }

    #[test]
    fn asymptotic_constants_are_huge() {
        let c = asymptotic_constants(2, &ratio(1, 2), 8).unwrap();
        assert_eq!(c.k, 8);
        assert!(c.level.len() > 40);
    }
}
