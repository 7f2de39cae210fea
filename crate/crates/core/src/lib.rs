//! Precedence-constrained makespan scheduling toolkit.
//!
//! Exact-rational LP machinery with Sherali-Adams lifting and conditioning,
//! a recursive rounding scheduler over a laminar decomposition of the
//! horizon, deadline schedulers with partial discarding, integrality-gap
//! constructions and brute-force oracles for small instances.

pub mod deadline_sched;
pub mod gap_lab;
pub mod gen;
pub mod hierarchy_sched;
pub mod list_sched;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod sa_lp;
pub mod schedule;

pub use model::{Instance, Job, Precedence, TaskRef};
pub use rational::Rational;
pub use schedule::{Mode, Placement, Schedule};
