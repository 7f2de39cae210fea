//! Exact brute-force solvers for tiny instances.

mod discard;
mod gap_report;
mod makespan;

use thiserror::Error;

use crate::model::Instance;
use crate::schedule::{validate, Mode, Schedule, ViolationKind};

pub use gap_report::{lp_gap_report, GapReport, GapRow};
pub use discard::{opt_min_discard, DiscardMode, DiscardResult};
pub use makespan::{feasible_at, opt_makespan, opt_makespan_with, sample_feasible, Model, Strategy};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle cap exceeded: {0}")]
    CapExceeded(String),
}

#[derive(Debug, Clone)]
pub struct OracleCaps {
    pub max_tasks: usize,
    pub max_machines: usize,
    pub max_horizon: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps { max_tasks: 16, max_machines: 3, max_horizon: 40 }
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub value: usize,
    pub witness: Schedule,
    pub nodes: u64,
}

/// True if `s` is a complete schedule that is legal under `model`.
pub fn witness_ok(inst: &Instance, s: &Schedule, model: Model, with_delays: bool) -> bool {
    if !s.is_complete(inst) {
        return false;
    }
    let mode = if with_delays { Mode::Delay } else { Mode::NoDelay };
    let Ok(report) = validate(s, inst, mode) else {
        return false;
    };
    let allowed = |k: ViolationKind| model == Model::A && k == ViolationKind::Migration;
    if report.violations.iter().any(|v| !allowed(v.kind)) {
        return false;
    }
    if model == Model::C {
        for j in 0..inst.num_jobs() {
            let slots: Vec<usize> = inst.tasks_of(j).filter_map(|t| s.get(t)).map(|p| p.slot).collect();
            if slots.windows(2).any(|w| w[1] != w[0] + 1) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gap_lab::{SingleMachineInstance, SmiJob};
    use crate::gen::{random_dag_capped, rng, DagSpec};
    use crate::model::Job;

    fn ab(m: usize) -> Instance {
        let jobs = (0..=m).map(|i| Job::new(format!("j{i}"), m as u32)).collect();
        Instance::new(m, jobs, &[], 0, &[]).unwrap()
    }

    #[test]
    fn model_gap_values() {
        let fig3 = ab(2);
        let vals: Vec<usize> = Model::ALL.iter().map(|&m| opt_makespan(&fig3, m, false).unwrap().value).collect();
        assert_eq!(vals, vec![3, 4, 4]);
        let m3 = ab(3);
        assert_eq!(opt_makespan(&m3, Model::A, false).unwrap().value, 4);
        assert_eq!(opt_makespan(&m3, Model::B, false).unwrap().value, 6);
    }

    #[test]
    fn chain_of_three() {
        let jobs = ["a", "b", "c"].iter().map(|s| Job::new(*s, 1)).collect();
        let prec = [("a".to_string(), "b".to_string()), ("b".into(), "c".into())];
        let inst = Instance::new(2, jobs, &prec, 0, &[]).unwrap();
        for m in Model::ALL {
            let r = opt_makespan(&inst, m, false).unwrap();
            assert_eq!(r.value, 3);
            assert!(witness_ok(&inst, &r.witness, m, false));
        }
    }

    #[test]
    fn gap_report_examples() {
        let r = lp_gap_report(&ab(2), 2..=4, false).unwrap();
        assert_eq!(r.first_lp, Some(3));
        assert_eq!(r.first_a, Some(3));
        assert_eq!(r.first_b, Some(4));
        let jobs = ["a", "b", "c"].iter().map(|s| Job::new(*s, 1)).collect();
        let prec = [("a".to_string(), "b".to_string()), ("b".into(), "c".into())];
        let chain = Instance::new(1, jobs, &prec, 0, &[]).unwrap();
        let r = lp_gap_report(&chain, 1..=4, false).unwrap();
        assert_eq!((r.first_lp, r.first_c), (Some(3), Some(3)));
    }

    #[test]
    fn cap_exceeded() {
        let jobs = (0..17).map(|i| Job::new(format!("j{i:02}"), 1)).collect();
        let inst = Instance::new(2, jobs, &[], 0, &[]).unwrap();
        assert!(matches!(opt_makespan(&inst, Model::A, false), Err(OracleError::CapExceeded(_))));
    }

    #[test]
    fn strategies_agree_on_random_dags() {
        let mut r = rng(7);
        for seed in 0..25u32 {
            let spec = DagSpec {
                jobs: 3 + (seed as usize % 4),
                max_size: 3,
                machines: 1 + seed as usize % 3,
                edge_percent: 30,
                delay: seed % 3,
            };
            let inst = random_dag_capped(&spec, 10, &mut r);
            for model in Model::ALL {
                for delays in [false, true] {
                    let caps = OracleCaps::default();
                    let a = opt_makespan_with(&inst, model, delays, Strategy::SlotDfs, &caps).unwrap();
                    let b = opt_makespan_with(&inst, model, delays, Strategy::SequenceDfs, &caps).unwrap();
                    assert_eq!(a.value, b.value, "seed {seed} model {model:?} delays {delays}");
                    assert!(witness_ok(&inst, &a.witness, model, delays));
                    assert!(witness_ok(&inst, &b.witness, model, delays));
                    assert!(crate::schedule::makespan(&a.witness) <= a.value);
                }
            }
        }
    }

    fn smi(jobs: &[(u32, u32, u32)], horizon: u32) -> SingleMachineInstance {
        let jobs = jobs
            .iter()
            .enumerate()
            .map(|(i, &(size, release, deadline))| SmiJob { id: format!("j{i}"), size, release, deadline })
            .collect();
        SingleMachineInstance::new(jobs, horizon).unwrap()
    }

    #[test]
    fn min_discard_examples() {
        // root (0,4] p=2, leaves (0,2] and (2,4] p=1
        let tree = smi(&[(2, 0, 4), (1, 0, 2), (1, 2, 4)], 4);
        for mode in [DiscardMode::FullJobs, DiscardMode::PartialAllowed] {
            let r = opt_min_discard(&tree, mode).unwrap();
            assert_eq!(r.value, 0);
            assert_eq!(tree.cost(&r.placements), Some(0));
        }
        let two = smi(&[(2, 0, 2), (2, 0, 2)], 2);
        assert_eq!(opt_min_discard(&two, DiscardMode::FullJobs).unwrap().value, 2);
        assert_eq!(opt_min_discard(&two, DiscardMode::PartialAllowed).unwrap().value, 2);
        let tight = smi(&[(2, 0, 3), (2, 1, 3)], 3);
        assert_eq!(opt_min_discard(&tight, DiscardMode::FullJobs).unwrap().value, 2);
        assert_eq!(opt_min_discard(&tight, DiscardMode::PartialAllowed).unwrap().value, 1);
    }
}
