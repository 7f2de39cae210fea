//! End-to-end driver: horizon search, the lifted solution, the recursive
//! rounding from the root, and reinsertion of discarded tasks.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::gen::{random_dag, rng, DagSpec};
use crate::list_sched::{graham_list, graham_list_comm};
use crate::model::{Instance, TaskRef};
use crate::oracle::{sample_feasible, Model};
use crate::rational::{self, int, Rational};
use crate::sa_lp::{build_base_lp_with, sa_lift, solve_lifted, BaseLpOptions, LiftedSolution, Relation};
use crate::schedule::{reinsert_discarded, validate, Mode, Schedule, ViolationKind};

use super::laminar::build_laminar;
use super::partial::{partial_schedule, CallLedger, Context, PartialInstance};
use super::{HierarchyError, HierarchyParams};

/// Where the lifted solution comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolutionSource {
    /// Uniform mixture of up to `samples` distinct integral schedules found by
    /// the exact search; feasible for every lift of the base LP.
    Mixture { samples: usize, seed: u64 },
    /// Exact solve of the base LP lifted to `level`.
    Exact { level: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub params: HierarchyParams,
    pub mode: Mode,
    /// Smallest horizon at which the lifted solution exists.
    pub horizon: usize,
    pub padded_horizon: usize,
    pub lower_bound: usize,
    /// Integral points in the mixture; 0 for an exact solution.
    pub mixture_points: usize,
    pub calls: Vec<CallLedger>,
    /// Special jobs with their machines, by id.
    pub special: BTreeMap<String, usize>,
    /// Every assigned task of a special job sits on its machine.
    pub special_on_sigma: bool,
    pub discarded: usize,
    pub last_slot_comm: usize,
    /// Tasks dropped after the rounding to restore validity.
    pub repaired: usize,
    pub conditionings: usize,
    pub all_calls_within_bound: bool,
    pub partial_makespan: usize,
    pub reinsert_width: usize,
    pub final_makespan: usize,
    /// `T + width * |discarded|`.
    pub makespan_bound: usize,
    pub valid: bool,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        rational::to_canonical_json(self).expect("manifest serializes")
    }
}

#[derive(Debug, Clone)]
pub struct HierarchyRun {
    /// Output of the rounding, before reinsertion.
    pub partial: Schedule,
    pub schedule: Schedule,
    pub manifest: RunManifest,
}

fn lower_bound(inst: &Instance) -> usize {
    let m = inst.machines() as u64;
    (inst.total_size().div_ceil(m)).max(inst.max_chain_all()).max(1) as usize
}

/// Lifted solution at `horizon`, or `None` if there is none.
fn lifted_at(
    ctx: &Context,
    horizon: usize,
    source: &SolutionSource,
    level_budget: usize,
) -> Result<Option<(LiftedSolution, usize)>, HierarchyError> {
    let inst = ctx.inst;
    let with_delays = ctx.mode == Mode::Delay;
    match *source {
        SolutionSource::Mixture { samples, seed } => {
            let found = sample_feasible(inst, Model::B, with_delays, horizon, samples.max(1), seed);
            if found.is_empty() {
                return Ok(None);
            }
            let n = found.len();
            let points = found
                .into_iter()
                .map(|s| (int(1), s.assignment.iter().map(|(&t, p)| ctx.var(t, p.machine, p.slot)).collect()))
                .collect();
            Ok(Some((LiftedSolution::mixture(level_budget, points)?, n)))
        }
        SolutionSource::Exact { level } => {
            let padded = ctx.tree.horizon();
            let opts = BaseLpOptions { comm: with_delays, ..BaseLpOptions::default() };
            let mut base = build_base_lp_with(inst, padded, &opts);
            let tail: Vec<(usize, Rational)> = (0..base.num_events())
                .filter(|&v| base.event(inst, v).slot > horizon)
                .map(|v| (v, int(1)))
                .collect();
            if !tail.is_empty() {
                base.lp.add_row(tail, Relation::Eq, int(0), "padding")?;
            }
            let lifted = sa_lift(&base.lp, level)?;
            Ok(solve_lifted(&lifted)?.map(|x| (x, 0)))
        }
    }
}

/// Drops the later task of every violated pair until the schedule validates.
fn repair(s: &mut Schedule, inst: &Instance, mode: Mode) -> usize {
    let mut dropped = 0;
    loop {
        let report = validate(s, inst, mode).expect("tasks belong to the instance");
        let Some(v) = report.violations.first() else { return dropped };
        let victims: Vec<TaskRef> = match v.kind {
            ViolationKind::Migration => {
                let keep = s.get(v.tasks[0]).expect("assigned").machine;
                v.tasks.iter().copied().filter(|&t| s.get(t).expect("assigned").machine != keep).collect()
            }
            _ => v.tasks[1..].to_vec(),
        };
        for t in victims {
            s.assignment.remove(&t);
            s.discard(t);
            dropped += 1;
        }
    }
}

/// Finds the smallest horizon with a lifted solution, rounds it from the
/// root and reinserts the discarded tasks.
pub fn run_full(inst: &Instance, mode: Mode, params: &HierarchyParams) -> Result<HierarchyRun, HierarchyError> {
    params.check()?;
    let upper = match mode {
        Mode::NoDelay => graham_list(inst, None),
        Mode::Delay => graham_list_comm(inst, None),
    }
    .map(|s| s.makespan())
    .unwrap_or(inst.total_size() as usize * (1 + inst.beta() as usize))
    .max(1);
    let lower = lower_bound(inst).min(upper);

    let mut found = None;
    for horizon in lower..=upper {
        let ctx = Context::new(inst, build_laminar(horizon), params, mode);
        if let Some((x, points)) = lifted_at(&ctx, horizon, &params.source, params.level_budget)? {
            found = Some((horizon, x, points));
            break;
        }
    }
    let (horizon, x, points) = found.ok_or(HierarchyError::NoFeasibleHorizon(upper))?;
    let ctx = Context::new(inst, build_laminar(horizon), params, mode);
    let root = PartialInstance {
        interval: ctx.tree.root(),
        jobs: (0..inst.num_jobs()).collect(),
        special: BTreeMap::new(),
        x,
    };
    let out = partial_schedule(&ctx, root)?;
    let mut partial = out.schedule;
    partial.horizon = ctx.tree.horizon();
    let repaired = repair(&mut partial, inst, mode);

    let special_on_sigma = out
        .special
        .iter()
        .all(|(&j, &sigma)| inst.tasks_of(j).filter_map(|t| partial.get(t)).all(|p| p.machine == sigma));
    let schedule = reinsert_discarded(&partial, inst, mode);
    let width = match mode {
        Mode::NoDelay => 1,
        Mode::Delay => 2 * inst.beta() as usize + 1,
    };
    let report = validate(&schedule, inst, mode).expect("tasks belong to the instance");
    let discarded = partial.discarded.len();
    let manifest = RunManifest {
        params: params.clone(),
        mode,
        horizon,
        padded_horizon: ctx.tree.horizon(),
        lower_bound: lower,
        mixture_points: points,
        special: out.special.iter().map(|(&j, &s)| (inst.id(j).to_string(), s)).collect(),
        special_on_sigma,
        discarded,
        last_slot_comm: out.last_slot_comm,
        repaired,
        conditionings: out.calls.iter().map(|c| c.conditionings).sum(),
        all_calls_within_bound: out.calls.iter().all(|c| c.within_discard_bound),
        calls: out.calls,
        partial_makespan: partial.makespan(),
        reinsert_width: width,
        final_makespan: schedule.makespan(),
        makespan_bound: horizon + width * discarded,
        valid: report.is_valid() && schedule.is_complete(inst),
    };
    Ok(HierarchyRun { partial, schedule, manifest })
}

/// Seeded micro instance: `m <= 2`, at most 10 tasks, and a list schedule
/// of makespan at most 8 (so the located horizon is at most 8 too).
pub fn micro_instance(seed: u64, mode: Mode) -> Instance {
    let mut g = rng(seed);
    loop {
        let spec = DagSpec {
            jobs: g.gen_range(2..=6),
            max_size: 2,
            machines: g.gen_range(1..=2),
            edge_percent: 30,
            delay: u32::from(mode == Mode::Delay),
        };
        let inst = random_dag(&spec, &mut g);
        let list = match mode {
            Mode::NoDelay => graham_list(&inst, None),
            Mode::Delay => graham_list_comm(&inst, None),
        };
        if inst.total_tasks() <= 10 && list.is_ok_and(|s| s.makespan() <= 8) {
            return inst;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Job;
    use crate::rational::ratio;
    use std::collections::BTreeSet;

    fn chain3() -> Instance {
        let jobs = vec![Job::new("a", 1), Job::new("b", 1), Job::new("c", 1)];
        let pairs = [("a".to_string(), "b".to_string()), ("b".to_string(), "c".to_string())];
        Instance::new(1, jobs, &pairs, 0, &[]).unwrap()
    }

    #[test]
    fn unit_chain_on_one_machine() {
        let run = run_full(&chain3(), Mode::NoDelay, &HierarchyParams::default()).unwrap();
        let m = &run.manifest;
        assert_eq!(m.horizon, 3);
        assert!(m.valid);
        assert!(m.final_makespan <= m.makespan_bound);
        assert_eq!(m.repaired, 0);
    }

    #[test]
    fn appendix_instance_is_not_beaten() {
        // three jobs of size 2 on two machines: the non-migratory optimum is 4
        let inst = Instance::new(2, vec![Job::new("a", 2), Job::new("b", 2), Job::new("c", 2)], &[], 0, &[]).unwrap();
        let run = run_full(&inst, Mode::NoDelay, &HierarchyParams::default()).unwrap();
        assert!(run.manifest.valid);
        assert!(run.schedule.makespan() >= 4);
    }

    #[test]
    fn delay_pair_obeys_the_delay() {
        let inst =
            Instance::new(2, vec![Job::new("j", 1), Job::new("k", 1)], &[("j".into(), "k".into())], 1, &[]).unwrap();
        let run = run_full(&inst, Mode::Delay, &HierarchyParams::default()).unwrap();
        assert!(run.manifest.valid, "{}", run.manifest.to_json());
        assert!(run.manifest.final_makespan <= run.manifest.makespan_bound);
    }

    #[test]
    fn exact_source_on_a_tiny_instance() {
        let inst = Instance::new(1, vec![Job::new("a", 1), Job::new("b", 1)], &[], 0, &[]).unwrap();
        let params = HierarchyParams { source: SolutionSource::Exact { level: 3 }, ..HierarchyParams::default() };
        let run = run_full(&inst, Mode::NoDelay, &params).unwrap();
        assert_eq!(run.manifest.horizon, 2);
        assert!(run.manifest.valid);
    }

    #[test]
    fn children_order_does_not_matter() {
        let params = HierarchyParams::default();
        for seed in 0..6 {
            let inst = micro_instance(seed, Mode::NoDelay);
            let run = run_full(&inst, Mode::NoDelay, &params).unwrap();
            let ctx = Context::new(&inst, build_laminar(run.manifest.horizon), &params, Mode::NoDelay);
            let (x, _) = lifted_at(&ctx, run.manifest.horizon, &params.source, params.level_budget).unwrap().unwrap();
            let root = |x| PartialInstance { interval: ctx.tree.root(), jobs: (0..inst.num_jobs()).collect(), special: BTreeMap::new(), x };
            let a = partial_schedule(&ctx, root(x.clone())).unwrap();
            let mut rev = ctx.clone();
            rev.reverse_children = true;
            let b = partial_schedule(&rev, root(x)).unwrap();
            assert_eq!(a.schedule, b.schedule);
            assert_eq!(a.discarded, b.discarded);
            let set: BTreeSet<_> = a.calls.iter().map(|c| c.interval).collect();
            assert_eq!(set, b.calls.iter().map(|c| c.interval).collect());
        }
    }

    #[test]
    fn micro_runs_are_valid() {
        for mode in [Mode::NoDelay, Mode::Delay] {
            for seed in 0..8 {
                let inst = micro_instance(seed, mode);
                let run = run_full(&inst, mode, &HierarchyParams { epsilon: ratio(1, 2), ..Default::default() }).unwrap();
                let m = &run.manifest;
                assert!(m.valid, "seed {seed} {mode:?}: {}", m.to_json());
                assert!(m.special_on_sigma);
                assert!(m.final_makespan <= m.makespan_bound);
                assert!(m.all_calls_within_bound);
                for c in m.calls.iter().filter(|c| !c.base_case) {
                    assert!(int(c.conditionings as i64) <= c.conditioning_bound);
                    let cut = c.chain_cuts.as_ref().unwrap();
                    assert!(cut.within_k_bound && int(cut.chain_hat as i64) <= cut.chain_bound);
                }
            }
        }
    }

    #[test]
    fn k2_exercises_top_jobs() {
        let jobs = (0..4).map(|i| Job::new(format!("j{i}"), 4)).collect();
        let inst = Instance::new(1, jobs, &[], 0, &[]).unwrap();
        let params = HierarchyParams { k: 2, delta: ratio(1, 1), ..HierarchyParams::default() };
        let run = run_full(&inst, Mode::NoDelay, &params).unwrap();
        let m = &run.manifest;
        assert!(m.valid);
        let top: Vec<&CallLedger> = m.calls.iter().filter(|c| c.tentative_precedence_ok.is_some()).collect();
        assert!(!top.is_empty());
        assert!(top.iter().all(|c| c.tentative_precedence_ok == Some(true)));
        assert!(m.final_makespan <= m.makespan_bound);
    }
}
