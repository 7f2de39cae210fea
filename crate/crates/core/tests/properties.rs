use std::collections::BTreeSet;

use num_traits::{One, Zero};
use precsched::gap_lab::{
    aligned_domain, chain_reduction, check_contradiction, gen_tree_instance, random_smi, random_solution, sa_closed_form,
    PlacementVar,
};
use precsched::gen::{random_dag, rng, DagSpec};
use precsched::hierarchy_sched::{
    build_laminar, hopcroft_karp, micro_instance, run_full, split_special, Context, HierarchyParams, Supports,
};
use precsched::list_sched::{graham_list, graham_list_comm};
use precsched::rational::{self, ratio};
use precsched::sa_lp::LiftedSolution;
use precsched::schedule::validate;
use precsched::{Instance, Job, Mode, Rational, TaskRef};
use proptest::prelude::*;

fn tree_placements(l: u32) -> Vec<PlacementVar> {
    let smi = gen_tree_instance(l);
    let mut out = aligned_domain(&smi);
    // a few partial placements too
    for (j, job) in smi.jobs.iter().enumerate() {
        if let Some(p) = PlacementVar::partial(&smi, j, job.release, 1) {
            out.push(p);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contradictions_survive_supersets(l in 1u32..=3, picks in prop::collection::vec(any::<prop::sample::Index>(), 1..6), extra in any::<prop::sample::Index>()) {
        let dom = tree_placements(l);
        let set: Vec<PlacementVar> = picks.iter().map(|i| *i.get(&dom)).collect();
        let mut bigger = set.clone();
        bigger.push(*extra.get(&dom));
        if check_contradiction(&set) {
            prop_assert!(check_contradiction(&bigger));
        }
        let mut shuffled = set.clone();
        shuffled.reverse();
        prop_assert_eq!(check_contradiction(&set), check_contradiction(&shuffled));
    }

    #[test]
    fn closed_form_is_monotone(l in 1u32..=4, num in 1i64..8, picks in prop::collection::vec(any::<prop::sample::Index>(), 0..4), extra in any::<prop::sample::Index>()) {
        let cf = sa_closed_form(l, ratio(num, 8));
        let n = cf.domain.len();
        let mut s: Vec<usize> = picks.iter().map(|i| i.index(n)).collect();
        s.sort_unstable();
        s.dedup();
        let mut t = s.clone();
        t.push(extra.index(n));
        t.sort_unstable();
        t.dedup();
        let (vs, vt) = (cf.value_of(&s), cf.value_of(&t));
        prop_assert!(vt <= vs);
        prop_assert!(vs <= Rational::from_integer(1.into()));
        if !vs.is_zero() {
            prop_assert_eq!(vs, num_traits::pow(cf.ratio().clone(), s.len()));
        }
    }

    #[test]
    fn tree_identities(l in 0u32..=8) {
        let smi = gen_tree_instance(l);
        let t = (l as u64 + 1) << l;
        prop_assert_eq!(smi.jobs.len() as u64, (2u64 << l) - 1);
        prop_assert_eq!(smi.horizon as u64, t);
        prop_assert_eq!(smi.total_size(), t);
        prop_assert_eq!(smi.jobs.iter().map(|j| j.deadline as u64).max(), Some(t));
        for a in &smi.jobs {
            prop_assert_eq!((a.deadline - a.release) as u64, (l as u64 + 1) * a.size as u64);
            for b in &smi.jobs {
                let nested = (a.release <= b.release && b.deadline <= a.deadline)
                    || (b.release <= a.release && a.deadline <= b.deadline);
                let disjoint = a.deadline <= b.release || b.deadline <= a.release;
                prop_assert!(nested || disjoint);
            }
        }
    }

    #[test]
    fn reduction_round_trip(seed in any::<u64>(), n in 1usize..=5, max_size in 1u32..=3) {
        let mut g = rng(seed);
        let smi = random_smi(n, max_size, &mut g);
        let segs = random_solution(&smi, &mut g);
        let c = smi.cost(&segs).unwrap();
        let red = chain_reduction(&smi).unwrap();
        let s = red.forward_solution(&segs).unwrap();
        prop_assert!(s.makespan() as u64 <= red.horizon as u64 + c);
        let back = red.back_solution(&s).unwrap();
        prop_assert!(smi.cost(&back).unwrap() <= 2 * c);
    }

    #[test]
    fn list_schedules_are_valid(seed in any::<u64>(), jobs in 1usize..8, machines in 1usize..4, delay in 0u32..3) {
        let spec = DagSpec { jobs, max_size: 3, machines, edge_percent: 30, delay };
        let inst = random_dag(&spec, &mut rng(seed));
        let s = graham_list(&inst, None).unwrap();
        prop_assert!(validate(&s, &inst, Mode::NoDelay).unwrap().is_valid());
        prop_assert!(s.is_complete(&inst));
        // Graham's bound: idle slots only while a chain is running
        let total = inst.total_size() as usize;
        prop_assert!(s.makespan() <= total.div_ceil(machines) + inst.max_chain_all() as usize);
        let c = graham_list_comm(&inst, None).unwrap();
        prop_assert!(validate(&c, &inst, Mode::Delay).unwrap().is_valid());
        prop_assert!(c.is_complete(&inst));
    }

    #[test]
    fn instances_round_trip(seed in any::<u64>(), jobs in 0usize..8, delay in 0u32..3) {
        let spec = DagSpec { jobs, max_size: 4, machines: 2, edge_percent: 40, delay };
        let inst = random_dag(&spec, &mut rng(seed));
        let text = inst.to_json();
        let back = Instance::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json(), text);
        let s = graham_list(&inst, None).unwrap();
        let st = s.to_json(&inst);
        prop_assert_eq!(precsched::Schedule::from_json(&st, &inst).unwrap().to_json(&inst), st);
    }

    #[test]
    fn rationals_round_trip(p in -1000i64..1000, q in 1i64..1000) {
        let r = ratio(p, q);
        let s = rational::format(&r);
        prop_assert_eq!(rational::parse(&s).unwrap(), r);
    }

    #[test]
    fn matchings_are_valid_and_maximal(adj in prop::collection::vec(prop::collection::vec(0usize..8, 0..4), 0..8)) {
        let m = hopcroft_karp(&adj, 8);
        prop_assert_eq!(m.len(), adj.len());
        let mut used = BTreeSet::new();
        for (l, r) in m.iter().enumerate() {
            if let Some(r) = r {
                prop_assert!(adj[l].contains(r));
                prop_assert!(used.insert(*r));
            }
        }
        // no edge joins two free vertices
        for (l, rs) in adj.iter().enumerate() {
            if m[l].is_none() {
                prop_assert!(rs.iter().all(|r| used.contains(r)));
            }
        }
    }

    #[test]
    fn laminar_owner_is_smallest(t in 1usize..40, a in 1usize..64, b in 1usize..64) {
        let tree = build_laminar(t);
        let h = tree.horizon();
        prop_assert!(h.is_power_of_two() && h >= t);
        let (lo, hi) = (a.min(b).min(h), a.max(b).min(h));
        let o = tree.owner(lo, hi);
        prop_assert!(tree.begin(o) <= lo && hi <= tree.end(o));
        if let Some((x, y)) = tree.children(o) {
            prop_assert!(!(tree.begin(x) <= lo && hi <= tree.end(x)));
            prop_assert!(!(tree.begin(y) <= lo && hi <= tree.end(y)));
            prop_assert_eq!(tree.begin(x), tree.begin(o));
            prop_assert_eq!(tree.end(x) + 1, tree.begin(y));
            prop_assert_eq!(tree.end(y), tree.end(o));
        }
    }

    #[test]
    fn split_confines_each_task(size in 1u32..=4, points in prop::collection::vec((prop::collection::btree_set(1usize..=8, 4), 1i64..4), 1..4)) {
        let inst = Instance::new(1, vec![Job::new("a", size)], &[], 0, &[]).unwrap();
        let params = HierarchyParams::default();
        let ctx = Context::new(&inst, build_laminar(8), &params, Mode::NoDelay);
        let total: i64 = points.iter().map(|p| p.1).sum();
        // each point runs the tasks in increasing slots on machine 1
        let mix: Vec<(Rational, BTreeSet<u32>)> = points
            .iter()
            .map(|(slots, w)| {
                let cells = slots.iter().take(size as usize).enumerate();
                (ratio(*w, total), cells.map(|(i, &s)| ctx.var(TaskRef::new(0, i as u32 + 1), 1, s)).collect())
            })
            .collect();
        let x = LiftedSolution::mixture(16, mix).unwrap();
        let (y, used) = split_special(&ctx, &x, 0, 1, ctx.tree.root()).unwrap();
        prop_assert!(used <= 2 * size as usize);
        let sup = Supports::of(&ctx, &y);
        let halves = ctx.tree.descendants_at(ctx.tree.root(), params.batch());
        for i in 1..=size {
            let t = TaskRef::new(0, i);
            let mass: Rational = sup.task(&ctx, t).iter().map(|e| y.marginal(ctx.var(t, 1, e.0))).sum();
            prop_assert!(mass.is_one());
            let inside: Vec<_> = halves
                .iter()
                .filter(|&&h| sup.task(&ctx, t).iter().any(|e| ctx.tree.contains(h, e.0)))
                .collect();
            prop_assert_eq!(inside.len(), 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hierarchy_runs_are_valid(seed in 0u64..10_000, delay in any::<bool>()) {
        let mode = if delay { Mode::Delay } else { Mode::NoDelay };
        let inst = micro_instance(seed, mode);
        let run = run_full(&inst, mode, &HierarchyParams::default()).unwrap();
        let m = &run.manifest;
        prop_assert!(m.valid && m.special_on_sigma && m.all_calls_within_bound);
        prop_assert!(validate(&run.schedule, &inst, mode).unwrap().is_valid());
        prop_assert!(run.schedule.is_complete(&inst));
        prop_assert!(m.lower_bound <= m.horizon && m.final_makespan <= m.makespan_bound);
    }
}
