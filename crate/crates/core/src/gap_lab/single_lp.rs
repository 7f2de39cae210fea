//! The discard LP on one machine: variables are placements, rows bound the
//! discarded units, schedule each job at most once and keep every slot at
//! congestion one.

use num_traits::One;

use crate::rational::{int, Rational};
use crate::sa_lp::{LinearProgram, Relation, VarLabel};

use super::smi::SingleMachineInstance;
use super::tree::{aligned_domain, PlacementVar};

#[derive(Debug, Clone)]
pub struct SingleMachineLp {
    pub lp: LinearProgram,
    /// Placement behind each LP variable.
    pub vars: Vec<PlacementVar>,
}

/// General mode: every `(j, t, p')` with `1 <= p' <= p_j` and
/// `r_j <= t <= d_j - p'`. Aligned mode: full placements at multiples of
/// `p_j` only. The objective row is `sum x p' >= sum_j p_j - budget`.
pub fn build_single_machine_lp(smi: &SingleMachineInstance, budget: &Rational, aligned_only: bool) -> SingleMachineLp {
    let vars: Vec<PlacementVar> = if aligned_only {
        aligned_domain(smi)
    } else {
        let mut v = Vec::new();
        for (j, job) in smi.jobs.iter().enumerate() {
            for len in 1..=job.size {
                for start in job.release..=job.deadline.saturating_sub(len) {
                    v.extend(PlacementVar::partial(smi, j, start, len));
                }
            }
        }
        v
    };
    let mut lp = LinearProgram::new();
    for p in &vars {
        lp.add_var(VarLabel::Generic(format!("x_{}_{}_{}", smi.jobs[p.job].id, p.start, p.len)));
    }
    let units: Vec<(usize, Rational)> = vars.iter().enumerate().map(|(i, p)| (i, int(p.len as i64))).collect();
    lp.add_row(units, Relation::Ge, int(smi.total_size() as i64) - budget, "objective").expect("declared");
    for j in 0..smi.len() {
        let row = vars.iter().enumerate().filter(|(_, p)| p.job == j).map(|(i, _)| (i, Rational::one())).collect();
        lp.add_row(row, Relation::Le, Rational::one(), "scheduled").expect("declared");
    }
    for t in 1..=smi.horizon {
        let row = vars.iter().enumerate().filter(|(_, p)| p.covers(t)).map(|(i, _)| (i, Rational::one())).collect();
        lp.add_row(row, Relation::Le, Rational::one(), "congestion").expect("declared");
    }
    SingleMachineLp { lp, vars }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gap_lab::smi::SmiJob;
    use crate::gap_lab::tree::gen_tree_instance;
    use crate::rational::ratio;
    use crate::sa_lp::solve_feasible;

    fn job(id: &str, size: u32, release: u32, deadline: u32) -> SmiJob {
        SmiJob { id: id.into(), size, release, deadline }
    }

    #[test]
    fn single_job_must_run_fully() {
        let smi = SingleMachineInstance::new(vec![job("a", 2, 0, 2)], 2).unwrap();
        let s = build_single_machine_lp(&smi, &int(0), false);
        assert_eq!(s.vars.len(), 3);
        let f = solve_feasible(&s.lp).unwrap();
        let x = f.point().unwrap();
        let full = s.vars.iter().position(|p| p.start == 0 && p.len == 2).unwrap();
        assert_eq!(x[full], int(1));
    }

    #[test]
    fn aligned_tree_variable_count() {
        let t = gen_tree_instance(1);
        assert_eq!(build_single_machine_lp(&t, &int(0), true).vars.len(), 6);
    }

    #[test]
    fn overfull_window_forces_discard() {
        let smi = SingleMachineInstance::new(vec![job("a", 2, 0, 2), job("b", 2, 0, 2)], 2).unwrap();
        for (b, ok) in [(1, false), (2, true)] {
            let s = build_single_machine_lp(&smi, &int(b), false);
            assert_eq!(solve_feasible(&s.lp).unwrap().is_feasible(), ok, "budget {b}");
        }
    }

    #[test]
    fn uniform_point_has_zero_cost() {
        for l in [1u32, 3] {
            let t = gen_tree_instance(l);
            let s = build_single_machine_lp(&t, &int(0), true);
            let x = vec![ratio(1, l as i64 + 1); s.vars.len()];
            assert!(s.lp.is_satisfied(&x));
        }
    }
}
