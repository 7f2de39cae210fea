//! Chain-job reduction from the single-machine discard problem to two-machine
//! non-preemptive makespan, with solution maps in both directions.
//!
//! With `T = sum p_j`, the instance gets `T` unit jobs `chain_t` with window
//! `(t-1, t]`, and `a ≺ b` iff `d_a <= r_b` over all jobs.

use serde::Serialize;
use thiserror::Error;

use crate::model::{Instance, Job, ModelError, TaskRef};
use crate::schedule::{validate, Mode, Schedule};

use super::smi::{Segment, SingleMachineInstance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("T = {horizon} is below the largest deadline {max_deadline}")]
    HorizonTooSmall { horizon: u64, max_deadline: u32 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("segments are not a feasible single-machine solution")]
    InfeasibleSolution,
    #[error("schedule is not a valid non-preemptive schedule: {0}")]
    InvalidSchedule(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Single-machine solution to two-machine schedule.
    Forward,
    /// Two-machine schedule to single-machine solution.
    Back,
}

#[derive(Debug, Clone)]
pub struct ChainReduction {
    pub smi: SingleMachineInstance,
    pub instance: Instance,
    /// `T = sum p_j`.
    pub horizon: u32,
    /// Instance position of each single-machine job.
    pub job_pos: Vec<usize>,
    /// Instance position of `chain_t`, at index `t - 1`.
    pub chain_pos: Vec<usize>,
}

/// Window `(r, d]` of every instance job, by instance position.
fn windows(red: &ChainReduction) -> Vec<(u32, u32)> {
    let mut w = vec![(0, 0); red.instance.num_jobs()];
    for (j, &pos) in red.job_pos.iter().enumerate() {
        w[pos] = (red.smi.jobs[j].release, red.smi.jobs[j].deadline);
    }
    for (t, &pos) in red.chain_pos.iter().enumerate() {
        w[pos] = (t as u32, t as u32 + 1);
    }
    w
}

pub fn chain_reduction(smi: &SingleMachineInstance) -> Result<ChainReduction, ReductionError> {
    let total = smi.total_size();
    let max_deadline = smi.jobs.iter().map(|j| j.deadline).max().unwrap_or(0);
    if total < max_deadline as u64 {
        return Err(ReductionError::HorizonTooSmall { horizon: total, max_deadline });
    }
    let t_len = total as u32;
    let width = t_len.to_string().len();
    let chain_ids: Vec<String> = (1..=t_len).map(|t| format!("chain{t:0width$}")).collect();
    let mut jobs: Vec<Job> = smi.jobs.iter().map(|j| Job::new(j.id.clone(), j.size)).collect();
    jobs.extend(chain_ids.iter().map(|id| Job::new(id.clone(), 1)));

    let mut win: Vec<(String, u32, u32)> = smi.jobs.iter().map(|j| (j.id.clone(), j.release, j.deadline)).collect();
    win.extend(chain_ids.iter().enumerate().map(|(t, id)| (id.clone(), t as u32, t as u32 + 1)));
    let mut pairs = Vec::new();
    for a in &win {
        for b in &win {
            if a.2 <= b.1 {
                pairs.push((a.0.clone(), b.0.clone()));
            }
        }
    }
    let instance = Instance::new(2, jobs, &pairs, 0, &[])?;
    let pos = |id: &str| instance.job_index(id).expect("job was added");
    let job_pos = smi.jobs.iter().map(|j| pos(&j.id)).collect();
    let chain_pos = chain_ids.iter().map(|id| pos(id)).collect();
    Ok(ChainReduction { smi: smi.clone(), instance, horizon: t_len, job_pos, chain_pos })
}

impl ChainReduction {
    /// Two-machine schedule of makespan at most `T + cost(segs)`.
    ///
    /// Machine 1 runs the placed jobs, each extended to its full size; machine 2
    /// runs the chain with every unplaced job inserted at its release. Items are
    /// started as early as possible in order of their original start, which
    /// visits every predecessor before its successors.
    pub fn forward_solution(&self, segs: &[Segment]) -> Result<Schedule, ReductionError> {
        self.smi.cost(segs).ok_or(ReductionError::InfeasibleSolution)?;
        let win = windows(self);
        // (original start, inserted first, instance job, machine)
        let mut items: Vec<(u32, u8, usize, usize)> = Vec::new();
        let mut placed = vec![false; self.smi.len()];
        for s in segs {
            placed[s.job] = true;
            items.push((s.start, 1, self.job_pos[s.job], 1));
        }
        for (j, job) in self.smi.jobs.iter().enumerate() {
            if !placed[j] {
                items.push((job.release, 0, self.job_pos[j], 2));
            }
        }
        for (t, &pos) in self.chain_pos.iter().enumerate() {
            items.push((t as u32, 1, pos, 2));
        }
        items.sort();

        let mut free = [0usize; 3];
        let mut done: Vec<(usize, usize)> = Vec::new();
        let mut sched = Schedule::new(0);
        for &(_, _, job, machine) in &items {
            let ready = done
                .iter()
                .filter(|(k, _)| win[*k].1 <= win[job].0)
                .map(|(_, end)| *end)
                .max()
                .unwrap_or(0);
            let start = ready.max(free[machine]);
            let p = self.instance.size(job) as usize;
            for k in 1..=p {
                sched.assign(TaskRef::new(job, k as u32), machine, start + k);
            }
            free[machine] = start + p;
            done.push((job, start + p));
        }
        Ok(sched)
    }

    /// Single-machine segments obtained by deleting every slot without a chain job.
    pub fn back_solution(&self, s: &Schedule) -> Result<Vec<Segment>, ReductionError> {
        let inst = &self.instance;
        if !s.is_complete(inst) {
            return Err(ReductionError::InvalidSchedule("incomplete".into()));
        }
        let report = validate(s, inst, Mode::NoDelay).map_err(|e| ReductionError::InvalidSchedule(e.to_string()))?;
        if let Some(v) = report.violations.first() {
            return Err(ReductionError::InvalidSchedule(format!("{:?}", v.kind)));
        }
        for j in 0..inst.num_jobs() {
            let slots: Vec<usize> = inst.tasks_of(j).filter_map(|t| s.get(t)).map(|p| p.slot).collect();
            if slots.windows(2).any(|w| w[1] != w[0] + 1) {
                return Err(ReductionError::InvalidSchedule(format!("job {} is preempted", inst.id(j))));
            }
        }
        let horizon = s.makespan();
        let mut kept = vec![false; horizon + 1];
        for &pos in &self.chain_pos {
            kept[s.get(TaskRef::new(pos, 1)).expect("complete").slot] = true;
        }
        // compressed index of each kept slot
        let mut index = vec![0u32; horizon + 1];
        let mut acc = 0;
        for t in 1..=horizon {
            if kept[t] {
                acc += 1;
                index[t] = acc;
            }
        }
        let mut segs = Vec::new();
        for (j, &pos) in self.job_pos.iter().enumerate() {
            let slots: Vec<u32> = inst
                .tasks_of(pos)
                .map(|t| s.get(t).expect("complete").slot)
                .filter(|&t| kept[t])
                .map(|t| index[t])
                .collect();
            if let Some(&first) = slots.first() {
                segs.push(Segment { job: j, start: first - 1, len: slots.len() as u32 });
            }
        }
        if self.smi.cost(&segs).is_none() {
            return Err(ReductionError::InvalidSchedule("compressed segments are infeasible".into()));
        }
        Ok(segs)
    }
}
