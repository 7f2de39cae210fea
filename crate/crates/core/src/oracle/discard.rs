//! Exact minimum discard on one machine, by memoized search over
//! (time, set of jobs that can no longer start).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::gap_lab::smi::{Segment, SingleMachineInstance};

use super::{OracleCaps, OracleError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscardMode {
    /// Each job is processed entirely or not at all.
    FullJobs,
    /// Each job may run a contiguous prefix of any length.
    PartialAllowed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscardResult {
    pub value: u64,
    pub placements: Vec<Segment>,
    pub nodes: u64,
}

const MAX_JOBS: usize = 31;

pub fn opt_min_discard(smi: &SingleMachineInstance, mode: DiscardMode) -> Result<DiscardResult, OracleError> {
    let caps = OracleCaps::default();
    if smi.horizon as usize > caps.max_horizon {
        return Err(OracleError::CapExceeded(format!("T = {} > {}", smi.horizon, caps.max_horizon)));
    }
    if smi.len() > MAX_JOBS {
        return Err(OracleError::CapExceeded(format!("n = {} > {MAX_JOBS}", smi.len())));
    }
    let mut dp = Dp { smi, mode, memo: HashMap::new(), nodes: 0 };
    let processed = dp.best(0, 0);
    let mut placements = Vec::new();
    let (mut t, mut mask) = (0, dp.fold(0, 0));
    while t < smi.horizon {
        match dp.memo[&(t, mask)].1 {
            None => t += 1,
            Some((job, len)) => {
                placements.push(Segment { job, start: t, len });
                t += len;
                mask |= 1 << job;
            }
        }
        mask = dp.fold(t, mask);
    }
    Ok(DiscardResult { value: smi.total_size() - processed, placements, nodes: dp.nodes })
}

struct Dp<'a> {
    smi: &'a SingleMachineInstance,
    mode: DiscardMode,
    memo: HashMap<(u32, u32), (u64, Option<(usize, u32)>)>,
    nodes: u64,
}

impl Dp<'_> {
    fn fold(&self, t: u32, mut mask: u32) -> u32 {
        for (j, job) in self.smi.jobs.iter().enumerate() {
            let min_len = match self.mode {
                DiscardMode::FullJobs => job.size,
                DiscardMode::PartialAllowed => 1,
            };
            if t + min_len > job.deadline {
                mask |= 1 << j;
            }
        }
        mask
    }

    fn best(&mut self, t: u32, mask: u32) -> u64 {
        let mask = self.fold(t, mask);
        if t >= self.smi.horizon {
            return 0;
        }
        if let Some(&(v, _)) = self.memo.get(&(t, mask)) {
            return v;
        }
        self.nodes += 1;
        let mut best = self.best(t + 1, mask);
        let mut choice = None;
        for (j, job) in self.smi.jobs.iter().enumerate() {
            if mask & (1 << j) != 0 || job.release > t {
                continue;
            }
            let max_len = job.size.min(job.deadline - t);
            let lens = match self.mode {
                DiscardMode::FullJobs => job.size..=job.size,
                DiscardMode::PartialAllowed => 1..=max_len,
            };
            for len in lens {
                let v = len as u64 + self.best(t + len, mask | (1 << j));
                if v > best {
                    best = v;
                    choice = Some((j, len));
                }
            }
        }
        self.memo.insert((t, mask), (best, choice));
        best
    }
}
