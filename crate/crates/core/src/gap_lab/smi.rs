//! Single-machine instances with release times and deadlines.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmiError {
    #[error("job {0} has zero size")]
    ZeroSize(String),
    #[error("job {id} window ({r}, {d}] exceeds horizon {horizon}")]
    WindowPastHorizon { id: String, r: u32, d: u32, horizon: u32 },
    #[error("job {id} has empty window ({r}, {d}]")]
    EmptyWindow { id: String, r: u32, d: u32 },
    #[error("json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmiJob {
    pub id: String,
    pub size: u32,
    pub release: u32,
    pub deadline: u32,
}

/// Jobs with half-open windows `(release, deadline]` on one machine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingleMachineInstance {
    pub jobs: Vec<SmiJob>,
    pub horizon: u32,
}

/// Job `job` runs in slots `start+1 ..= start+len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Segment {
    pub job: usize,
    pub start: u32,
    pub len: u32,
}

impl Segment {
    pub fn end(&self) -> u32 {
        self.start + self.len
    }
}

impl SingleMachineInstance {
    pub fn new(jobs: Vec<SmiJob>, horizon: u32) -> Result<Self, SmiError> {
        for j in &jobs {
            if j.size == 0 {
                return Err(SmiError::ZeroSize(j.id.clone()));
            }
            if j.deadline <= j.release {
                return Err(SmiError::EmptyWindow { id: j.id.clone(), r: j.release, d: j.deadline });
            }
            if j.deadline > horizon {
                return Err(SmiError::WindowPastHorizon {
                    id: j.id.clone(),
                    r: j.release,
                    d: j.deadline,
                    horizon,
                });
            }
        }
        Ok(SingleMachineInstance { jobs, horizon })
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn total_size(&self) -> u64 {
        self.jobs.iter().map(|j| j.size as u64).sum()
    }

    /// Discarded units of a placement list, or `None` if it is infeasible:
    /// overlapping segments, a segment outside its window, a job placed twice
    /// or longer than its size.
    pub fn cost(&self, segs: &[Segment]) -> Option<u64> {
        let mut seen = vec![false; self.jobs.len()];
        let mut sorted = segs.to_vec();
        sorted.sort_by_key(|s| s.start);
        let mut last_end = 0;
        let mut processed = 0u64;
        for s in &sorted {
            let j = self.jobs.get(s.job)?;
            if seen[s.job] || s.len == 0 || s.len > j.size || s.start < j.release || s.end() > j.deadline {
                return None;
            }
            if s.start < last_end {
                return None;
            }
            seen[s.job] = true;
            last_end = s.end();
            processed += s.len as u64;
        }
        Some(self.total_size() - processed)
    }

    pub fn from_json(s: &str) -> Result<Self, SmiError> {
        let raw: SingleMachineInstance = serde_json::from_str(s).map_err(|e| SmiError::Json(e.to_string()))?;
        SingleMachineInstance::new(raw.jobs, raw.horizon)
    }

    pub fn to_json(&self) -> String {
        crate::rational::to_canonical_json(self).expect("instance serializes")
    }
}

/// Random instance with `T = sum p_j` and windows of length at least `p_j`.
pub fn random_smi(n: usize, max_size: u32, rng: &mut impl Rng) -> SingleMachineInstance {
    let sizes: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=max_size.max(1))).collect();
    let horizon: u32 = sizes.iter().sum();
    let jobs = sizes
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let release = rng.gen_range(0..=horizon - p);
            let deadline = rng.gen_range(release + p..=horizon);
            SmiJob { id: crate::model::job_id(i, n), size: p, release, deadline }
        })
        .collect();
    SingleMachineInstance::new(jobs, horizon).expect("windows fit the horizon")
}

/// Random feasible placement list: jobs in random order, each given a random
/// length and the first free start in its window that fits, or skipped.
pub fn random_solution(smi: &SingleMachineInstance, rng: &mut impl Rng) -> Vec<Segment> {
    let mut order: Vec<usize> = (0..smi.len()).collect();
    order.shuffle(rng);
    let mut busy = vec![false; smi.horizon as usize + 1];
    let mut segs = Vec::new();
    for j in order {
        let job = &smi.jobs[j];
        if rng.gen_bool(0.2) {
            continue;
        }
        let len = rng.gen_range(1..=job.size);
        let mut starts: Vec<u32> = (job.release..=job.deadline - len).collect();
        starts.shuffle(rng);
        if let Some(&start) = starts.iter().find(|&&t| (t + 1..=t + len).all(|u| !busy[u as usize])) {
            for u in start + 1..=start + len {
                busy[u as usize] = true;
            }
            segs.push(Segment { job: j, start, len });
        }
    }
    segs
}
