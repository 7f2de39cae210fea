//! Deadline scheduling with precedence: EDF job order, earliest-completion
//! machine choice, partial discarding, and audits of the idle-slot bounds.

mod audit;
mod edf;
mod witness;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Instance, Job, ModelError};

pub use audit::{idle_audit, AuditKind, AuditReport, AuditViolation};
pub use edf::{edf_ect, edf_ect_comm, JobTrace, RunTrace};
pub use witness::{witness_first, WitnessSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeadlineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("horizon {horizon} is not divisible by interval count {intervals}")]
    Indivisible { horizon: usize, intervals: usize },
    #[error("job {id} window [{release}, {deadline}] is not aligned to interval length {len}")]
    Misaligned { id: String, release: usize, deadline: usize, len: usize },
    #[error("job {0} window is empty or outside the horizon")]
    BadWindow(String),
    #[error("precedence {0} -> {1} is not monotone in release and deadline")]
    NotMonotone(String, String),
    #[error("capacity profile has shape {got:?}, expected {machines} x {horizon}")]
    CapacityShape { got: (usize, usize), machines: usize, horizon: usize },
    #[error("trace does not belong to this instance: {0}")]
    TraceMismatch(String),
    #[error("json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeadlineMode {
    NoDelay,
    Comm,
}

/// Jobs with inclusive windows `[release, deadline]` over slots `1..=horizon`,
/// split into `intervals` equal intervals; windows start and end on interval
/// boundaries. `capacity[i][t-1]` tells whether machine `i+1` is available at `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeadlineInstance {
    inst: Instance,
    release: Vec<usize>,
    deadline: Vec<usize>,
    horizon: usize,
    intervals: usize,
    capacity: Vec<Vec<bool>>,
    beta: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeadlineJob {
    pub id: String,
    pub size: u32,
    pub release: usize,
    pub deadline: usize,
}

#[derive(Serialize, Deserialize)]
struct DeadlineFile {
    horizon: usize,
    intervals: usize,
    machines: usize,
    capacity: Vec<Vec<u8>>,
    jobs: Vec<DeadlineJob>,
    #[serde(default)]
    precedence: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<u32>,
}

impl DeadlineInstance {
    pub fn new(
        horizon: usize,
        intervals: usize,
        capacity: Vec<Vec<bool>>,
        jobs: Vec<DeadlineJob>,
        precedence: &[(String, String)],
        beta: Option<u32>,
    ) -> Result<Self, DeadlineError> {
        let machines = capacity.len();
        if intervals == 0 || !horizon.is_multiple_of(intervals) {
            return Err(DeadlineError::Indivisible { horizon, intervals });
        }
        if capacity.iter().any(|row| row.len() != horizon) {
            let width = capacity.iter().map(|r| r.len()).find(|&l| l != horizon).unwrap_or(horizon);
            return Err(DeadlineError::CapacityShape { got: (machines, width), machines, horizon });
        }
        let mut jobs = jobs;
        jobs.sort_by(|a, b| a.id.cmp(&b.id));
        let len = horizon / intervals;
        for j in &jobs {
            if j.release == 0 || j.release > j.deadline || j.deadline > horizon {
                return Err(DeadlineError::BadWindow(j.id.clone()));
            }
            if (j.release - 1) % len != 0 || j.deadline % len != 0 {
                return Err(DeadlineError::Misaligned {
                    id: j.id.clone(),
                    release: j.release,
                    deadline: j.deadline,
                    len,
                });
            }
        }
        let inst = Instance::new(
            machines,
            jobs.iter().map(|j| Job::new(j.id.clone(), j.size)).collect(),
            precedence,
            beta.unwrap_or(0),
            &[],
        )?;
        let release: Vec<usize> = jobs.iter().map(|j| j.release).collect();
        let deadline: Vec<usize> = jobs.iter().map(|j| j.deadline).collect();
        for (a, b) in inst.precedence().pairs() {
            if release[a] > release[b] || deadline[a] > deadline[b] {
                return Err(DeadlineError::NotMonotone(inst.id(a).into(), inst.id(b).into()));
            }
        }
        Ok(DeadlineInstance { inst, release, deadline, horizon, intervals, capacity, beta })
    }

    /// The underlying job set; job indices agree with this instance.
    pub fn instance(&self) -> &Instance {
        &self.inst
    }

    /// Instance used to validate output: uniform delay 1 in comm mode.
    pub fn validation_instance(&self, mode: DeadlineMode) -> Instance {
        match mode {
            DeadlineMode::NoDelay => self.inst.with_uniform_delay(0),
            DeadlineMode::Comm => self.inst.with_uniform_delay(1),
        }
    }

    pub fn num_jobs(&self) -> usize {
        self.inst.num_jobs()
    }

    pub fn machines(&self) -> usize {
        self.capacity.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn interval_len(&self) -> usize {
        self.horizon / self.intervals
    }

    /// 1-based index of the interval containing slot `t`.
    pub fn interval_of(&self, t: usize) -> usize {
        (t - 1) / self.interval_len() + 1
    }

    /// Slots of interval `q` (1-based), inclusive.
    pub fn interval_bounds(&self, q: usize) -> (usize, usize) {
        let l = self.interval_len();
        ((q - 1) * l + 1, q * l)
    }

    pub fn release(&self, j: usize) -> usize {
        self.release[j]
    }

    pub fn deadline(&self, j: usize) -> usize {
        self.deadline[j]
    }

    pub fn size(&self, j: usize) -> usize {
        self.inst.size(j) as usize
    }

    pub fn beta(&self) -> Option<u32> {
        self.beta
    }

    pub fn cap(&self, machine: usize, t: usize) -> bool {
        self.capacity[machine - 1][t - 1]
    }

    /// Δ: largest total size along a precedence chain.
    pub fn chain_length(&self) -> u64 {
        self.inst.max_chain_all()
    }

    pub fn total_tasks(&self) -> usize {
        self.inst.total_tasks()
    }

    pub fn from_json(s: &str) -> Result<Self, DeadlineError> {
        let f: DeadlineFile = serde_json::from_str(s).map_err(|e| DeadlineError::Json(e.to_string()))?;
        if f.capacity.len() != f.machines {
            let width = f.capacity.first().map(|r| r.len()).unwrap_or(0);
            return Err(DeadlineError::CapacityShape {
                got: (f.capacity.len(), width),
                machines: f.machines,
                horizon: f.horizon,
            });
        }
        let capacity = f.capacity.iter().map(|row| row.iter().map(|&c| c != 0).collect()).collect();
        DeadlineInstance::new(f.horizon, f.intervals, capacity, f.jobs, &f.precedence, f.beta)
    }

    pub fn to_json(&self) -> String {
        let f = DeadlineFile {
            horizon: self.horizon,
            intervals: self.intervals,
            machines: self.machines(),
            capacity: self.capacity.iter().map(|r| r.iter().map(|&c| c as u8).collect()).collect(),
            jobs: (0..self.num_jobs())
                .map(|j| DeadlineJob {
                    id: self.inst.id(j).to_string(),
                    size: self.inst.size(j),
                    release: self.release[j],
                    deadline: self.deadline[j],
                })
                .collect(),
            precedence: self
                .inst
                .precedence()
                .reduction()
                .into_iter()
                .map(|(a, b)| (self.inst.id(a).to_string(), self.inst.id(b).to_string()))
                .collect(),
            beta: self.beta,
        };
        crate::rational::to_canonical_json(&f).expect("instance serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::rng;
    use crate::schedule::{validate, Mode};

    #[test]
    fn json_round_trip() {
        let mut r = rng(11);
        let (inst, _) = witness_first(&WitnessSpec::default(), &mut r);
        let back = DeadlineInstance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn rejects_misaligned_and_non_monotone() {
        let cap = vec![vec![true; 4]];
        let job = |id: &str, r, d| DeadlineJob { id: id.into(), size: 1, release: r, deadline: d };
        let e = DeadlineInstance::new(4, 2, cap.clone(), vec![job("a", 2, 4)], &[], None);
        assert!(matches!(e, Err(DeadlineError::Misaligned { .. })));
        let e = DeadlineInstance::new(4, 2, cap, vec![job("a", 3, 4), job("b", 1, 4)], &[("a".into(), "b".into())], None);
        assert!(matches!(e, Err(DeadlineError::NotMonotone(..))));
    }

    #[test]
    fn witness_batch_meets_bounds() {
        let mut r = rng(2024);
        for _ in 0..200 {
            let spec = WitnessSpec::sample(&mut r);
            let (inst, _) = witness_first(&spec, &mut r);
            let p = inst.intervals();
            let m = inst.machines();
            let delta = inst.chain_length() as usize;
            for (mode, factor) in [(DeadlineMode::NoDelay, 2), (DeadlineMode::Comm, 6)] {
                let tr = match mode {
                    DeadlineMode::NoDelay => edf_ect(&inst),
                    DeadlineMode::Comm => edf_ect_comm(&inst),
                };
                assert!(tr.discarded_tasks() <= factor * p * p * m * delta);
                let vm = if mode == DeadlineMode::Comm { Mode::Delay } else { Mode::NoDelay };
                let rep = validate(&tr.schedule, &inst.validation_instance(mode), vm).unwrap();
                assert!(rep.is_valid(), "{:?}", rep.violations);
                let audit = idle_audit(&tr, &inst, mode).unwrap();
                assert!(audit.is_clean(), "{}\n{:?}", inst.to_json(), audit.violations);
            }
        }
    }
}
