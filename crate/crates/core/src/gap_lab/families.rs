//! Instances separating the three makespan models: migratory preemptive (A),
//! non-migratory preemptive (B) and non-preemptive (C).

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::gen::rng;
use crate::model::{Instance, Job, ModelError};
use crate::oracle::{opt_makespan, Model};

/// Seeded search result persisted with the crate.
/// Result of `search_bc_witness(2, 0, _)`, persisted with the crate.
pub const BC_WITNESS_JSON: &str = include_str!("../../data/bc_witness.json");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("the AB family needs m >= 2, got {0}")]
    TooSmall(usize),
    #[error("no B/C gap witness: {0}")]
    WitnessSearchFailed(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapFamily {
    Ab,
    Bc,
}

/// AB: `m + 1` jobs of size `m` on `m` machines, no precedence.
/// BC with `n = 2`: the persisted witness. BC with `n >= 3`: the witness shape
/// scaled up (two parallel unit jobs then one, repeated `n` times, plus a free
/// job of size `n`), returned only if the oracle certifies the 5/4 ratio.
pub fn gen_model_gap_family(which: GapFamily, n: usize) -> Result<Instance, FamilyError> {
    match which {
        GapFamily::Ab => {
            if n < 2 {
                return Err(FamilyError::TooSmall(n));
            }
            let jobs = (0..=n).map(|i| Job::new(format!("j{i}"), n as u32)).collect();
            Ok(Instance::new(n, jobs, &[], 0, &[])?)
        }
        GapFamily::Bc => match n {
            0 | 1 => Err(FamilyError::WitnessSearchFailed(format!(
                "a long job of size {n} leaves every job unit, so B and C coincide"
            ))),
            2 => Ok(Instance::from_json(BC_WITNESS_JSON)?),
            _ => certify_bc(bc_layers(n)?),
        },
    }
}

fn bc_layers(n: usize) -> Result<Instance, ModelError> {
    let u = |i: usize| format!("u{i:02}");
    let mut jobs: Vec<Job> = (1..=3 * n).map(|i| Job::new(u(i), 1)).collect();
    jobs.push(Job::new("long", n as u32));
    let mut pairs = Vec::new();
    for b in 0..n {
        let (x, y, s) = (3 * b + 1, 3 * b + 2, 3 * b + 3);
        pairs.push((u(x), u(s)));
        pairs.push((u(y), u(s)));
        if b + 1 < n {
            pairs.push((u(s), u(x + 3)));
            pairs.push((u(s), u(y + 3)));
        }
    }
    Instance::new(2, jobs, &pairs, 0, &[])
}

fn certify_bc(inst: Instance) -> Result<Instance, FamilyError> {
    let fail = |e: crate::oracle::OracleError| FamilyError::WitnessSearchFailed(e.to_string());
    let b = opt_makespan(&inst, Model::B, false).map_err(fail)?.value;
    let c = opt_makespan(&inst, Model::C, false).map_err(fail)?.value;
    if 4 * c >= 5 * b {
        Ok(inst)
    } else {
        Err(FamilyError::WitnessSearchFailed(format!("OPT_B = {b}, OPT_C = {c}")))
    }
}

/// Outcome of a witness search.
#[derive(Debug, Clone)]
pub struct BcWitness {
    pub instance: Instance,
    pub opt_b: usize,
    pub opt_c: usize,
    pub attempts: u64,
}

/// Samples DAGs over `3n` unit jobs plus one job of size `n` on two machines
/// until the oracle certifies `OPT_C / OPT_B >= 5/4`.
pub fn search_bc_witness(n: usize, seed: u64, max_attempts: u64) -> Result<BcWitness, FamilyError> {
    if n < 2 {
        return Err(FamilyError::WitnessSearchFailed(format!("long job of size {n}")));
    }
    let mut g = rng(seed);
    let ids: Vec<String> = (1..=3 * n).map(|i| format!("u{i}")).collect();
    for attempt in 1..=max_attempts {
        let mut jobs: Vec<Job> = ids.iter().map(|id| Job::new(id.clone(), 1)).collect();
        jobs.push(Job::new("long", n as u32));
        let mut pairs = Vec::new();
        for x in 0..ids.len() {
            for y in x + 1..ids.len() {
                if g.gen_range(0..100) < 35 {
                    pairs.push((ids[x].clone(), ids[y].clone()));
                }
            }
        }
        let inst = Instance::new(2, jobs, &pairs, 0, &[])?;
        let (Ok(b), Ok(c)) = (opt_makespan(&inst, Model::B, false), opt_makespan(&inst, Model::C, false)) else {
            continue;
        };
        if 4 * c.value >= 5 * b.value {
            return Ok(BcWitness { instance: inst, opt_b: b.value, opt_c: c.value, attempts: attempt });
        }
    }
    Err(FamilyError::WitnessSearchFailed(format!("{max_attempts} samples from seed {seed}")))
}
