//! Seeded random instance generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{job_id, Instance, Job};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of a random DAG instance.
#[derive(Debug, Clone)]
pub struct DagSpec {
    pub jobs: usize,
    pub max_size: u32,
    pub machines: usize,
    /// Probability of an edge i → k for i < k, in percent.
    pub edge_percent: u32,
    pub delay: u32,
}

impl Default for DagSpec {
    fn default() -> Self {
        DagSpec { jobs: 6, max_size: 2, machines: 2, edge_percent: 25, delay: 0 }
    }
}

/// Random DAG over jobs `j00..`; edges only go from lower to higher index.
pub fn random_dag(spec: &DagSpec, rng: &mut impl Rng) -> Instance {
    let jobs: Vec<Job> =
        (0..spec.jobs).map(|i| Job::new(job_id(i, spec.jobs), rng.gen_range(1..=spec.max_size.max(1)))).collect();
    let mut pairs = Vec::new();
    for a in 0..spec.jobs {
        for b in a + 1..spec.jobs {
            if rng.gen_range(0..100) < spec.edge_percent {
                pairs.push((a, b));
            }
        }
    }
    Instance::from_sorted(spec.machines.max(1), jobs, &pairs, spec.delay).expect("forward edges are acyclic")
}

/// Random DAG whose total task count does not exceed `max_tasks`.
pub fn random_dag_capped(spec: &DagSpec, max_tasks: usize, rng: &mut impl Rng) -> Instance {
    loop {
        let inst = random_dag(spec, rng);
        if inst.total_tasks() <= max_tasks {
            return inst;
        }
    }
}
