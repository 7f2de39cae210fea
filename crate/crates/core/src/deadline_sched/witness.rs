use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::job_id;

use super::{DeadlineInstance, DeadlineJob};

/// Shape of a witness-first deadline instance.
#[derive(Debug, Clone)]
pub struct WitnessSpec {
    pub intervals: usize,
    pub machines: usize,
    pub interval_len: usize,
    pub max_tasks: usize,
    pub max_size: usize,
    pub max_jobs: usize,
    /// Probability that a machine slot is available, in percent.
    pub cap_percent: u32,
    /// Probability of a precedence edge between a monotone pair, in percent.
    pub edge_percent: u32,
}

impl Default for WitnessSpec {
    fn default() -> Self {
        WitnessSpec {
            intervals: 3,
            machines: 2,
            interval_len: 4,
            max_tasks: 30,
            max_size: 4,
            max_jobs: 12,
            cap_percent: 85,
            edge_percent: 35,
        }
    }
}

impl WitnessSpec {
    /// Random shape within p ≤ 4, m ≤ 3, N ≤ 30.
    pub fn sample(rng: &mut impl Rng) -> Self {
        WitnessSpec {
            intervals: rng.gen_range(1..=4),
            machines: rng.gen_range(1..=3),
            interval_len: rng.gen_range(2..=6),
            edge_percent: rng.gen_range(10..=60),
            cap_percent: rng.gen_range(60..=100),
            ..WitnessSpec::default()
        }
    }
}

/// Samples a placement of every task into available slots inside its
/// window first, then emits the instance. Returns the instance and the
/// placement as `(job, machine, slot)` triples, one per task.
pub fn witness_first(spec: &WitnessSpec, rng: &mut impl Rng) -> (DeadlineInstance, Vec<(usize, usize, usize)>) {
    let (p, m, len) = (spec.intervals.max(1), spec.machines.max(1), spec.interval_len.max(1));
    let horizon = p * len;
    let capacity: Vec<Vec<bool>> =
        (0..m).map(|_| (0..horizon).map(|_| rng.gen_range(0..100) < spec.cap_percent).collect()).collect();
    let mut taken = vec![vec![false; horizon]; m];
    let target = rng.gen_range(1..=spec.max_tasks.max(1));
    let mut windows = Vec::new();
    let mut cells = Vec::new();
    let mut total = 0;
    let mut attempts = 0;
    while total < target && windows.len() < spec.max_jobs && attempts < 200 {
        attempts += 1;
        let q1 = rng.gen_range(1..=p);
        let q2 = rng.gen_range(q1..=p);
        let (r, d) = ((q1 - 1) * len + 1, q2 * len);
        let mut avail: Vec<(usize, usize)> = (0..m)
            .flat_map(|i| (r..=d).map(move |t| (i, t)))
            .filter(|&(i, t)| capacity[i][t - 1] && !taken[i][t - 1])
            .collect();
        if avail.is_empty() {
            continue;
        }
        let size = rng.gen_range(1..=spec.max_size.min(avail.len()).min(target - total));
        avail.shuffle(rng);
        let mut mine: Vec<(usize, usize)> = avail[..size].to_vec();
        mine.sort_by_key(|&(i, t)| (t, i));
        for &(i, t) in &mine {
            taken[i][t - 1] = true;
        }
        total += size;
        windows.push((r, d, size));
        cells.push(mine);
    }
    let n = windows.len();
    let jobs: Vec<DeadlineJob> = windows
        .iter()
        .enumerate()
        .map(|(k, &(r, d, size))| DeadlineJob { id: job_id(k, n), size: size as u32, release: r, deadline: d })
        .collect();
    let mut by_window: Vec<usize> = (0..n).collect();
    by_window.sort_by_key(|&k| (windows[k].0, windows[k].1, k));
    let mut prec = Vec::new();
    for (x, &a) in by_window.iter().enumerate() {
        for &b in &by_window[x + 1..] {
            let monotone = windows[a].0 <= windows[b].0 && windows[a].1 <= windows[b].1;
            if monotone && rng.gen_range(0..100) < spec.edge_percent {
                prec.push((jobs[a].id.clone(), jobs[b].id.clone()));
            }
        }
    }
    let placement = cells
        .iter()
        .enumerate()
        .flat_map(|(k, c)| c.iter().map(move |&(i, t)| (k, i + 1, t)))
        .collect();
    let inst = DeadlineInstance::new(horizon, p, capacity, jobs, &prec, None).expect("generated instance is well formed");
    (inst, placement)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::rng;

    #[test]
    fn placement_respects_windows_and_capacity() {
        let mut r = rng(3);
        for _ in 0..50 {
            let spec = WitnessSpec::sample(&mut r);
            let (inst, placement) = witness_first(&spec, &mut r);
            assert_eq!(placement.len(), inst.total_tasks());
            assert!(inst.total_tasks() <= 30);
            let mut seen = std::collections::HashSet::new();
            for &(j, i, t) in &placement {
                assert!(inst.cap(i, t));
                assert!(inst.release(j) <= t && t <= inst.deadline(j));
                assert!(seen.insert((i, t)));
            }
        }
    }
}
