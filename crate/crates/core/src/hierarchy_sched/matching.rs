//! Maximum-cardinality bipartite matching (Hopcroft–Karp).

use std::collections::VecDeque;

const FREE: usize = usize::MAX;

/// `adj[u]` lists the right vertices of left vertex `u`. Returns the partner
/// of every left vertex.
pub fn hopcroft_karp(adj: &[Vec<usize>], n_right: usize) -> Vec<Option<usize>> {
    let n_left = adj.len();
    let mut left = vec![FREE; n_left];
    let mut right = vec![FREE; n_right];
    let mut dist = vec![0usize; n_left];
    loop {
        // layered BFS from free left vertices
        let mut queue = VecDeque::new();
        for u in 0..n_left {
            if left[u] == FREE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = right[v];
                if w == FREE {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        for u in 0..n_left {
            if left[u] == FREE {
                augment(u, adj, &mut left, &mut right, &mut dist);
            }
        }
    }
    left.into_iter().map(|v| (v != FREE).then_some(v)).collect()
}

fn augment(u: usize, adj: &[Vec<usize>], left: &mut [usize], right: &mut [usize], dist: &mut [usize]) -> bool {
    for &v in &adj[u] {
        let w = right[v];
        if w == FREE || (dist[w] == dist[u] + 1 && augment(w, adj, left, right, dist)) {
            left[u] = v;
            right[v] = u;
            return true;
        }
    }
    dist[u] = usize::MAX;
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Edmonds–Karp on the unit-capacity network source → left → right → sink.
    fn max_flow(adj: &[Vec<usize>], n_right: usize) -> usize {
        let n = adj.len() + n_right + 2;
        let (s, t) = (n - 2, n - 1);
        let mut cap = vec![vec![0i32; n]; n];
        for (u, vs) in adj.iter().enumerate() {
            cap[s][u] = 1;
            for &v in vs {
                cap[u][adj.len() + v] = 1;
            }
        }
        for v in 0..n_right {
            cap[adj.len() + v][t] = 1;
        }
        let mut flow = 0;
        loop {
            let mut prev = vec![usize::MAX; n];
            prev[s] = s;
            let mut q = VecDeque::from([s]);
            while let Some(a) = q.pop_front() {
                for b in 0..n {
                    if prev[b] == usize::MAX && cap[a][b] > 0 {
                        prev[b] = a;
                        q.push_back(b);
                    }
                }
            }
            if prev[t] == usize::MAX {
                return flow;
            }
            let mut b = t;
            while b != s {
                let a = prev[b];
                cap[a][b] -= 1;
                cap[b][a] += 1;
                b = a;
            }
            flow += 1;
        }
    }

    #[test]
    fn agrees_with_max_flow() {
        let mut g = crate::gen::rng(3);
        for _ in 0..300 {
            let (nl, nr) = (g.gen_range(0..9), g.gen_range(0..9));
            let p = g.gen_range(10..70);
            let adj: Vec<Vec<usize>> =
                (0..nl).map(|_| (0..nr).filter(|_| g.gen_range(0..100) < p).collect()).collect();
            let m = hopcroft_karp(&adj, nr);
            let mut used = vec![false; nr];
            for (u, v) in m.iter().enumerate() {
                if let Some(v) = *v {
                    assert!(adj[u].contains(&v));
                    assert!(!used[v]);
                    used[v] = true;
                }
            }
            assert_eq!(m.iter().flatten().count(), max_flow(&adj, nr));
        }
    }
}
