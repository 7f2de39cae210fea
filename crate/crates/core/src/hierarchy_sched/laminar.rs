//! Binary laminar decomposition of the horizon.

use serde::Serialize;

/// Interval `pos` at `level`; level 0 is the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct IntervalId {
    pub level: u32,
    pub pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LaminarTree {
    horizon: usize,
    requested: usize,
    depth: u32,
}

/// Complete binary tree over `[1, T_pad]`, `T_pad` the next power of two.
pub fn build_laminar(t: usize) -> LaminarTree {
    let requested = t.max(1);
    let horizon = requested.next_power_of_two();
    LaminarTree { horizon, requested, depth: horizon.trailing_zeros() }
}

impl LaminarTree {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Slots added to reach a power of two.
    pub fn padding(&self) -> usize {
        self.horizon - self.requested
    }

    /// log2 of the padded horizon; leaves sit at this level.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn root(&self) -> IntervalId {
        IntervalId { level: 0, pos: 0 }
    }

    pub fn num_intervals(&self) -> usize {
        2 * self.horizon - 1
    }

    pub fn len(&self, id: IntervalId) -> usize {
        self.horizon >> id.level
    }

    pub fn begin(&self, id: IntervalId) -> usize {
        id.pos * self.len(id) + 1
    }

    pub fn end(&self, id: IntervalId) -> usize {
        (id.pos + 1) * self.len(id)
    }

    pub fn contains(&self, id: IntervalId, slot: usize) -> bool {
        self.begin(id) <= slot && slot <= self.end(id)
    }

    pub fn children(&self, id: IntervalId) -> Option<(IntervalId, IntervalId)> {
        (id.level < self.depth).then(|| {
            let l = id.level + 1;
            (IntervalId { level: l, pos: 2 * id.pos }, IntervalId { level: l, pos: 2 * id.pos + 1 })
        })
    }

    /// Descendants of `id` at absolute `level`, left to right.
    pub fn descendants_at(&self, id: IntervalId, level: u32) -> Vec<IntervalId> {
        if level < id.level || level > self.depth {
            return Vec::new();
        }
        let shift = level - id.level;
        (id.pos << shift..(id.pos + 1) << shift).map(|pos| IntervalId { level, pos }).collect()
    }

    /// Ancestor of `id` at `level <= id.level`.
    pub fn ancestor_at(&self, id: IntervalId, level: u32) -> IntervalId {
        IntervalId { level, pos: id.pos >> (id.level - level) }
    }

    pub fn is_within(&self, inner: IntervalId, outer: IntervalId) -> bool {
        inner.level >= outer.level && self.ancestor_at(inner, outer.level) == outer
    }

    /// Smallest interval containing slots `lo..=hi`.
    pub fn owner(&self, lo: usize, hi: usize) -> IntervalId {
        let mut id = self.root();
        while let Some((a, b)) = self.children(id) {
            if hi <= self.end(a) {
                id = a;
            } else if lo >= self.begin(b) {
                id = b;
            } else {
                break;
            }
        }
        id
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        let t = build_laminar(1);
        assert_eq!((t.horizon(), t.depth(), t.num_intervals()), (1, 0, 1));
        let t = build_laminar(8);
        assert_eq!((t.depth(), t.num_intervals(), t.padding()), (3, 15, 0));
        for l in 0..=3 {
            let ids = t.descendants_at(t.root(), l);
            assert_eq!(ids.len(), 1 << l);
            assert!(ids.iter().all(|&i| t.len(i) == 8 >> l));
        }
        let t = build_laminar(6);
        assert_eq!((t.horizon(), t.padding()), (8, 2));
    }

    #[test]
    fn owners() {
        let t = build_laminar(8);
        assert_eq!(t.owner(1, 1), IntervalId { level: 3, pos: 0 });
        assert_eq!(t.owner(4, 5), t.root());
        assert_eq!(t.owner(5, 6), IntervalId { level: 2, pos: 2 });
        assert_eq!(t.owner(5, 8), IntervalId { level: 1, pos: 1 });
        let leaf = IntervalId { level: 3, pos: 5 };
        assert_eq!(t.ancestor_at(leaf, 1), IntervalId { level: 1, pos: 1 });
        assert!(t.is_within(leaf, IntervalId { level: 2, pos: 2 }));
        assert!(!t.is_within(leaf, IntervalId { level: 2, pos: 3 }));
    }
}
