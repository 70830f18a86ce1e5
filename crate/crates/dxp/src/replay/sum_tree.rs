//! Sum tree for proportional priority sampling.
//!
//! A complete binary tree over a power-of-two number of leaves. Internal
//! nodes hold the sum of their children, so a prefix-sum descent locates the
//! leaf covering a cumulative-mass query in O(log n), and a leaf update only
//! touches its root path.

/// Heap-layout sum tree: `nodes[0]` unused, root at 1, leaves at
/// `capacity..2*capacity`. Parents are recomputed as the exact sum of their
/// children on every update, so internal consistency holds to the last bit.
#[derive(Debug, Clone)]
pub struct SumTree {
    capacity: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    /// Build an all-zero tree with at least `min_leaves` leaves, rounded up
    /// to a power of two.
    pub fn new(min_leaves: usize) -> Self {
        let capacity = min_leaves.max(1).next_power_of_two();
        SumTree {
            capacity,
            nodes: vec![0.0; 2 * capacity],
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Total priority mass.
    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn leaf(&self, index: usize) -> f64 {
        self.nodes[self.capacity + index]
    }

    /// Set leaf `index` to `value` and refresh its root path.
    pub fn set(&mut self, index: usize, value: f64) {
        debug_assert!(index < self.capacity);
        debug_assert!(value >= 0.0);
        let mut node = self.capacity + index;
        self.nodes[node] = value;
        while node > 1 {
            node /= 2;
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
    }

    /// Descend to the leaf whose cumulative interval contains `query`, with
    /// the convention that leaf `j` covers `(prefix_{j-1}, prefix_j]`.
    /// `query` must lie in `(0, total]`.
    pub fn find(&self, query: f64) -> usize {
        debug_assert!(query > 0.0 && query <= self.total());
        let mut node = 1;
        let mut q = query;
        while node < self.capacity {
            let left = 2 * node;
            if q <= self.nodes[left] {
                node = left;
            } else {
                q -= self.nodes[left];
                node = left + 1;
            }
        }
        node - self.capacity
    }

    /// Scan the whole tree and report the largest absolute deviation of any
    /// internal node from the sum of its children.
    pub fn max_consistency_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for node in 1..self.capacity {
            let err = (self.nodes[node] - (self.nodes[2 * node] + self.nodes[2 * node + 1])).abs();
            worst = worst.max(err);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn prefix_query_follows_cumulative_intervals() {
        // Cumulative sums [1, 3, 6, 10]: 3.5 lies in (3, 6], so leaf 2.
        let mut tree = SumTree::new(4);
        for (i, p) in [1.0, 2.0, 3.0, 4.0].iter().enumerate() {
            tree.set(i, *p);
        }
        assert_eq!(tree.total(), 10.0);
        assert_eq!(tree.find(3.5), 2);
        assert_eq!(tree.find(0.5), 0);
        assert_eq!(tree.find(1.0), 0);
        assert_eq!(tree.find(1.0001), 1);
        assert_eq!(tree.find(3.0), 1);
        assert_eq!(tree.find(6.0), 2);
        assert_eq!(tree.find(10.0), 3);
    }

    #[test]
    fn update_propagates_to_root() {
        let mut tree = SumTree::new(4);
        for (i, p) in [1.0, 2.0, 3.0].iter().enumerate() {
            tree.set(i, *p);
        }
        assert_eq!(tree.total(), 6.0);
        tree.set(1, 5.0);
        assert_eq!(tree.total(), 9.0);
    }

    #[test]
    fn root_matches_brute_force_after_random_updates() {
        let mut rng = crate::rng::stream(11, crate::rng::StreamId::Replay);
        let mut tree = SumTree::new(256);
        let mut leaves = vec![0.0f64; 256];
        for _ in 0..1000 {
            let i = rng.gen_range(0..256);
            let v = rng.gen_range(0.0..100.0);
            leaves[i] = v;
            tree.set(i, v);
        }
        let brute: f64 = leaves.iter().sum();
        assert!((tree.total() - brute).abs() < 1e-9);
        assert_eq!(tree.max_consistency_error(), 0.0);
    }

    proptest! {
        #[test]
        fn consistency_under_arbitrary_updates(updates in prop::collection::vec((0usize..64, 0.0f64..1e6), 1..200)) {
            let mut tree = SumTree::new(64);
            for (i, v) in updates {
                tree.set(i, v);
            }
            prop_assert!(tree.max_consistency_error() <= 1e-9);
        }
    }
}
