//! `G(n, μ/n)` giant component via union–find.

use crate::rng::{open_unit, stream};

/// Union–find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }

    /// Returns `false` if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn component_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }
}

/// Largest component of the graph on `n` vertices with the given edges.
pub fn largest_component(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> usize {
    if n == 0 {
        return 0;
    }
    let mut dsu = DisjointSet::new(n);
    let mut best = 1;
    for (a, b) in edges {
        if dsu.union(a, b) {
            best = best.max(dsu.component_size(a));
        }
    }
    best
}

/// Samples `G(n, p)` with `p = min(μ/n, 1)` and returns the size of its
/// largest connected component.
///
/// Edges are enumerated with geometric skips over the pairs `(v, w)`,
/// `w < v`, so the cost is `O(n + #edges)`.
pub fn er_giant_component(n: usize, mu: f64, seed: u64) -> usize {
    assert!(n >= 1, "n >= 1 required");
    assert!(mu >= 0.0, "mu >= 0 required");
    let p = (mu / n as f64).min(1.0);
    if p == 0.0 || n == 1 {
        return 1;
    }
    if p >= 1.0 {
        return n;
    }
    let log_q = (-p).ln_1p();
    let mut rng = stream(seed);
    let mut dsu = DisjointSet::new(n);
    let mut best = 1;
    let mut v: usize = 1;
    let mut w: i64 = -1;
    while v < n {
        let skip = (open_unit(&mut rng).ln() / log_q).floor();
        w += 1 + skip.min(4.0 * n as f64) as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n && dsu.union(v, w as usize) {
            best = best.max(dsu.component_size(v));
        }
    }
    best
}
