/// Fenwick tree over non-negative `f64` weights with weighted selection.
///
/// Point updates accumulate rounding error in the partial sums, so the
/// tree keeps a copy of the raw weights and rebuilds itself after `len`
/// updates.
#[derive(Debug, Clone)]
pub(crate) struct Fenwick {
    tree: Vec<f64>,
    values: Vec<f64>,
    updates: usize,
}

impl Fenwick {
    pub fn new(len: usize) -> Self {
        Self { tree: vec![0.0; len + 1], values: vec![0.0; len], updates: 0 }
    }

    #[cfg(test)]
    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn set(&mut self, idx: usize, value: f64) {
        let delta = value - self.values[idx];
        self.values[idx] = value;
        self.updates += 1;
        if self.updates >= self.values.len().max(64) {
            self.rebuild();
            return;
        }
        let mut i = idx + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    pub fn rebuild(&mut self) {
        self.updates = 0;
        self.tree.iter_mut().for_each(|t| *t = 0.0);
        for (k, &v) in self.values.iter().enumerate() {
            let i = k + 1;
            self.tree[i] += v;
            let parent = i + (i & i.wrapping_neg());
            if parent < self.tree.len() {
                let carry = self.tree[i];
                self.tree[parent] += carry;
            }
        }
    }

    pub fn total(&self) -> f64 {
        let mut i = self.values.len();
        let mut s = 0.0;
        while i > 0 {
            s += self.tree[i];
            i &= i - 1;
        }
        s
    }

    /// Index `k` with `prefix(k) <= target < prefix(k + 1)`, skipping
    /// zero-weight slots. `None` only if every weight is zero.
    pub fn find(&self, mut target: f64) -> Option<usize> {
        let len = self.values.len();
        let mut pos = 0;
        let mut step = len.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= len && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        // Rounding can land on an empty slot; move to the nearest live one.
        if pos < len && self.values[pos] > 0.0 {
            return Some(pos);
        }
        (pos.min(len)..len).chain((0..pos.min(len)).rev()).find(|&k| self.values[k] > 0.0)
    }
}
