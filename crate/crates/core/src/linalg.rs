//! Envelope (skyline) Cholesky for symmetric positive definite systems.

use crate::error::{invalid, Result};
use std::collections::VecDeque;

/// Reverse Cuthill–McKee ordering; returns `order[new] = old`.
pub fn rcm_order(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let start = (0..n)
            .filter(|&i| !seen[i])
            .min_by_key(|&i| (adj[i].len(), i))
            .unwrap();
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !seen[w]).collect();
            next.sort_by_key(|&w| (adj[w].len(), w));
            for w in next {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Symmetric matrix stored by rows of its lower envelope, in a permuted order.
#[derive(Debug, Clone)]
pub struct SkylineMatrix {
    perm: Vec<usize>,
    inv: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<f64>,
    factored: bool,
}

impl SkylineMatrix {
    /// Pattern from an adjacency graph (indices `0..adj.len()`).
    pub fn with_pattern(adj: &[Vec<usize>]) -> Self {
        let perm = rcm_order(adj);
        let n = perm.len();
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (old, nb) in adj.iter().enumerate() {
            let i = inv[old];
            for &w in nb {
                let j = inv[w];
                if j < i {
                    first[i] = first[i].min(j);
                }
            }
        }
        let mut offset = Vec::with_capacity(n + 1);
        let mut total = 0;
        for i in 0..n {
            offset.push(total);
            total += i - first[i] + 1;
        }
        offset.push(total);
        SkylineMatrix {
            perm,
            inv,
            first,
            offset,
            data: vec![0.0; total],
            factored: false,
        }
    }

    pub fn size(&self) -> usize {
        self.perm.len()
    }

    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn clear(&mut self) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
        self.factored = false;
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        self.offset[i] + (j - self.first[i])
    }

    /// Adds `v` to entry (i, j) in original indices. Off-diagonal entries are
    /// symmetric, so add each unordered pair once from either side.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (a, b) = (self.inv[i], self.inv[j]);
        let (r, c) = if a >= b { (a, b) } else { (b, a) };
        debug_assert!(c >= self.first[r], "entry outside the pattern");
        let s = self.slot(r, c);
        self.data[s] += v;
    }

    /// In-place Cholesky factorization.
    pub fn factor(&mut self) -> Result<()> {
        let n = self.size();
        for i in 0..n {
            let fi = self.first[i];
            for j in fi..=i {
                let fj = self.first[j];
                let k0 = fi.max(fj);
                let ri = self.offset[i] + (k0 - fi);
                let rj = self.offset[j] + (k0 - fj);
                let len = j - k0;
                let mut s = self.data[self.slot(i, j)];
                for k in 0..len {
                    s -= self.data[ri + k] * self.data[rj + k];
                }
                if j < i {
                    let d = self.data[self.slot(j, j)];
                    let at = self.slot(i, j);
                    self.data[at] = s / d;
                } else {
                    if !(s > 0.0) {
                        return invalid("matrix is not positive definite");
                    }
                    let at = self.slot(i, i);
                    self.data[at] = s.sqrt();
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    /// Solves with the factored matrix; `b` is in original indexing.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if !self.factored {
            return invalid("matrix has not been factored");
        }
        let n = self.size();
        let mut y: Vec<f64> = (0..n).map(|i| b[self.perm[i]]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let mut s = y[i];
            for j in fi..i {
                s -= self.data[self.slot(i, j)] * y[j];
            }
            y[i] = s / self.data[self.slot(i, i)];
        }
        for i in (0..n).rev() {
            y[i] /= self.data[self.slot(i, i)];
            let yi = y[i];
            let fi = self.first[i];
            for j in fi..i {
                y[j] -= self.data[self.slot(i, j)] * yi;
            }
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
        Ok(x)
    }
}
