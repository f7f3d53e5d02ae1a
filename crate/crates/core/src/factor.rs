//! Envelope (skyline) Cholesky factorization under reverse Cuthill–McKee
//! ordering. For the banded matrices of 2D meshes this is far cheaper than
//! repeated iterative solves against the same operator.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::fem::SparseSymMatrix;
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct EnvelopeCholesky<T> {
    /// `perm[new] = old`.
    perm: Vec<usize>,
    first: Vec<usize>,
    /// Row `i` holds `L[i][first[i]..=i]` at `start[i]..start[i + 1]`.
    start: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> EnvelopeCholesky<T> {
    /// Fails with `InvalidArgument` if `a` is not numerically positive definite.
    pub fn factor(a: &SparseSymMatrix<T>) -> Result<Self> {
        let n = a.dim();
        let mut adj = vec![Vec::new(); n];
        for (i, j, _) in a.triplets() {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        let perm = rcm(&adj);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for (i, j, _) in a.triplets() {
            let (p, q) = (inv[i], inv[j]);
            let (lo, hi) = if p < q { (p, q) } else { (q, p) };
            first[hi] = first[hi].min(lo);
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + i - first[i] + 1);
        }
        let mut values = vec![T::zero(); start[n]];
        for (i, j, v) in a.triplets() {
            let (p, q) = (inv[i], inv[j]);
            let (lo, hi) = if p < q { (p, q) } else { (q, p) };
            values[start[hi] + lo - first[hi]] += v;
        }

        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = values[start[i] + j - fi];
                for k in k0..j {
                    s -= values[start[i] + k - fi] * values[start[j] + k - fj];
                }
                if j < i {
                    values[start[i] + j - fi] = s / values[start[j] + j - fj];
                } else {
                    if !(s > T::zero()) {
                        return Err(Error::InvalidArgument(format!("matrix is not positive definite (pivot {i})")));
                    }
                    values[start[i] + i - fi] = s.sqrt();
                }
            }
        }
        Ok(Self { perm, first, start, values })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(b.len(), n, "right-hand side has wrong length");
        let mut y: Vec<T> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            let mut s = y[i];
            for k in fi..i {
                s -= row[k - fi] * y[k];
            }
            y[i] = s / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for k in fi..i {
                y[k] -= row[k - fi] * yi;
            }
        }
        let mut x = vec![T::zero(); n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Reverse Cuthill–McKee ordering, one pseudo-peripheral start per component.
fn rcm(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for seed in 0..n {
        if seen[seed] {
            continue;
        }
        let root = peripheral(adj, seed);
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !seen[w]).collect();
            next.sort_by_key(|&w| (adj[w].len(), w));
            next.dedup();
            for w in next {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn peripheral(adj: &[Vec<usize>], seed: usize) -> usize {
    let mut root = seed;
    let mut depth = 0;
    for _ in 0..8 {
        let (far, d) = farthest(adj, root);
        if d <= depth {
            break;
        }
        root = far;
        depth = d;
    }
    root
}

fn farthest(adj: &[Vec<usize>], root: usize) -> (usize, usize) {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut best = (root, 0);
    while let Some(v) = queue.pop_front() {
        let d = dist[v];
        if d > best.1 || (d == best.1 && adj[v].len() < adj[best.0].len()) {
            best = (v, d);
        }
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = d + 1;
                queue.push_back(w);
            }
        }
    }
    best
}
