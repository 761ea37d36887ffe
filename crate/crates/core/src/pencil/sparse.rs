//! Sparse symmetric storage, envelope Cholesky and block subspace iteration
//! for the large finite element pencils.

use super::{solve_symdef, Pencil};
use crate::{Error, Result};
use nalgebra::DMatrix;
use std::collections::VecDeque;

/// Accumulates `(row, col, value)` triplets; duplicates are summed.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        TripletBuilder { n, entries: Vec::new() }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        TripletBuilder { n, entries: Vec::with_capacity(cap) }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        self.entries.push((i, j, v));
    }

    pub fn build(mut self) -> CsrMatrix {
        self.entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; self.n + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n: self.n, row_ptr, col_idx, values }
    }
}

/// Square compressed-sparse-row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(n: usize) -> Self {
        CsrMatrix { n, row_ptr: vec![0; n + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    pub fn mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, x.ncols());
        for c in 0..x.ncols() {
            let xs = x.column(c);
            let mut ys = out.column_mut(c);
            for i in 0..self.n {
                let mut s = 0.0;
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    s += self.values[k] * xs[self.col_idx[k]];
                }
                ys[i] = s;
            }
        }
        out
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, xi) in x.iter().enumerate().take(self.n) {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += xi * self.values[k] * y[self.col_idx[k]];
            }
        }
        s
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[(i, j)] += v;
            }
        }
        d
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &CsrMatrix, s: f64) -> CsrMatrix {
        assert_eq!(self.n, other.n);
        let mut t = TripletBuilder::with_capacity(self.n, self.nnz() + other.nnz());
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                t.add(i, j, v);
            }
            for (j, v) in other.row(i) {
                t.add(i, j, s * v);
            }
        }
        t.build()
    }

    pub fn scaled(&self, s: f64) -> CsrMatrix {
        let mut c = self.clone();
        c.values.iter_mut().for_each(|v| *v *= s);
        c
    }

    /// Principal submatrix on the rows/columns listed in `keep` (ascending).
    pub fn restrict(&self, keep: &[usize]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut t = TripletBuilder::new(keep.len());
        for (new_i, &old_i) in keep.iter().enumerate() {
            for (j, v) in self.row(old_i) {
                if map[j] != usize::MAX {
                    t.add(new_i, map[j], v);
                }
            }
        }
        t.build()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.max_abs();
        (0..self.n).all(|i| self.row(i).all(|(j, v)| (v - self.get(j, i)).abs() <= tol * scale))
    }

    pub(crate) fn neighbours(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }
}

/// Reverse Cuthill–McKee ordering of the symmetric sparsity graph;
/// `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n).map(|i| a.neighbours(i).len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(a, seed, &degree);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = a.neighbours(v).iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (degree[w], w));
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(a: &CsrMatrix, seed: usize, degree: &[usize]) -> usize {
    let mut root = seed;
    let mut ecc = 0;
    for _ in 0..4 {
        let (levels, last) = bfs_levels(a, root);
        let far = last
            .iter()
            .copied()
            .min_by_key(|&v| (degree[v], v))
            .unwrap_or(root);
        if levels <= ecc {
            break;
        }
        ecc = levels;
        root = far;
    }
    root
}

fn bfs_levels(a: &CsrMatrix, root: usize) -> (usize, Vec<usize>) {
    let mut seen = std::collections::HashSet::from([root]);
    let mut frontier = vec![root];
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in a.neighbours(v) {
                if seen.insert(w) {
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return (depth, frontier);
        }
        depth += 1;
        frontier = next;
    }
}

/// Variable-band (skyline) Cholesky factor of a permuted SPD matrix.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factors `a` after reordering with reverse Cuthill–McKee.
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let perm = reverse_cuthill_mckee(a);
        Self::with_permutation(a, perm)
    }

    pub fn with_permutation(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim();
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (old_i, &i) in inv.iter().enumerate() {
            for &old_j in a.neighbours(old_i) {
                let j = inv[old_j];
                if j < i {
                    first[i] = first[i].min(j);
                } else if i < j {
                    first[j] = first[j].min(i);
                }
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i] + 1));
        }
        let mut data = vec![0.0; start[n]];
        for old_i in 0..n {
            let i = inv[old_i];
            for (old_j, v) in a.row(old_i) {
                let j = inv[old_j];
                if j <= i {
                    data[start[i] + j - first[i]] += v;
                }
            }
        }
        let scale = a.max_abs();
        for i in 0..n {
            let fi = first[i];
            let (done, rest) = data.split_at_mut(start[i]);
            let row = &mut rest[..=i - fi];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let rj = &done[start[j]..start[j] + (j - fj + 1)];
                let dot: f64 = row[k0 - fi..j - fi].iter().zip(&rj[k0 - fj..j - fj]).map(|(x, y)| x * y).sum();
                row[j - fi] = (row[j - fi] - dot) / rj[j - fj];
            }
            let d = row[i - fi] - row[..i - fi].iter().map(|x| x * x).sum::<f64>();
            if !(d > 1e-14 * scale) {
                return Err(Error::NotPositiveDefinite { pivot: perm[i], value: d });
            }
            row[i - fi] = d.sqrt();
        }
        Ok(EnvelopeCholesky { n, perm, first, start, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let dot: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - dot) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let xi = y[i] / row[i - fi];
            y[i] = xi;
            for (yk, l) in y[fi..i].iter_mut().zip(&row[..i - fi]) {
                *yk -= l * xi;
            }
        }
        for (i, &p) in self.perm.iter().enumerate() {
            b[p] = y[i];
        }
    }

    pub fn solve_dense(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let cols: Vec<Vec<f64>> = crate::par::map_range(rhs.ncols(), |c| {
            let mut v: Vec<f64> = rhs.column(c).iter().copied().collect();
            self.solve_in_place(&mut v);
            v
        });
        DMatrix::from_fn(self.n, rhs.ncols(), |i, c| cols[c][i])
    }
}

/// Output of [`subspace_iteration`].
#[derive(Debug, Clone)]
pub struct SubspaceResult {
    /// Largest `μ`, descending.
    pub values: Vec<f64>,
    /// G-orthonormal Ritz vectors, one column per value.
    pub vectors: DMatrix<f64>,
    pub iterations: usize,
}

/// Largest `m` eigenvalues `μ` of `H x = μ G x` with `G` SPD and `H`
/// symmetric positive semidefinite, by block subspace iteration with
/// Rayleigh–Ritz projection. `block` is clamped to `[m, n]`.
pub fn subspace_iteration(
    g: &CsrMatrix,
    h: &CsrMatrix,
    m: usize,
    block: usize,
    tol: f64,
    max_iter: usize,
) -> Result<SubspaceResult> {
    let n = g.dim();
    if h.dim() != n || m == 0 || m > n {
        return Err(Error::InvalidInput(format!("subspace iteration: m = {m}, n = {n}")));
    }
    let p = block.clamp(m, n);
    let chol = EnvelopeCholesky::new(g)?;
    let mut x = weyl_block(n, p);
    let mut prev = vec![f64::NAN; m];
    for it in 1..=max_iter {
        let hx = h.mul_dense(&x);
        let y = chol.solve_dense(&hx);
        let gp = y.transpose() * &hx;
        let hy = h.mul_dense(&y);
        let hp = y.transpose() * &hy;
        let gp = 0.5 * (&gp + gp.transpose());
        let hp = 0.5 * (&hp + hp.transpose());
        let small = solve_symdef(&Pencil::new(hp, gp)?, true)?;
        let q = small.vectors.as_ref().expect("vectors requested");
        let vals = small.real_values();
        let order: Vec<usize> = (0..p).rev().collect();
        let qd = DMatrix::from_fn(p, p, |r, c| q[(r, order[c])]);
        x = &y * qd;
        let mu: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
        let top = mu[0].abs().max(f64::MIN_POSITIVE);
        let converged = (0..m).all(|i| (mu[i] - prev[i]).abs() <= tol * mu[i].abs().max(1e-3 * top));
        prev.copy_from_slice(&mu[..m]);
        if converged {
            let vectors = x.columns(0, m).into_owned();
            return Ok(SubspaceResult { values: mu[..m].to_vec(), vectors, iterations: it });
        }
    }
    Err(Error::NoConvergence(format!("subspace iteration ({m} of {n}, block {p}) after {max_iter} sweeps")))
}

/// Deterministic, well-spread start block: Weyl sequences with rotation
/// numbers `sqrt(prime)`, which are rationally independent.
fn weyl_block(n: usize, p: usize) -> DMatrix<f64> {
    let mut primes = Vec::with_capacity(p);
    let mut c = 2u64;
    while primes.len() < p {
        if (2..c).take_while(|d| d * d <= c).all(|d| c % d != 0) {
            primes.push(c);
        }
        c += 1;
    }
    DMatrix::from_fn(n, p, |i, j| {
        let alpha = (primes[j] as f64).sqrt().fract();
        ((i + 1) as f64 * alpha).fract() - 0.5
    })
}
