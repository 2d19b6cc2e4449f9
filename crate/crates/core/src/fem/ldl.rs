//! Sparse LDLᵀ factorization with a geometric nested-dissection ordering.
//!
//! The eigenvalue solver factors the (shifted) stiffness matrix once per
//! shift and back-substitutes once per inverse-iteration step. The matrices
//! come from planar meshes, so recursive coordinate bisection with a
//! one-layer vertex separator keeps fill-in near the O(n log n) optimum.

use super::sparse::Csr;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// LDLᵀ factors of PAPᵀ for a permutation P chosen at construction.
pub struct LdlFactor {
    n: usize,
    /// perm[k] = original index of permuted row k.
    perm: Vec<usize>,
    l_colptr: Vec<usize>,
    l_rowidx: Vec<usize>,
    l_values: Vec<f64>,
    d: Vec<f64>,
}

/// Recursive coordinate-bisection fill-reducing order. `coords[i]` is the
/// plane position of unknown i; `adjacency` is the symmetric matrix pattern.
pub fn nested_dissection_order(coords: &[Point], adj: &Csr) -> Vec<usize> {
    let mut order = Vec::with_capacity(coords.len());
    let all: Vec<usize> = (0..coords.len()).collect();
    dissect(&all, coords, adj, &mut order);
    debug_assert_eq!(order.len(), coords.len());
    order
}

fn dissect(nodes: &[usize], coords: &[Point], adj: &Csr, order: &mut Vec<usize>) {
    if nodes.len() <= 48 {
        order.extend_from_slice(nodes);
        return;
    }
    // Split along the longer bounding-box axis at the median.
    let (mut lo_x, mut hi_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in nodes {
        lo_x = lo_x.min(coords[v].x);
        hi_x = hi_x.max(coords[v].x);
        lo_y = lo_y.min(coords[v].y);
        hi_y = hi_y.max(coords[v].y);
    }
    let use_x = hi_x - lo_x >= hi_y - lo_y;
    let mut sorted: Vec<usize> = nodes.to_vec();
    sorted.sort_by(|&a, &b| {
        let (ka, kb) = if use_x { (coords[a].x, coords[b].x) } else { (coords[a].y, coords[b].y) };
        ka.total_cmp(&kb).then(a.cmp(&b))
    });
    let half = sorted.len() / 2;
    let mut side = vec![0u8; coords.len()];
    for &v in &sorted[..half] {
        side[v] = 1;
    }
    for &v in &sorted[half..] {
        side[v] = 2;
    }
    // Separator: second-side nodes adjacent to the first side.
    let mut in_sep = vec![false; coords.len()];
    for &v in &sorted[half..] {
        for k in adj.row_ptr[v]..adj.row_ptr[v + 1] {
            let w = adj.col_idx[k];
            if side[w] == 1 {
                in_sep[v] = true;
                break;
            }
        }
    }
    let a_part: Vec<usize> = sorted[..half].to_vec();
    let b_part: Vec<usize> = sorted[half..].iter().copied().filter(|&v| !in_sep[v]).collect();
    let sep: Vec<usize> = sorted[half..].iter().copied().filter(|&v| in_sep[v]).collect();
    if sep.len() >= nodes.len() / 2 {
        // Degenerate split (dense coupling); stop recursing.
        order.extend_from_slice(&sorted);
        return;
    }
    dissect(&a_part, coords, adj, order);
    dissect(&b_part, coords, adj, order);
    order.extend_from_slice(&sep);
}

impl LdlFactor {
    /// Factors A with the given ordering. Fails with `SolverError` when a
    /// pivot collapses (matrix not positive definite within roundoff).
    pub fn new(a: &Csr, order: &[usize]) -> Result<Self> {
        let n = a.n;
        assert_eq!(order.len(), n);
        let perm = order.to_vec();
        let mut inv_perm = vec![0usize; n];
        for (k, &orig) in perm.iter().enumerate() {
            inv_perm[orig] = k;
        }

        // Permuted upper-triangular pattern in column-major order: for
        // column k, the rows i < k with A[perm[i], perm[k]] != 0.
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for orig_row in 0..n {
            let i = inv_perm[orig_row];
            for idx in a.row_ptr[orig_row]..a.row_ptr[orig_row + 1] {
                let j = inv_perm[a.col_idx[idx]];
                if i <= j {
                    cols[j].push((i, a.values[idx]));
                }
            }
        }
        for col in cols.iter_mut() {
            col.sort_by_key(|e| e.0);
        }

        // Elimination tree and per-column nonzero counts of L.
        let mut parent = vec![usize::MAX; n];
        let mut ancestor = vec![usize::MAX; n];
        for k in 0..n {
            for &(i, _) in &cols[k] {
                if i >= k {
                    continue;
                }
                let mut r = i;
                while ancestor[r] != usize::MAX && ancestor[r] != k {
                    let next = ancestor[r];
                    ancestor[r] = k;
                    r = next;
                }
                if ancestor[r] == usize::MAX {
                    ancestor[r] = k;
                    parent[r] = k;
                }
            }
        }
        let mut l_count = vec![0usize; n];
        let mut flag = vec![usize::MAX; n];
        for k in 0..n {
            flag[k] = k;
            for &(i, _) in &cols[k] {
                if i >= k {
                    continue;
                }
                let mut r = i;
                while flag[r] != k {
                    l_count[r] += 1;
                    flag[r] = k;
                    r = parent[r];
                }
            }
        }

        let mut l_colptr = vec![0usize; n + 1];
        for k in 0..n {
            l_colptr[k + 1] = l_colptr[k] + l_count[k];
        }
        let nnz = l_colptr[n];
        let mut l_rowidx = vec![0usize; nnz];
        let mut l_values = vec![0.0f64; nnz];
        let mut d = vec![0.0f64; n];

        // Up-looking numeric factorization (row k of L per step).
        let mut y = vec![0.0f64; n];
        let mut pattern = vec![0usize; n];
        let mut l_next = l_colptr.clone();
        let mut flag = vec![usize::MAX; n];
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            y[k] = 0.0;
            for &(i, v) in &cols[k] {
                if i > k {
                    continue;
                }
                y[i] += v;
                let mut len = 0;
                let mut r = i;
                while flag[r] != k {
                    pattern[len] = r;
                    len += 1;
                    flag[r] = k;
                    r = parent[r];
                }
                // Reverse the path onto the stack so rows come out ascending.
                for l in (0..len).rev() {
                    top -= 1;
                    pattern[top] = pattern[l];
                }
            }
            d[k] = y[k];
            y[k] = 0.0;
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = 0.0;
                let lki = yi / d[i];
                for idx in l_colptr[i]..l_next[i] {
                    y[l_rowidx[idx]] -= l_values[idx] * yi;
                }
                d[k] -= lki * yi;
                l_rowidx[l_next[i]] = k;
                l_values[l_next[i]] = lki;
                l_next[i] += 1;
            }
            if !(d[k].abs() > 0.0) || !d[k].is_finite() {
                return Err(Error::SolverError(format!("zero pivot at column {k} of {n}")));
            }
        }

        Ok(LdlFactor { n, perm, l_colptr, l_rowidx, l_values, d })
    }

    /// Solves A x = b in place of the provided buffer.
    pub fn solve(&self, b: &[f64], x: &mut [f64]) {
        debug_assert_eq!(b.len(), self.n);
        let mut w = vec![0.0f64; self.n];
        for k in 0..self.n {
            w[k] = b[self.perm[k]];
        }
        // Forward: L z = b.
        for k in 0..self.n {
            let wk = w[k];
            for idx in self.l_colptr[k]..self.l_colptr[k + 1] {
                w[self.l_rowidx[idx]] -= self.l_values[idx] * wk;
            }
        }
        // Diagonal and backward: Lᵀ x = D⁻¹ z.
        for k in 0..self.n {
            w[k] /= self.d[k];
        }
        for k in (0..self.n).rev() {
            let mut acc = w[k];
            for idx in self.l_colptr[k]..self.l_colptr[k + 1] {
                acc -= self.l_values[idx] * w[self.l_rowidx[idx]];
            }
            w[k] = acc;
        }
        for k in 0..self.n {
            x[self.perm[k]] = w[k];
        }
    }

    /// Number of nonzeros in L (fill-in diagnostic).
    #[cfg(test)]
    pub fn l_nnz(&self) -> usize {
        self.l_values.len()
    }
}
