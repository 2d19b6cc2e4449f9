//! Compressed sparse row matrices and P1 stiffness/mass assembly on the
//! interior (Dirichlet-eliminated) nodes.

use super::Mesh;
use rayon::prelude::*;

/// Symmetric sparse matrix in CSR form (full pattern stored).
#[derive(Clone, Debug)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    /// y = A x.
    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    /// xᵀ A y.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            let mut row = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row += self.values[k] * y[self.col_idx[k]];
            }
            acc += x[i] * row;
        }
        acc
    }

    /// A + shift * B elementwise on a shared pattern; panics if patterns differ.
    pub fn shifted(&self, other: &Csr, shift: f64) -> Csr {
        assert_eq!(self.row_ptr, other.row_ptr);
        assert_eq!(self.col_idx, other.col_idx);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + shift * b)
            .collect();
        Csr { n: self.n, row_ptr: self.row_ptr.clone(), col_idx: self.col_idx.clone(), values }
    }
}

/// Stiffness and consistent mass matrices restricted to interior nodes, plus
/// the interior node list. Element matrices are computed in parallel; the
/// scatter runs in triangle order so the result is deterministic.
pub fn assemble(mesh: &Mesh) -> (Csr, Csr, Vec<usize>) {
    let interior = mesh.interior_nodes();
    let mut index_of = vec![usize::MAX; mesh.nodes.len()];
    for (k, &node) in interior.iter().enumerate() {
        index_of[node] = k;
    }
    let n = interior.len();

    // Per-triangle element matrices: (stiffness, mass) over local 3x3.
    let elems: Vec<([f64; 9], [f64; 9])> = mesh
        .triangles
        .par_iter()
        .map(|&[a, b, c]| {
            let (pa, pb, pc) = (mesh.nodes[a], mesh.nodes[b], mesh.nodes[c]);
            let two_a = (pb - pa).cross(pc - pa);
            let area = 0.5 * two_a;
            // Gradient of the hat at vertex i is perp(opposite edge)/(2A).
            let g = [
                (pc - pb).perp() / two_a,
                (pa - pc).perp() / two_a,
                (pb - pa).perp() / two_a,
            ];
            let mut k = [0.0; 9];
            let mut m = [0.0; 9];
            for i in 0..3 {
                for j in 0..3 {
                    k[3 * i + j] = area * g[i].dot(g[j]);
                    m[3 * i + j] = area / 12.0 * if i == j { 2.0 } else { 1.0 };
                }
            }
            (k, m)
        })
        .collect();

    // Row-wise accumulation with sorted, deduplicated columns.
    let mut rows_k: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut rows_m: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let (ke, me) = &elems[t];
        for i in 0..3 {
            let gi = index_of[tri[i]];
            if gi == usize::MAX {
                continue;
            }
            for j in 0..3 {
                let gj = index_of[tri[j]];
                if gj == usize::MAX {
                    continue;
                }
                rows_k[gi].push((gj, ke[3 * i + j]));
                rows_m[gi].push((gj, me[3 * i + j]));
            }
        }
    }

    let compress = |rows: Vec<Vec<(usize, f64)>>| -> Csr {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut iter = row.into_iter();
            if let Some((mut col, mut acc)) = iter.next() {
                for (c, v) in iter {
                    if c == col {
                        acc += v;
                    } else {
                        col_idx.push(col);
                        values.push(acc);
                        col = c;
                        acc = v;
                    }
                }
                col_idx.push(col);
                values.push(acc);
            }
            row_ptr.push(col_idx.len());
        }
        Csr { n, row_ptr, col_idx, values }
    };

    (compress(rows_k), compress(rows_m), interior)
}
