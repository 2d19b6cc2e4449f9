//! First Dirichlet eigenpair by shift-invert inverse iteration with a
//! Rayleigh-quotient shift once the iterate is close.

use super::ldl::{nested_dissection_order, LdlFactor};
use super::sparse::assemble;
use super::Mesh;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// First Dirichlet eigenpair on a mesh.
#[derive(Clone, Debug)]
pub struct EigenSolution {
    /// Smallest eigenvalue of -Laplace with zero boundary values (1/length²).
    pub lambda1: f64,
    /// Eigenfunction at interior nodes, mass-normalized (∫u² = 1), positive.
    pub u: Vec<f64>,
    /// Node indices of the entries of `u`.
    pub interior: Vec<usize>,
    /// ‖Ku − λMu‖₂ / ‖u‖₂.
    pub residual: f64,
    pub mesh: Mesh,
}

impl EigenSolution {
    /// Eigenfunction over all nodes, zero on the boundary.
    pub fn full_nodal(&self) -> Vec<f64> {
        let mut full = vec![0.0; self.mesh.nodes.len()];
        for (k, &node) in self.interior.iter().enumerate() {
            full[node] = self.u[k];
        }
        full
    }

    /// Value at an arbitrary interior point by locating the containing
    /// triangle (linear scan; used by diagnostics, not hot paths).
    pub fn evaluate(&self, p: Point) -> Option<f64> {
        let full = self.full_nodal();
        let mesh = &self.mesh;
        for tri in &mesh.triangles {
            let [a, b, c] = *tri;
            let (pa, pb, pc) = (mesh.nodes[a], mesh.nodes[b], mesh.nodes[c]);
            let den = (pb - pa).cross(pc - pa);
            let wa = (pb - p).cross(pc - p) / den;
            let wb = (pc - p).cross(pa - p) / den;
            let wc = 1.0 - wa - wb;
            let eps = -1e-12;
            if wa >= eps && wb >= eps && wc >= eps {
                return Some(wa * full[a] + wb * full[b] + wc * full[c]);
            }
        }
        None
    }
}

const MAX_ITERS: usize = 400;
const RESIDUAL_TOL: f64 = 1e-8;
const SHIFT_TRIGGER: f64 = 1e-4;

/// Computes the smallest generalized eigenpair of the interior
/// stiffness/mass pencil. Inverse iteration starts at shift zero from the
/// all-ones vector; once the relative residual drops under 1e-4 the operator
/// is refactored at sigma = rho (1 - 1e-3) for cubic-like convergence.
pub fn solve_lambda1(mesh: Mesh) -> Result<EigenSolution> {
    let (k_mat, m_mat, interior) = assemble(&mesh);
    let n = interior.len();
    if n == 0 {
        return Err(Error::SolverError("mesh has no interior nodes".into()));
    }
    let coords: Vec<Point> = interior.iter().map(|&i| mesh.nodes[i]).collect();
    let order = nested_dissection_order(&coords, &k_mat);

    let mut factor = LdlFactor::new(&k_mat, &order)
        .map_err(|e| Error::SolverError(format!("stiffness factorization failed: {e}")))?;
    let mut shifted_once = false;

    let mut u = vec![1.0f64; n];
    let mut mu = vec![0.0f64; n];
    let mut ku = vec![0.0f64; n];
    let mut next = vec![0.0f64; n];
    let mut rho = 0.0f64;
    let mut residual = f64::INFINITY;

    // M-normalize the start vector.
    let m_norm = m_mat.bilinear(&u, &u).sqrt();
    u.iter_mut().for_each(|v| *v /= m_norm);

    let mut converged = false;
    for _ in 0..MAX_ITERS {
        m_mat.mul(&u, &mut mu);
        factor.solve(&mu, &mut next);
        let m_norm = m_mat.bilinear(&next, &next).sqrt();
        if !(m_norm > 0.0) || !m_norm.is_finite() {
            return Err(Error::SolverError("inverse iteration produced a null vector".into()));
        }
        next.iter_mut().for_each(|v| *v /= m_norm);
        std::mem::swap(&mut u, &mut next);

        k_mat.mul(&u, &mut ku);
        m_mat.mul(&u, &mut mu);
        rho = u.iter().zip(&ku).map(|(a, b)| a * b).sum::<f64>();
        let u_norm2: f64 = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut res2 = 0.0;
        for i in 0..n {
            let r = ku[i] - rho * mu[i];
            res2 += r * r;
        }
        residual = res2.sqrt() / u_norm2;
        if residual < RESIDUAL_TOL {
            converged = true;
            break;
        }
        if !shifted_once && residual < SHIFT_TRIGGER {
            // Rayleigh acceleration: one refactor just below the eigenvalue.
            let sigma = rho * (1.0 - 1e-3);
            let shifted = k_mat.shifted(&m_mat, -sigma);
            factor = LdlFactor::new(&shifted, &order)
                .map_err(|e| Error::SolverError(format!("shifted factorization failed: {e}")))?;
            shifted_once = true;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(format!(
            "residual {residual:.3e} after {MAX_ITERS} inverse iterations"
        )));
    }

    // rho is the Rayleigh quotient of u under the M-normalization u' M u = 1.
    let lambda1 = rho;
    if !(lambda1 > 0.0) {
        return Err(Error::SolverError(format!("nonpositive eigenvalue {lambda1}")));
    }

    // Sign: positive at the interior node nearest the barycenter.
    let bary = mesh.polygon.area_centroid();
    let nearest = coords
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.dist(bary).total_cmp(&b.dist(bary)))
        .map(|(i, _)| i)
        .expect("at least one interior node");
    if u[nearest] < 0.0 {
        u.iter_mut().for_each(|v| *v = -*v);
    }

    Ok(EigenSolution { lambda1, u, interior, residual, mesh })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::triangulate;
    use crate::geometry::Polygon;
    use std::f64::consts::PI;

    #[test]
    fn square_eigenvalue_converges_from_above() {
        let square = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        let exact = 2.0 * PI * PI;
        let mut previous = f64::INFINITY;
        for level in 2..5 {
            let sol = solve_lambda1(triangulate(&square, level).unwrap()).unwrap();
            assert!(sol.lambda1 > exact, "conforming FEM bounds from above");
            assert!(sol.lambda1 < previous, "monotone in refinement");
            assert!(sol.residual < 1e-8);
            previous = sol.lambda1;
        }
        assert!((previous - exact) / exact < 0.01);
    }

    #[test]
    fn eigenfunction_is_positive_and_normalized() {
        let tri = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.3, 0.8),
        ])
        .unwrap();
        let sol = solve_lambda1(triangulate(&tri, 4).unwrap()).unwrap();
        // Obtuse fan elements near the sharp corner break the discrete
        // maximum principle, so P1 admits a tiny negative dip there; the
        // bulk of the eigenfunction must still be positive.
        let max = sol.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = sol.u.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max > 0.0);
        assert!(min > -1e-3 * max, "negative dip {min} too deep vs peak {max}");
        let bary = sol.mesh.polygon.area_centroid();
        let nearest = sol
            .interior
            .iter()
            .enumerate()
            .min_by(|(_, &a), (_, &b)| {
                sol.mesh.nodes[a].dist(bary).total_cmp(&sol.mesh.nodes[b].dist(bary))
            })
            .map(|(i, _)| i)
            .unwrap();
        assert!(sol.u[nearest] > 0.0, "sign convention pins the centroid positive");
        let (_, m, _) = assemble(&sol.mesh);
        let norm = m.bilinear(&sol.u, &sol.u);
        assert!((norm - 1.0).abs() < 1e-10);
    }
}
