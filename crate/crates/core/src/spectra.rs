//! Closed-form eigenvalues and the eigenvalue series reconstruction that
//! ties the symmetrization flow, the finite element solver, and the
//! derivative formulas together.

use crate::error::{Error, Result};
use crate::fem::{
    boundary_gradient_trace, solve_lambda1, triangulate_with, TraceSide, TriangulateOptions,
};
use crate::geometry::Polygon;
use crate::shape_derivatives::{d2lambda_dt2, dlambda_dt};
use crate::symmetrize::{run_flow, SymmetrizationFrame};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// First Dirichlet eigenvalue of the unit disk: the squared first zero of
/// the Bessel function J0.
pub const UNIT_DISK_LAMBDA: f64 = 5.783185962946785;

/// First Dirichlet eigenvalue of an axis-aligned rectangle.
pub fn rectangle_lambda(width: f64, height: f64) -> f64 {
    PI * PI * (1.0 / (width * width) + 1.0 / (height * height))
}

/// First Dirichlet eigenvalue of the equilateral triangle with the given area.
pub fn equilateral_triangle_lambda(area: f64) -> f64 {
    4.0 * PI * PI / (area * 3f64.sqrt())
}

/// Eigenvalue of a polygon rebuilt from its symmetrization flow: the limit
/// eigenvalue plus a first-order and a curvature term per step, each taken
/// from the closed-form derivatives on that step's window.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesReconstruction {
    /// FEM eigenvalue of the flow's final polygon.
    pub lambda_limit: f64,
    /// First-derivative coefficient of each reconstructed step.
    pub alpha_terms: Vec<f64>,
    /// Curvature coefficient of each step, evaluated midway between the
    /// symmetric position and the step offset.
    pub beta_terms: Vec<f64>,
    /// Offset of each reconstructed step.
    pub t_sequence: Vec<f64>,
    /// Running reconstruction after each term.
    pub partial_sums: Vec<f64>,
    /// FEM eigenvalue of the input polygon.
    pub direct_lambda: f64,
    /// |partial sum − direct| / direct after each term.
    pub rel_gaps: Vec<f64>,
    /// Sum of squared offsets of the flow steps beyond the truncation.
    pub tail_t2: f64,
}

impl SeriesReconstruction {
    /// Reconstructed eigenvalue at the full truncation.
    pub fn lambda_reconstructed(&self) -> f64 {
        self.partial_sums
            .last()
            .copied()
            .unwrap_or(self.lambda_limit)
    }

    /// Relative gap to the direct eigenvalue at the full truncation.
    pub fn rel_gap(&self) -> f64 {
        (self.lambda_reconstructed() - self.direct_lambda).abs() / self.direct_lambda
    }
}

/// Reconstructs the eigenvalue of `poly` from at most `terms` steps of its
/// symmetrization flow at the given refinement level. Each step contributes
/// alpha * t + beta * t^2 / 2 on top of the limit polygon's eigenvalue; the
/// per-step solves run in parallel and combine in step order.
pub fn reconstruct_series(
    poly: &Polygon,
    terms: usize,
    refine: usize,
) -> Result<SeriesReconstruction> {
    let trace = run_flow(poly, 2000, 1e-8)?;
    if !trace.converged {
        return Err(Error::NoConvergence(
            "symmetrization flow did not reach its tolerance".into(),
        ));
    }
    let opts = TriangulateOptions {
        grade_vertices: true,
    };
    let steps = trace.offsets.len().min(terms);
    let direct = solve_lambda1(triangulate_with(&trace.polygons[0], refine, opts)?)?.lambda1;
    let last = trace.polygons.last().expect("trace never empty");
    let lambda_limit = solve_lambda1(triangulate_with(last, refine, opts)?)?.lambda1;

    let per_step: Vec<(f64, f64, f64)> = (0..steps)
        .into_par_iter()
        .map(|j| {
            let source = &trace.polygons[j];
            let frame = SymmetrizationFrame::from_polygon(source, trace.window_indices[j])?;
            let t = frame.t_star;
            let symmetric = frame.offset_polygon(source, 0.0)?;
            let sol0 = solve_lambda1(triangulate_with(&symmetric, refine, opts)?)?;
            let alpha = dlambda_dt(&sol0, &frame)?;
            let beta = if t > 0.0 {
                let halfway = frame.offset_polygon(source, 0.5 * t)?;
                let solh = solve_lambda1(triangulate_with(&halfway, refine, opts)?)?;
                d2lambda_dt2(&solh, &frame, 0.5 * t)?
            } else {
                d2lambda_dt2(&sol0, &frame, 0.0)?
            };
            Ok((alpha, beta, t))
        })
        .collect::<Result<_>>()?;

    let mut alpha_terms = Vec::with_capacity(steps);
    let mut beta_terms = Vec::with_capacity(steps);
    let mut t_sequence = Vec::with_capacity(steps);
    let mut partial_sums = Vec::with_capacity(steps);
    let mut rel_gaps = Vec::with_capacity(steps);
    let mut sum = lambda_limit;
    for (alpha, beta, t) in per_step {
        sum += alpha * t + 0.5 * beta * t * t;
        alpha_terms.push(alpha);
        beta_terms.push(beta);
        t_sequence.push(t);
        partial_sums.push(sum);
        rel_gaps.push((sum - direct).abs() / direct);
    }
    let tail_t2 = trace.offsets[steps..].iter().map(|t| t * t).sum();

    Ok(SeriesReconstruction {
        lambda_limit,
        alpha_terms,
        beta_terms,
        t_sequence,
        partial_sums,
        direct_lambda: direct,
        rel_gaps,
        tail_t2,
    })
}

/// Apex offset and closed-form quadratic gap coefficient of a triangle
/// relative to its symmetrized isosceles triangle.
///
/// The window sits on the longest side: the opposite vertex moves parallel
/// to it. The offset is the distance of that vertex from the side's
/// perpendicular bisector, computed from the projection of the shorter
/// adjacent side; the coefficient weights the alpha-weighted squared
/// gradient trace of the isosceles eigenfunction.
pub fn isosceles_gap_coefficient(tri: &Polygon, refine: usize) -> Result<(f64, f64)> {
    if tri.len() != 3 {
        return Err(Error::Unsupported(format!(
            "isosceles gap coefficient needs a triangle, got {} vertices",
            tri.len()
        )));
    }
    // Longest edge, first index on ties; edge e runs vertex e -> e+1.
    let edge_len = |e: usize| tri.vertex(e + 1).dist(tri.vertex(e));
    let mut longest = 0usize;
    for e in 1..3 {
        if edge_len(e) > edge_len(longest) {
            longest = e;
        }
    }
    let b = edge_len(longest);
    let moved = tri.vertex(longest + 2);
    // The chord endpoint nearer the moved vertex anchors the projection.
    let (near, far) = {
        let p = tri.vertex(longest);
        let q = tri.vertex(longest + 1);
        if moved.dist(p) <= moved.dist(q) {
            (p, q)
        } else {
            (q, p)
        }
    };
    let t = 0.5 * b - (moved - near).dot(far - near) / b;

    let window = (longest + 1) % 3;
    let frame = SymmetrizationFrame::from_polygon(tri, window)?;
    let iso = frame.offset_polygon(tri, 0.0)?;
    let opts = TriangulateOptions {
        grade_vertices: true,
    };
    let sol = solve_lambda1(triangulate_with(&iso, refine, opts)?)?;
    let upper = boundary_gradient_trace(&sol, &frame, TraceSide::Upper)?;

    let rho = tri.area();
    let xi = 2.0 * rho / b;
    let denom = 0.25 * b * b + xi * xi;
    let alpha_1 = b * b / (rho * denom) * upper.alpha_square_integral();
    Ok((t, alpha_1))
}
