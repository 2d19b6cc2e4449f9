//! Closed-form first and second eigenvalue derivatives along the
//! symmetrization flow and along the shear family joining a rhombus to a
//! rectangle, with finite-difference validation harnesses.
//!
//! The moved vertex of a window travels along the chord direction; the
//! induced boundary velocity is linear on each window leg, vanishes at the
//! chord endpoints, and its normal component C integrates the squared
//! gradient trace into the Hadamard derivative. Both legs are parametrized
//! by the height alpha over the chord, so C dS = (alpha/xi) d alpha and the
//! quadrature reduces to the weighted trace integrals.

use crate::error::{Error, Result};
use crate::fem::{
    boundary_gradient_trace, edge_gradient_trace, solve_lambda1, triangulate_with, EigenSolution,
    TraceSide, TriangulateOptions,
};
use crate::geometry::{Point, Polygon};
use crate::symmetrize::SymmetrizationFrame;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Derivatives of the first eigenvalue at one flow position, optionally
/// paired with finite-difference counterparts from the validation harness.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DerivativeReport {
    /// First derivative of lambda in the offset parameter (1/length³).
    pub dlambda_dt: f64,
    /// Second derivative of lambda in the offset parameter (1/length⁴).
    pub d2lambda_dt2: f64,
    /// Offset parameter the derivatives are evaluated at.
    pub t_eval: f64,
    /// Central finite difference for the first derivative, if requested.
    pub fd_dlambda: Option<f64>,
    /// Central finite difference for the second derivative, if requested.
    pub fd_d2lambda: Option<f64>,
    /// |dlambda_dt − fd| / max(|fd|, 0.1 lambda / diam).
    pub rel_err_1: Option<f64>,
    /// |d2lambda_dt2 − fd| / max(|fd|, 0.1 lambda / diam²).
    pub rel_err_2: Option<f64>,
}

/// First derivative of the eigenvalue in the window offset, evaluated at the
/// solution's own polygon: the difference of the (alpha/xi)-weighted squared
/// gradient trace integrals of the two window legs. Positive means moving
/// the vertex further from the symmetric position raises the eigenvalue.
pub fn dlambda_dt(sol: &EigenSolution, frame: &SymmetrizationFrame) -> Result<f64> {
    let upper = boundary_gradient_trace(sol, frame, TraceSide::Upper)?;
    let lower = boundary_gradient_trace(sol, frame, TraceSide::Lower)?;
    Ok(lower.weighted_square_integral() - upper.weighted_square_integral())
}

/// Closed-form curvature term at offset `t`: a positive combination of the
/// alpha-weighted squared gradient integrals of the legs. The prefactors use
/// the caller's `t`; the traces come from `sol` as given, which supports
/// mean-value evaluations between 0 and the step offset. Central differences
/// of the eigenvalue measure roughly half this value on near-symmetric
/// windows; `DerivativeReport` exposes both so the gap stays visible.
pub fn d2lambda_dt2(sol: &EigenSolution, frame: &SymmetrizationFrame, t: f64) -> Result<f64> {
    let half_b = 0.5 * frame.b;
    if !(0.0..half_b).contains(&t) {
        return Err(Error::DomainError(format!(
            "second derivative needs 0 <= t < b/2 = {half_b}, got {t}"
        )));
    }
    let upper = boundary_gradient_trace(sol, frame, TraceSide::Upper)?;
    let lower = boundary_gradient_trace(sol, frame, TraceSide::Lower)?;
    let xi = frame.xi;
    let c_upper = 2.0 * (half_b - t) / (xi * (xi * xi + (t - half_b) * (t - half_b)));
    let c_lower = 2.0 * (half_b + t) / (xi * (xi * xi + (t + half_b) * (t + half_b)));
    Ok(c_upper * upper.alpha_square_integral() + c_lower * lower.alpha_square_integral())
}

/// Normal boundary velocity C at height `alpha` on a window leg when the
/// moved vertex sits at offset `t`: the domain expands on the upper leg and
/// shrinks on the lower leg as t increases.
pub fn velocity_field(frame: &SymmetrizationFrame, side: TraceSide, alpha: f64, t: f64) -> f64 {
    debug_assert!((0.0..=frame.xi).contains(&alpha), "alpha outside [0, xi]");
    let half_b = 0.5 * frame.b;
    let xi = frame.xi;
    match side {
        TraceSide::Upper => alpha / (xi * xi + (half_b - t) * (half_b - t)).sqrt(),
        TraceSide::Lower => -alpha / (xi * xi + (half_b + t) * (half_b + t)).sqrt(),
    }
}

/// Full derivative report for the window at `window` of `poly`, evaluated at
/// the polygon's own offset from the symmetric position. Meshes are graded
/// at the polygon vertices; with `fd_check` the finite-difference solves run
/// in parallel on offset copies sharing the mesh combinatorics.
pub fn derivative_report(
    poly: &Polygon,
    window: usize,
    refine: usize,
    fd_check: bool,
) -> Result<DerivativeReport> {
    let frame = SymmetrizationFrame::from_polygon(poly, window)?;
    let t_eval = frame.t_star;
    let opts = TriangulateOptions { grade_vertices: true };
    let sol = solve_lambda1(triangulate_with(poly, refine, opts)?)?;
    let dlambda = dlambda_dt(&sol, &frame)?;
    let d2lambda = d2lambda_dt2(&sol, &frame, t_eval)?;

    let mut report = DerivativeReport {
        dlambda_dt: dlambda,
        d2lambda_dt2: d2lambda,
        t_eval,
        fd_dlambda: None,
        fd_d2lambda: None,
        rel_err_1: None,
        rel_err_2: None,
    };
    if fd_check {
        let diam = poly.diameter();
        let h1 = 1e-3 * diam;
        let h2 = 5e-3 * diam;
        let offsets = [t_eval + h1, t_eval - h1, t_eval + h2, t_eval - h2];
        let lambdas = offsets
            .par_iter()
            .map(|&t| {
                let shifted = frame.offset_polygon(poly, t)?;
                Ok(solve_lambda1(triangulate_with(&shifted, refine, opts)?)?.lambda1)
            })
            .collect::<Result<Vec<f64>>>()?;
        let fd1 = (lambdas[0] - lambdas[1]) / (2.0 * h1);
        let fd2 = (lambdas[2] - 2.0 * sol.lambda1 + lambdas[3]) / (h2 * h2);
        report.fd_dlambda = Some(fd1);
        report.fd_d2lambda = Some(fd2);
        report.rel_err_1 =
            Some((dlambda - fd1).abs() / fd1.abs().max(0.1 * sol.lambda1 / diam));
        report.rel_err_2 =
            Some((d2lambda - fd2).abs() / fd2.abs().max(0.1 * sol.lambda1 / (diam * diam)));
    }
    Ok(report)
}

/// Shear family joining a rectangle to a rhombus: the quadrilateral with
/// vertices (0,0), (xi,−shear), (xi, half_b−shear), (0, half_b). Vertical
/// slices all have length half_b; sliding the right side down by `shear`
/// tilts their centers linearly, and recentering them (one Steiner
/// symmetrization) recovers the xi × half_b rectangle at shear = 0.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ShearFrame {
    /// Horizontal extent.
    pub xi: f64,
    /// Length of the two vertical sides.
    pub half_b: f64,
    /// Vertical drop of the right side.
    pub shear: f64,
}

impl ShearFrame {
    pub fn new(xi: f64, half_b: f64, shear: f64) -> Result<ShearFrame> {
        if !(xi > 0.0) || !(half_b > 0.0) || !shear.is_finite() {
            return Err(Error::DomainError(format!(
                "shear frame needs xi, half_b > 0 and finite shear, got {xi}, {half_b}, {shear}"
            )));
        }
        Ok(ShearFrame { xi, half_b, shear })
    }

    /// The sheared quadrilateral in the frame's coordinates.
    pub fn polygon(&self) -> Result<Polygon> {
        Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(self.xi, -self.shear),
            Point::new(self.xi, self.half_b - self.shear),
            Point::new(0.0, self.half_b),
        ])
    }

    /// Shear that makes all four sides equal, if the proportions admit one:
    /// the slanted sides have length sqrt(xi² + shear²).
    pub fn rhombus_shear(&self) -> Option<f64> {
        let gap = self.half_b * self.half_b - self.xi * self.xi;
        (gap >= 0.0).then(|| gap.sqrt())
    }

    /// Recovers the frame from a quadrilateral laid out in its coordinates.
    pub fn from_polygon(poly: &Polygon) -> Result<ShearFrame> {
        if poly.len() != 4 {
            return Err(Error::FrameMismatch(format!(
                "shear frame needs a quadrilateral, got {} vertices",
                poly.len()
            )));
        }
        let tol = 1e-9 * poly.diameter();
        let k0 = (0..4)
            .find(|&k| poly.vertex(k).norm() <= tol)
            .ok_or_else(|| Error::FrameMismatch("no vertex at the origin".into()))?;
        let right_low = poly.vertex(k0 + 1);
        let right_high = poly.vertex(k0 + 2);
        let left_high = poly.vertex(k0 + 3);
        let xi = right_low.x;
        let shear = -right_low.y;
        let half_b = left_high.y;
        let frame = ShearFrame::new(xi, half_b, shear)
            .map_err(|e| Error::FrameMismatch(format!("degenerate shear layout: {e}")))?;
        let expect = [
            Point::new(xi, half_b - shear),
            Point::new(0.0, half_b),
        ];
        if right_high.dist(expect[0]) > tol || left_high.dist(expect[1]) > tol || left_high.x.abs() > tol {
            return Err(Error::FrameMismatch(
                "vertices do not lie in the shear layout".into(),
            ));
        }
        Ok(frame)
    }
}

/// Eigenvalue derivatives along the shear family, from the gradient traces
/// on the tilted top and bottom sides. Both closed forms vanish at the
/// rectangle; measured eigenvalue gaps along the family stay quadratic in
/// the shear, so the closed forms carry the transport terms only.
pub fn rhombus_rectangle_derivatives(
    sol: &EigenSolution,
    frame: &ShearFrame,
) -> Result<DerivativeReport> {
    let poly = &sol.mesh.polygon;
    let reference = frame.polygon()?;
    if poly.len() != 4 {
        return Err(Error::FrameMismatch(format!(
            "shear derivatives need a quadrilateral, got {} vertices",
            poly.len()
        )));
    }
    let tol = 1e-9 * reference.diameter();
    let k0 = (0..4)
        .find(|&k| {
            (0..4).all(|j| poly.vertex(k + j).dist(reference.vertex(j)) <= tol)
        })
        .ok_or_else(|| {
            Error::FrameMismatch("solution polygon does not match the shear frame".into())
        })?;

    let leg = (frame.xi * frame.xi + frame.shear * frame.shear).sqrt();
    let scale = frame.xi / leg;
    // Bottom side runs left to right, top side right to left.
    let bottom = edge_gradient_trace(sol, k0)?;
    let top = edge_gradient_trace(sol, (k0 + 2) % 4)?;
    let a_minus: f64 = bottom
        .arclengths
        .iter()
        .zip(&bottom.values)
        .zip(&bottom.weights)
        .map(|((s, g), w)| (s * scale) * g * g * (w * scale))
        .sum();
    let a_plus: f64 = top
        .arclengths
        .iter()
        .zip(&top.values)
        .zip(&top.weights)
        .map(|((s, g), w)| (frame.xi - s * scale) * g * g * (w * scale))
        .sum();

    let t = frame.shear;
    let xi = frame.xi;
    let diff = a_plus - a_minus;
    Ok(DerivativeReport {
        dlambda_dt: diff / xi,
        d2lambda_dt2: 2.0 * t / (xi * (xi * xi + t * t)) * diff,
        t_eval: t,
        fd_dlambda: None,
        fd_d2lambda: None,
        rel_err_1: None,
        rel_err_2: None,
    })
}
