//! Partial Steiner symmetrization of polygons: the single-vertex step, the
//! cyclic flow toward equilateral polygons, offset-decay rate membership, and
//! the squared-side contraction map for triangles.

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon};
use serde::{Deserialize, Serialize};

/// Geometry of one symmetrization window: three consecutive vertices
/// (v1, v2, v3) of which v2 moves onto the perpendicular bisector of the
/// chord v1 v3.
///
/// Labels are ordered so the signed offset `t_star` is nonnegative (the
/// eigenvalue problem is reflection invariant, so this loses nothing).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymmetrizationFrame {
    /// Index of the leading vertex in the source polygon; the moved vertex is i+1.
    pub i: usize,
    pub v1: Point,
    pub v2: Point,
    pub v3: Point,
    /// Midpoint of the chord v1 v3.
    pub m: Point,
    /// Unit normal of the chord, pointing toward v2's side.
    pub axis: Point,
    /// Distance from the symmetrized vertex v2* = m + xi * axis to the chord.
    pub xi: f64,
    /// Chord length |v1 - v3|.
    pub b: f64,
    /// Offset of v2 from the axis along the chord direction; >= 0 by label choice.
    pub t_star: f64,
}

impl SymmetrizationFrame {
    /// Builds the window over vertices (i, i+1, i+2) of `poly`.
    pub fn from_polygon(poly: &Polygon, i: usize) -> Result<Self> {
        let v1 = poly.vertex(i);
        let v2 = poly.vertex(i + 1);
        let v3 = poly.vertex(i + 2);
        let chord = v3 - v1;
        let b = chord.norm();
        let diam = poly.diameter();
        if chord.cross(v2 - v1).abs() <= 1e-14 * diam * diam {
            return Err(Error::DegenerateTriangle(format!(
                "window ({i}, {}, {}) is collinear",
                i + 1,
                i + 2
            )));
        }
        let m = (v1 + v3) * 0.5;
        let normal = chord.perp() / b;
        let height = (v2 - m).dot(normal);
        let axis = if height >= 0.0 { normal } else { -normal };
        let xi = height.abs();
        let dir = (v1 - v3) / b;
        let t_signed = (v2 - m).dot(dir);
        let (v1, v3, t_star) = if t_signed < 0.0 { (v3, v1, -t_signed) } else { (v1, v3, t_signed) };
        Ok(SymmetrizationFrame { i, v1, v2, v3, m, axis, xi, b, t_star })
    }

    /// Unit vector along the chord from v3 toward v1; v2 = v2* + t_star * dir.
    pub fn chord_dir(&self) -> Point {
        (self.v1 - self.v3) / self.b
    }

    /// The symmetrized vertex position on the axis.
    pub fn symmetrized_vertex(&self) -> Point {
        self.m + self.axis * self.xi
    }

    /// Index of the vertex the step moves.
    pub fn moved_vertex(&self) -> usize {
        self.i + 1
    }

    /// Polygon with the window vertex placed at offset `t` along the chord
    /// direction: vertex i+1 of `poly` becomes m + xi * axis + t * dir.
    /// `t = 0` gives the symmetrized polygon, `t = t_star` restores v2.
    pub fn offset_polygon(&self, poly: &Polygon, t: f64) -> Result<Polygon> {
        let target = self.symmetrized_vertex() + self.chord_dir() * t;
        poly.with_vertex_replaced(self.i + 1, target)
    }

    /// Perimeter excess of the window at offset `t` over the symmetric
    /// position: phi(t) = sqrt((b/2 - t)^2 + xi^2) + sqrt((b/2 + t)^2 + xi^2)
    /// - 2 sqrt((b/2)^2 + xi^2). The perimeter drop of a step is phi(t_star).
    pub fn phi(&self, t: f64) -> f64 {
        let half = 0.5 * self.b;
        ((half - t).powi(2) + self.xi * self.xi).sqrt()
            + ((half + t).powi(2) + self.xi * self.xi).sqrt()
            - 2.0 * (half * half + self.xi * self.xi).sqrt()
    }
}

/// One partial Steiner symmetrization: vertex i+1 moves onto the
/// perpendicular bisector of the chord (v_i, v_{i+2}), preserving area.
///
/// Fails with `StepRejected` when the moved vertex would break simplicity,
/// or convexity of a convex input; `DegenerateTriangle` on collinear windows.
pub fn symmetrize_step(poly: &Polygon, i: usize) -> Result<(Polygon, SymmetrizationFrame)> {
    let frame = SymmetrizationFrame::from_polygon(poly, i)?;
    let out = frame.offset_polygon(poly, 0.0).map_err(|e| {
        Error::StepRejected(format!("window {i}: symmetrized polygon invalid: {e}"))
    })?;
    if poly.is_convex() && !out.is_convex() {
        return Err(Error::StepRejected(format!(
            "window {i}: convex input would turn non-convex"
        )));
    }
    Ok((out, frame))
}

/// Relative side-length spread: max_i |l_i - mean| / mean. Zero exactly on
/// equilateral polygons; the flow stops below `tol`.
pub fn max_side_deviation(poly: &Polygon) -> f64 {
    let sides = poly.side_lengths();
    let mean = sides.iter().sum::<f64>() / sides.len() as f64;
    sides.iter().map(|l| (l - mean).abs()).fold(0.0, f64::max) / mean
}

/// Window selection order for the flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// Advance the leading vertex by one each iteration (the default).
    Cyclic,
    /// Pick the window with the largest offset each iteration.
    LargestOffsetFirst,
}

/// Record of a symmetrization flow P^1, P^2, ... with per-step offsets.
#[derive(Clone, Debug)]
pub struct FlowTrace {
    /// P^1 (the input) through the final polygon; grows only on accepted steps.
    pub polygons: Vec<Polygon>,
    /// Offset t_k of the step taking polygons[k-1] to polygons[k] (1-based in
    /// the math; offsets[j] is the offset of step j+1).
    pub offsets: Vec<f64>,
    /// Leading-vertex index used by each accepted step.
    pub window_indices: Vec<usize>,
    /// Perimeter of each polygon in the trace.
    pub perimeters: Vec<f64>,
    /// Area of each polygon in the trace.
    pub areas: Vec<f64>,
    /// True when the side-deviation tolerance was reached within the budget.
    pub converged: bool,
    /// Iterations attempted before the stop criterion held (0 when the input
    /// is already equilateral); `None` when the budget ran out.
    pub iterations_to_converge: Option<usize>,
}

impl FlowTrace {
    /// Side spread of each polygon along the trace.
    pub fn side_deviations(&self) -> Vec<f64> {
        self.polygons.iter().map(max_side_deviation).collect()
    }
}

/// Runs the symmetrization flow with the default cyclic schedule.
pub fn run_flow(poly: &Polygon, max_iter: usize, tol: f64) -> Result<FlowTrace> {
    run_flow_scheduled(poly, max_iter, tol, Schedule::Cyclic)
}

/// Runs the symmetrization flow until the sides agree within `tol`
/// relatively, or `max_iter` window attempts are spent. Rejected steps
/// (see [`symmetrize_step`]) are skipped and the window advances; a full
/// cycle of consecutive rejections aborts with `StepRejected`.
pub fn run_flow_scheduled(
    poly: &Polygon,
    max_iter: usize,
    tol: f64,
    schedule: Schedule,
) -> Result<FlowTrace> {
    let mut polygons = vec![poly.clone()];
    let mut offsets = Vec::new();
    let mut window_indices = Vec::new();
    let mut converged = false;
    let mut iterations_to_converge = None;
    let mut window = 0usize;
    let mut rejected_in_row = 0usize;

    for iter in 0..=max_iter {
        let current = polygons.last().expect("trace never empty");
        if max_side_deviation(current) < tol {
            converged = true;
            iterations_to_converge = Some(iter);
            break;
        }
        if iter == max_iter {
            break;
        }
        let i = match schedule {
            Schedule::Cyclic => window,
            Schedule::LargestOffsetFirst => largest_offset_window(current)?,
        };
        match symmetrize_step(current, i) {
            Ok((next, frame)) => {
                offsets.push(frame.t_star);
                window_indices.push(i);
                polygons.push(next);
                rejected_in_row = 0;
            }
            Err(Error::StepRejected(_)) | Err(Error::DegenerateTriangle(_)) => {
                rejected_in_row += 1;
                if rejected_in_row >= current.len() {
                    return Err(Error::StepRejected(format!(
                        "every window rejected at iteration {iter}"
                    )));
                }
            }
            Err(e) => return Err(e),
        }
        window = (window + 1) % polygons.last().expect("trace never empty").len();
    }

    let perimeters = polygons.iter().map(Polygon::perimeter).collect();
    let areas = polygons.iter().map(Polygon::area).collect();
    Ok(FlowTrace {
        polygons,
        offsets,
        window_indices,
        perimeters,
        areas,
        converged,
        iterations_to_converge,
    })
}

fn largest_offset_window(poly: &Polygon) -> Result<usize> {
    let mut best = (0usize, -1.0f64);
    for i in 0..poly.len() {
        if let Ok(frame) = SymmetrizationFrame::from_polygon(poly, i) {
            if frame.t_star > best.1 {
                best = (i, frame.t_star);
            }
        }
    }
    if best.1 < 0.0 {
        return Err(Error::DegenerateTriangle("no admissible window".into()));
    }
    Ok(best.0)
}

/// Offset-decay verdict for one step of a flow.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateMembership {
    /// Step index k (matching offset t_{k-1} = `FlowTrace::offsets[k-2]`).
    pub k: usize,
    /// Sum of squared offsets from step k on, plus the tail bound.
    pub lhs: f64,
    /// `alpha_rate * t_{k-1}^2`.
    pub rhs: f64,
    pub member: bool,
}

/// Rate-set membership report over a whole trace.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateReport {
    pub alpha_rate: f64,
    /// Upper bound on the squared offsets beyond the trace end, from
    /// perimeter telescoping; included in every `lhs`.
    pub tail_bound: f64,
    pub memberships: Vec<RateMembership>,
}

/// Checks, for every step k with positive offset, whether the subsequent
/// offsets satisfy the decay budget `sum_{j >= k} t_j^2 <= alpha_rate *
/// t_{k-1}^2`.
///
/// The trace is finite, so the sum is truncated; the remainder is bounded by
/// perimeter telescoping: each future step removes at least `c_min * t^2`
/// perimeter, where `c_min` is the worst observed per-step drop ratio, and
/// the total future drop is at most the gap to the regular polygon's
/// perimeter (the minimum for the area).
pub fn rate_membership(trace: &FlowTrace, alpha_rate: f64) -> RateReport {
    let offsets = &trace.offsets;
    let diam = trace.polygons[0].diameter();
    let floor = 1e-9 * diam;

    let mut c_min = f64::INFINITY;
    for (j, &t) in offsets.iter().enumerate() {
        if t > floor {
            let drop = trace.perimeters[j] - trace.perimeters[j + 1];
            c_min = c_min.min(drop / (t * t));
        }
    }
    let last = trace.polygons.last().expect("trace never empty");
    let regular_perimeter = Polygon::regular_with_area(last.len(), last.area())
        .map(|p| p.perimeter())
        .unwrap_or(0.0);
    let excess = (trace.perimeters.last().unwrap() - regular_perimeter).max(0.0);
    let tail_bound = if c_min.is_finite() && c_min > 0.0 {
        excess / c_min
    } else if excess <= 1e-12 * regular_perimeter {
        0.0
    } else {
        f64::INFINITY
    };

    // Suffix sums of squared offsets: suffix[j] = sum_{l >= j} offsets[l]^2.
    let mut suffix = vec![0.0; offsets.len() + 1];
    for j in (0..offsets.len()).rev() {
        suffix[j] = suffix[j + 1] + offsets[j] * offsets[j];
    }

    let mut memberships = Vec::new();
    for k in 2..=offsets.len() + 1 {
        let t_prev = offsets[k - 2];
        if t_prev <= floor {
            continue;
        }
        let lhs = suffix[k - 1] + tail_bound;
        let rhs = alpha_rate * t_prev * t_prev;
        memberships.push(RateMembership { k, lhs, rhs, member: lhs <= rhs });
    }
    RateReport { alpha_rate, tail_bound, memberships }
}

/// Contraction map of squared triangle side lengths under the flow:
/// phi(s) = s/4 + 4 A^2 / s for a triangle of area A. Its fixed point is the
/// squared side of the equilateral triangle, 4 A / sqrt(3), where the
/// derivative is exactly -1/2.
pub fn triangle_side_map(s: f64, area: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::DomainError(format!("squared side must be positive, got {s}")));
    }
    if !(area > 0.0) {
        return Err(Error::DomainError(format!("area must be positive, got {area}")));
    }
    Ok(0.25 * s + 4.0 * area * area / s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equilateral() -> Polygon {
        Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 3f64.sqrt() / 2.0),
        ])
        .unwrap()
    }

    #[test]
    fn axis_aligned_frame() {
        // v1 = (0, 1), v3 = (0, -1), v2 = (h, t): xi = h, b = 2, t* = t.
        let (h, t) = (0.8, 0.3);
        let p = Polygon::new(vec![
            Point::new(0.0, 1.0),
            Point::new(h, t),
            Point::new(0.0, -1.0),
        ])
        .unwrap();
        let idx = p.vertices().iter().position(|v| (v.x - h).abs() < 1e-12).unwrap();
        let i = (idx + p.len() - 1) % p.len();
        let frame = SymmetrizationFrame::from_polygon(&p, i).unwrap();
        assert!((frame.xi - h).abs() < 1e-14);
        assert!((frame.b - 2.0).abs() < 1e-14);
        assert!((frame.t_star - t).abs() < 1e-14);
        let v2s = frame.symmetrized_vertex();
        assert!((v2s.x - h).abs() < 1e-14 && v2s.y.abs() < 1e-14);
    }

    #[test]
    fn negative_offset_swaps_labels() {
        let (h, t) = (0.8, -0.3);
        let p = Polygon::new(vec![
            Point::new(0.0, 1.0),
            Point::new(h, t),
            Point::new(0.0, -1.0),
        ])
        .unwrap();
        let idx = p.vertices().iter().position(|v| (v.x - h).abs() < 1e-12).unwrap();
        let i = (idx + p.len() - 1) % p.len();
        let frame = SymmetrizationFrame::from_polygon(&p, i).unwrap();
        assert!((frame.t_star - 0.3).abs() < 1e-14, "t* = {}", frame.t_star);
        // v2 must sit at v2* + t* * dir regardless of the swap.
        let rebuilt = frame.symmetrized_vertex() + frame.chord_dir() * frame.t_star;
        assert!(rebuilt.dist(frame.v2) < 1e-14);
    }

    #[test]
    fn equilateral_window_is_fixed() {
        let p = equilateral();
        for i in 0..3 {
            let (out, frame) = symmetrize_step(&p, i).unwrap();
            assert!(frame.t_star < 1e-14);
            for (a, b) in out.vertices().iter().zip(p.vertices()) {
                assert!(a.dist(*b) < 1e-12);
            }
        }
    }

    #[test]
    fn step_preserves_area_and_drops_phi_perimeter() {
        let p = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, -0.2),
            Point::new(2.5, 1.4),
            Point::new(0.7, 2.2),
            Point::new(-0.8, 1.0),
        ])
        .unwrap();
        for i in 0..p.len() {
            let (out, frame) = symmetrize_step(&p, i).unwrap();
            assert!((out.area() - p.area()).abs() <= 1e-12 * p.area());
            let drop = p.perimeter() - out.perimeter();
            assert!(
                (drop - frame.phi(frame.t_star)).abs() <= 1e-12 * p.perimeter(),
                "window {i}: drop {drop} vs phi {}",
                frame.phi(frame.t_star)
            );
            assert!(drop >= -1e-12);
        }
    }

    #[test]
    fn offset_polygon_restores_input() {
        let p = Polygon::new(vec![
            Point::new(0.0, 3.0),
            Point::new(0.0, 0.0),
            Point::new(4.0, 0.0),
        ])
        .unwrap();
        let (sym, frame) = symmetrize_step(&p, 0).unwrap();
        let back = frame.offset_polygon(&sym, frame.t_star).unwrap();
        for (a, b) in back.vertices().iter().zip(p.vertices()) {
            assert!(a.dist(*b) < 1e-12);
        }
    }

    #[test]
    fn regular_input_converges_immediately() {
        let p = Polygon::regular(7, 1.0).unwrap();
        let trace = run_flow(&p, 100, 1e-8).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.iterations_to_converge, Some(0));
        assert_eq!(trace.polygons.len(), 1);
        assert!(trace.offsets.is_empty());
    }

    #[test]
    fn triangle_side_map_contract() {
        let se = 4.0 / 3f64.sqrt();
        let image = triangle_side_map(se, 1.0).unwrap();
        assert!((image - se).abs() < 1e-15, "fixed point drift {}", image - se);
        // Exact derivative at the fixed point: 1/4 - 4 A^2 / s^2 = -1/2.
        let deriv = 0.25 - 4.0 / (se * se);
        assert!((deriv + 0.5).abs() < 1e-14);
        assert!(triangle_side_map(0.0, 1.0).is_err());
        assert!(triangle_side_map(-1.0, 1.0).is_err());
        assert!(triangle_side_map(1.0, 0.0).is_err());

        // Iteration from s = 3 contracts geometrically with ratio -> 1/2.
        let mut s = 3.0;
        let mut prev_err = (s - se) as f64;
        for k in 0..40 {
            s = triangle_side_map(s, 1.0).unwrap();
            let err = s - se;
            if k > 4 && prev_err.abs() > 1e-12 {
                let ratio = (err / prev_err).abs();
                assert!((0.4..=0.6).contains(&ratio), "step {k}: ratio {ratio}");
            }
            prev_err = err;
        }
        assert!((s - se).abs() < 1e-12);
    }

    #[test]
    fn rate_report_on_fast_flow() {
        let tri = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.2, 0.0),
            Point::new(0.5, 0.9),
        ])
        .unwrap();
        let trace = run_flow(&tri, 400, 1e-10).unwrap();
        assert!(trace.converged);
        // Loose per-flow constant (worst measured ratio for this triangle is
        // 5.4); the universal near-equilateral constant lives in the
        // integration tests.
        let report = rate_membership(&trace, 8.0);
        assert!(report.tail_bound.is_finite());
        assert!(!report.memberships.is_empty());
        for m in &report.memberships {
            assert!(m.member, "k = {}: {} > {}", m.k, m.lhs, m.rhs);
        }
    }
}
