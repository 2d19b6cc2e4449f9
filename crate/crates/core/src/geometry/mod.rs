//! Planar polygon primitives: simple-polygon type with canonical orientation,
//! angle/radius coordinates about the vertex barycenter, and the isoperimetric
//! deficit with its side/radius/angle variances.

mod asymmetry;
mod clip;

pub use asymmetry::fraenkel_asymmetry;
pub use clip::{convex_intersection_area, symmetric_difference_area};

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative tolerance (times diameter) under which vertices count as coincident.
const REL_DISTINCT: f64 = 1e-12;
/// Relative tolerance (times diameter squared) under which a vertex angle counts as straight.
const REL_STRAIGHT: f64 = 1e-13;

/// A point in the plane, also used as a 2-vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product of two plane vectors.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Counterclockwise rotation by a quarter turn.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn rotated(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(self) -> Option<Point> {
        let n = self.norm();
        if n > 0.0 {
            Some(self / n)
        } else {
            None
        }
    }

    fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl std::ops::Mul<Point> for f64 {
    type Output = Point;
    fn mul(self, rhs: Point) -> Point {
        rhs * self
    }
}

impl std::ops::Div<f64> for Point {
    type Output = Point;
    fn div(self, rhs: f64) -> Point {
        Point::new(self.x / rhs, self.y / rhs)
    }
}

impl std::ops::Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Signed area of a closed vertex loop (positive for counterclockwise order).
pub(crate) fn signed_area_of(pts: &[Point]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        s += pts[i].cross(pts[(i + 1) % n]);
    }
    0.5 * s
}

/// A simple polygon with at least three vertices, stored counterclockwise.
///
/// Construction validates the vertex list: straight (collinear, non-reversing)
/// vertices are dropped, clockwise input is reversed, and self-intersecting or
/// degenerate input is rejected.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Validates and canonicalizes a vertex loop.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidPolygon("non-finite vertex coordinate".into()));
        }
        if vertices.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        let diam = max_pairwise_distance(&vertices);
        if diam <= 0.0 {
            return Err(Error::InvalidPolygon("all vertices coincide".into()));
        }
        let dist_tol = REL_DISTINCT * diam;
        for i in 0..vertices.len() {
            let j = (i + 1) % vertices.len();
            if vertices[i].dist(vertices[j]) <= dist_tol {
                return Err(Error::InvalidPolygon(format!(
                    "consecutive vertices {i} and {j} coincide"
                )));
            }
        }

        // Drop straight vertices; reject reversal spikes. Removing one vertex can
        // straighten a neighbor, so iterate to a fixed point.
        let straight_tol = REL_STRAIGHT * diam * diam;
        let mut pts = vertices;
        loop {
            let n = pts.len();
            if n < 3 {
                return Err(Error::InvalidPolygon("all vertices collinear".into()));
            }
            let mut dropped = false;
            let mut kept = Vec::with_capacity(n);
            for i in 0..n {
                let a = pts[(i + n - 1) % n];
                let b = pts[i];
                let c = pts[(i + 1) % n];
                let e1 = b - a;
                let e2 = c - b;
                if e1.cross(e2).abs() <= straight_tol {
                    if e1.dot(e2) < 0.0 {
                        return Err(Error::InvalidPolygon(format!(
                            "reversal spike at vertex {i}"
                        )));
                    }
                    // Drop at most one vertex per pass so neighbors are re-examined.
                    if !dropped {
                        dropped = true;
                        continue;
                    }
                }
                kept.push(b);
            }
            if !dropped {
                break;
            }
            pts = kept;
        }

        let area2 = signed_area_of(&pts);
        if area2.abs() <= REL_DISTINCT * diam * diam {
            return Err(Error::InvalidPolygon("polygon has vanishing area".into()));
        }
        if area2 < 0.0 {
            pts.reverse();
        }

        let poly = Polygon { vertices: pts };
        poly.check_simple(diam)?;
        Ok(poly)
    }

    /// Regular n-gon with the given circumradius, first vertex on the +x axis.
    pub fn regular(n: usize, circumradius: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::DomainError(format!("regular polygon needs n >= 3, got {n}")));
        }
        if !(circumradius > 0.0) {
            return Err(Error::DomainError("circumradius must be positive".into()));
        }
        let pts = (0..n)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / n as f64;
                Point::new(circumradius * th.cos(), circumradius * th.sin())
            })
            .collect();
        Polygon::new(pts)
    }

    /// Regular n-gon scaled to the given area, first vertex on the +x axis.
    pub fn regular_with_area(n: usize, area: f64) -> Result<Self> {
        if !(area > 0.0) {
            return Err(Error::DomainError("area must be positive".into()));
        }
        // Area of a regular n-gon with circumradius R is (n/2) R^2 sin(2 pi / n).
        let nf = n as f64;
        let r = (2.0 * area / (nf * (2.0 * PI / nf).sin())).sqrt();
        Polygon::regular(n, r)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Vertex by cyclic index.
    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i % self.vertices.len()]
    }

    pub fn area(&self) -> f64 {
        signed_area_of(&self.vertices).abs()
    }

    pub fn perimeter(&self) -> f64 {
        self.side_lengths().iter().sum()
    }

    /// Lengths of the sides (v_i, v_{i+1}).
    pub fn side_lengths(&self) -> Vec<f64> {
        let n = self.len();
        (0..n).map(|i| self.vertices[i].dist(self.vertex(i + 1))).collect()
    }

    /// Arithmetic mean of the vertices.
    pub fn vertex_mean(&self) -> Point {
        let mut s = Point::default();
        for &v in &self.vertices {
            s = s + v;
        }
        s / self.len() as f64
    }

    /// Center of mass of the enclosed region.
    pub fn area_centroid(&self) -> Point {
        let n = self.len();
        let mut s = Point::default();
        let mut a2 = 0.0;
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertex(i + 1);
            let w = p.cross(q);
            s = s + (p + q) * w;
            a2 += w;
        }
        s / (3.0 * a2)
    }

    /// Largest pairwise vertex distance.
    pub fn diameter(&self) -> f64 {
        max_pairwise_distance(&self.vertices)
    }

    /// True when every turn is counterclockwise (within a small tolerance).
    pub fn is_convex(&self) -> bool {
        let n = self.len();
        let tol = -REL_DISTINCT * self.diameter().powi(2);
        (0..n).all(|i| {
            let e1 = self.vertex(i + 1) - self.vertices[i];
            let e2 = self.vertex(i + 2) - self.vertex(i + 1);
            e1.cross(e2) >= tol
        })
    }

    pub fn translated(&self, d: Point) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().map(|&v| v + d).collect(),
        }
    }

    pub fn rotated(&self, angle: f64) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().map(|v| v.rotated(angle)).collect(),
        }
    }

    /// Uniform scaling about the origin; the factor must be positive.
    pub fn scaled(&self, factor: f64) -> Result<Polygon> {
        if !(factor > 0.0) {
            return Err(Error::DomainError("scale factor must be positive".into()));
        }
        Ok(Polygon {
            vertices: self.vertices.iter().map(|&v| v * factor).collect(),
        })
    }

    /// Mirror image across the x axis, re-reversed to stay counterclockwise.
    pub fn reflected_x(&self) -> Polygon {
        let mut vertices: Vec<Point> =
            self.vertices.iter().map(|v| Point::new(v.x, -v.y)).collect();
        vertices.reverse();
        Polygon { vertices }
    }

    /// Replaces one vertex and re-validates the result.
    pub fn with_vertex_replaced(&self, i: usize, p: Point) -> Result<Polygon> {
        let mut vertices = self.vertices.clone();
        let n = vertices.len();
        vertices[i % n] = p;
        Polygon::new(vertices)
    }

    /// Rejects self-touching boundaries: non-adjacent edges must keep a positive
    /// separation relative to the diameter.
    fn check_simple(&self, diam: f64) -> Result<()> {
        let n = self.len();
        let tol = REL_DISTINCT * diam;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertex(i + 1);
            for j in (i + 1)..n {
                // Skip edge pairs sharing a vertex (cyclically adjacent).
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let c = self.vertices[j];
                let d = self.vertex(j + 1);
                if segment_distance(a, b, c, d) <= tol {
                    return Err(Error::InvalidPolygon(format!(
                        "edges {i} and {j} intersect"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl Serialize for Polygon {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = PolygonRepr {
            vertices: self.vertices.iter().map(|p| [p.x, p.y]).collect(),
            orientation: "ccw".into(),
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Polygon {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = PolygonRepr::deserialize(deserializer)?;
        let mut pts: Vec<Point> = repr.vertices.iter().map(|v| Point::new(v[0], v[1])).collect();
        match repr.orientation.as_str() {
            "ccw" => {}
            "cw" => pts.reverse(),
            other => {
                return Err(serde::de::Error::custom(format!(
                    "orientation must be \"ccw\" or \"cw\", got {other:?}"
                )))
            }
        }
        Polygon::new(pts).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct PolygonRepr {
    vertices: Vec<[f64; 2]>,
    #[serde(default = "default_orientation")]
    orientation: String,
}

fn default_orientation() -> String {
    "ccw".into()
}

fn max_pairwise_distance(pts: &[Point]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            best = best.max(pts[i].dist(pts[j]));
        }
    }
    best
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let denom = ab.norm_sq();
    if denom == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / denom).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Distance between two closed segments (zero when they cross).
fn segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    let d1 = (d - c).cross(a - c);
    let d2 = (d - c).cross(b - c);
    let d3 = (b - a).cross(c - a);
    let d4 = (b - a).cross(d - a);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// A polygon in angle/radius coordinates about the vertex barycenter:
/// `x[i]` is the central angle subtended by side (v_i, v_{i+1}), `r[i]` the
/// distance from the barycenter to v_i, and `alpha` the enclosed area.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldPoint {
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub alpha: f64,
}

impl ManifoldPoint {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Cumulative vertex angles `theta_i = x_0 + ... + x_{i-1}`, with `theta_0 = 0`.
    pub fn vertex_angles(&self) -> Vec<f64> {
        let mut th = Vec::with_capacity(self.x.len());
        let mut acc = 0.0;
        for &xi in &self.x {
            th.push(acc);
            acc += xi;
        }
        th
    }

    /// Area implied by the coordinates: one half of `sum r_i r_{i+1} sin x_i`.
    pub fn coordinate_area(&self) -> f64 {
        let n = self.len();
        0.5 * (0..n)
            .map(|i| self.r[i] * self.r[(i + 1) % n] * self.x[i].sin())
            .sum::<f64>()
    }
}

/// Default absolute tolerance on the angle-sum residual of a manifold point.
pub const MANIFOLD_ANGLE_TOL: f64 = 1e-8;
/// Default relative tolerance on the area residual of a manifold point.
pub const MANIFOLD_AREA_TOL: f64 = 1e-8;

/// Residuals of the three constraint families a manifold point must satisfy.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifoldValidation {
    /// `|sum x_i - 2 pi|`.
    pub angle_residual: f64,
    /// `|coordinate area - alpha| / max(|alpha|, eps)`.
    pub area_residual: f64,
    /// Norm of `sum r_i (cos theta_i, sin theta_i)`, divided by `sum r_i`.
    pub centroid_residual: f64,
    pub ok: bool,
}

/// Computes angle/radius coordinates of a polygon about its vertex barycenter.
///
/// Fails with `DegenerateRadius` if a vertex is too close to the barycenter
/// for its angle to be meaningful.
pub fn to_manifold(poly: &Polygon) -> Result<ManifoldPoint> {
    let n = poly.len();
    let b = poly.vertex_mean();
    let diam = poly.diameter();
    let mut r = Vec::with_capacity(n);
    for (i, &v) in poly.vertices().iter().enumerate() {
        let ri = v.dist(b);
        if ri <= REL_DISTINCT.sqrt() * diam {
            return Err(Error::DegenerateRadius(format!(
                "vertex {i} lies at the vertex barycenter"
            )));
        }
        r.push(ri);
    }
    // Signed turn of the barycenter ray between consecutive vertices. For a
    // counterclockwise polygon these sum to 2 pi (winding number one).
    let mut x = Vec::with_capacity(n);
    for i in 0..n {
        let u = poly.vertices()[i] - b;
        let w = poly.vertex(i + 1) - b;
        x.push(u.cross(w).atan2(u.dot(w)));
    }
    Ok(ManifoldPoint { x, r, alpha: poly.area() })
}

/// Rebuilds a polygon from angle/radius coordinates, barycenter at the origin
/// and first vertex on the +x axis. Inverse of [`to_manifold`] up to rigid motion.
pub fn to_polygon(m: &ManifoldPoint) -> Result<Polygon> {
    let n = m.len();
    if n < 3 || m.r.len() != n {
        return Err(Error::DomainError(format!(
            "coordinate vectors must have equal length >= 3, got x: {}, r: {}",
            n,
            m.r.len()
        )));
    }
    let pts = m
        .vertex_angles()
        .iter()
        .zip(&m.r)
        .map(|(&th, &ri)| Point::new(ri * th.cos(), ri * th.sin()))
        .collect();
    Polygon::new(pts)
}

/// Checks the defining constraints of the polygon manifold: angles sum to
/// 2 pi, the coordinate area matches `alpha`, and the vertex barycenter
/// implied by the coordinates sits at the origin.
pub fn validate_manifold(
    m: &ManifoldPoint,
    angle_tol: f64,
    area_tol: f64,
) -> Result<ManifoldValidation> {
    let n = m.len();
    if n < 3 || m.r.len() != n {
        return Err(Error::DomainError(format!(
            "coordinate vectors must have equal length >= 3, got x: {}, r: {}",
            n,
            m.r.len()
        )));
    }
    if m.r.iter().any(|&ri| !(ri > 0.0)) {
        return Err(Error::DomainError("radii must be positive".into()));
    }
    let angle_residual = (m.x.iter().sum::<f64>() - 2.0 * PI).abs();
    let area_residual = (m.coordinate_area() - m.alpha).abs() / m.alpha.abs().max(f64::MIN_POSITIVE);
    let mut c = Point::default();
    let mut r_sum = 0.0;
    for (&th, &ri) in m.vertex_angles().iter().zip(&m.r) {
        c = c + Point::new(ri * th.cos(), ri * th.sin());
        r_sum += ri;
    }
    let centroid_residual = c.norm() / r_sum;
    let ok = angle_residual <= angle_tol
        && area_residual <= area_tol
        && centroid_residual <= angle_tol;
    Ok(ManifoldValidation { angle_residual, area_residual, centroid_residual, ok })
}

/// Isoperimetric-type deficit of a polygon together with the spread statistics
/// entering the quantitative stability inequality.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeficitReport {
    /// `(sum of side lengths)^2 - 2 n tan(pi/n) * sum r_i r_{i+1} sin x_i`.
    pub deficit_delta: f64,
    /// Population variance of the central angles x_i.
    pub sigma_a2: f64,
    /// Population variance of the barycenter distances r_i.
    pub sigma_r2: f64,
    /// Population variance of the side lengths.
    pub sigma_s2: f64,
    /// `sigma_s2 + sigma_r2`.
    pub v: f64,
    /// Fraenkel asymmetry, when requested; see [`deficit_report_with_asymmetry`].
    pub asymmetry: Option<f64>,
}

fn population_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Deficit and variance statistics of a polygon. The deficit vanishes exactly
/// on regular polygons and is nonnegative on convex ones.
pub fn deficit_and_variances(poly: &Polygon) -> Result<DeficitReport> {
    let m = to_manifold(poly)?;
    let n = poly.len() as f64;
    let sides = poly.side_lengths();
    let perim: f64 = sides.iter().sum();
    let weighted_area_sum = 2.0 * m.coordinate_area();
    let deficit_delta = perim * perim - 2.0 * n * (PI / n).tan() * weighted_area_sum;
    let sigma_a2 = population_variance(&m.x);
    let sigma_r2 = population_variance(&m.r);
    let sigma_s2 = population_variance(&sides);
    Ok(DeficitReport {
        deficit_delta,
        sigma_a2,
        sigma_r2,
        sigma_s2,
        v: sigma_s2 + sigma_r2,
        asymmetry: None,
    })
}

/// [`deficit_and_variances`] with the Fraenkel asymmetry filled in.
pub fn deficit_report_with_asymmetry(poly: &Polygon, n_ref: usize) -> Result<DeficitReport> {
    let mut report = deficit_and_variances(poly)?;
    report.asymmetry = Some(fraenkel_asymmetry(poly, n_ref)?);
    Ok(report)
}

/// Uniformly random convex polygon with exactly `n` vertices inside a
/// `scale`-sized box (Valtr's construction), recentered at the origin.
pub fn random_convex_polygon<R: Rng>(n: usize, scale: f64, rng: &mut R) -> Result<Polygon> {
    if n < 3 {
        return Err(Error::DomainError(format!("need n >= 3, got {n}")));
    }
    if !(scale > 0.0) {
        return Err(Error::DomainError("scale must be positive".into()));
    }
    for _ in 0..256 {
        let dx = random_deltas(n, scale, rng);
        let dy = random_deltas(n, scale, rng);
        let mut steps: Vec<Point> = dx.into_iter().zip(dy).map(|(x, y)| Point::new(x, y)).collect();
        steps.sort_by(|a, b| a.y.atan2(a.x).partial_cmp(&b.y.atan2(b.x)).unwrap());
        let mut acc = Point::default();
        let mut pts = Vec::with_capacity(n);
        for s in steps {
            pts.push(acc);
            acc = acc + s;
        }
        let Ok(poly) = Polygon::new(pts) else { continue };
        // Collinear step directions can merge vertices; require the full count
        // and a non-sliver shape.
        if poly.len() == n && poly.area() > 1e-4 * scale * scale && poly.is_convex() {
            let c = poly.vertex_mean();
            return Ok(poly.translated(-c));
        }
    }
    Err(Error::Unsupported(format!(
        "failed to sample a convex {n}-gon; degenerate draws dominated"
    )))
}

/// Valtr chain split: n signed increments over [0, scale] summing to zero.
fn random_deltas<R: Rng>(n: usize, scale: f64, rng: &mut R) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..scale)).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (lo, hi) = (xs[0], xs[n - 1]);
    let mut deltas = Vec::with_capacity(n);
    let mut last_up = lo;
    let mut last_down = lo;
    for &x in &xs[1..n - 1] {
        if rng.gen::<bool>() {
            deltas.push(x - last_up);
            last_up = x;
        } else {
            deltas.push(last_down - x);
            last_down = x;
        }
    }
    deltas.push(hi - last_up);
    deltas.push(last_down - hi);
    deltas.shuffle(rng);
    deltas
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Polygon {
        Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn construction_normalizes_orientation() {
        let cw = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(signed_area_of(cw.vertices()) > 0.0);
        assert_eq!(cw.area(), 1.0);
    }

    #[test]
    fn construction_drops_straight_vertices() {
        let p = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(0.5, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.area(), 1.0);
    }

    #[test]
    fn construction_rejects_bowtie() {
        let r = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ]);
        assert!(matches!(r, Err(Error::InvalidPolygon(_))));
    }

    #[test]
    fn construction_rejects_duplicate_consecutive_vertices() {
        let r = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ]);
        assert!(matches!(r, Err(Error::InvalidPolygon(_))));
    }

    #[test]
    fn construction_rejects_spike() {
        let r = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(1.0, 1e-15),
            Point::new(0.5, 1.0),
        ]);
        assert!(r.is_err());
    }

    #[test]
    fn unit_square_basics() {
        let p = square();
        assert!((p.area() - 1.0).abs() < 1e-15);
        assert!((p.perimeter() - 4.0).abs() < 1e-15);
        assert!(p.is_convex());
        assert!((p.diameter() - 2f64.sqrt()).abs() < 1e-15);
        let c = p.vertex_mean();
        assert!((c.x - 0.5).abs() < 1e-15 && (c.y - 0.5).abs() < 1e-15);
    }

    #[test]
    fn right_triangle_area() {
        let t = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(0.0, 3.0),
        ])
        .unwrap();
        assert!((t.area() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn regular_polygon_area_formula() {
        for n in 3..=12 {
            let p = Polygon::regular(n, 1.0).unwrap();
            let expect = 0.5 * n as f64 * (2.0 * PI / n as f64).sin();
            assert!((p.area() - expect).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn nonconvex_detected() {
        let p = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 2.0),
            Point::new(1.0, 0.5),
            Point::new(0.0, 2.0),
        ])
        .unwrap();
        assert!(!p.is_convex());
    }

    #[test]
    fn polygon_json_round_trip() {
        let p = square();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"orientation\":\"ccw\""));
        let q: Polygon = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        let cw = r#"{"vertices": [[0,0],[0,1],[1,1],[1,0]], "orientation": "cw"}"#;
        let q: Polygon = serde_json::from_str(cw).unwrap();
        assert_eq!(q.area(), 1.0);
    }

    #[test]
    fn manifold_round_trip_square() {
        let p = square();
        let m = to_manifold(&p).unwrap();
        assert_eq!(m.len(), 4);
        for &xi in &m.x {
            assert!((xi - PI / 2.0).abs() < 1e-12);
        }
        for &ri in &m.r {
            assert!((ri - 0.5f64.sqrt()).abs() < 1e-12);
        }
        let q = to_polygon(&m).unwrap();
        assert!((q.area() - 1.0).abs() < 1e-12);
        assert!((q.perimeter() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn validate_manifold_flags_bad_area() {
        let p = square();
        let mut m = to_manifold(&p).unwrap();
        m.alpha *= 1.5;
        let v = validate_manifold(&m, MANIFOLD_ANGLE_TOL, MANIFOLD_AREA_TOL).unwrap();
        assert!(!v.ok);
        assert!(v.area_residual > 0.3);
        assert!(v.angle_residual < 1e-12);
    }

    #[test]
    fn deficit_zero_on_regular() {
        for n in [3usize, 4, 7, 12] {
            let p = Polygon::regular(n, 1.0).unwrap();
            let d = deficit_and_variances(&p).unwrap();
            assert!(d.deficit_delta.abs() < 1e-10, "n = {n}: {}", d.deficit_delta);
            assert!(d.sigma_a2 < 1e-28 && d.sigma_r2 < 1e-28 && d.sigma_s2 < 1e-28);
        }
    }

    #[test]
    fn random_convex_polygon_is_convex() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 3..=9 {
            for _ in 0..20 {
                let p = random_convex_polygon(n, 1.0, &mut rng).unwrap();
                assert_eq!(p.len(), n);
                assert!(p.is_convex());
            }
        }
    }
}
