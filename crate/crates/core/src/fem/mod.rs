//! P1 finite elements on triangulated polygons: mesh construction (fan or
//! ear clipping, uniform red refinement, vertex-graded rings), the first
//! Dirichlet eigenpair, and boundary gradient traces used by the shape
//! derivative formulas.

mod ldl;
mod solver;
mod sparse;

pub use solver::{solve_lambda1, EigenSolution};
pub use sparse::Csr;

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon};
use crate::symmetrize::SymmetrizationFrame;
use std::collections::HashMap;

/// Conforming triangle mesh of a polygon.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub nodes: Vec<Point>,
    /// Positively oriented index triples.
    pub triangles: Vec<[usize; 3]>,
    /// Boundary sub-edges in boundary orientation, tagged with the polygon
    /// edge (from vertex `polygon_edge` to `polygon_edge + 1`) they lie on.
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Number of uniform red refinements applied to the base triangulation.
    pub refinement_level: usize,
    /// Node indices holding the polygon's corners.
    pub polygon_vertex_nodes: Vec<usize>,
    /// The triangulated polygon.
    pub polygon: Polygon,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub polygon_edge: usize,
}

/// Extra mesh construction choices.
#[derive(Clone, Copy, Debug)]
pub struct TriangulateOptions {
    /// Add two geometric refinement rings around every polygon vertex
    /// (red-green local refinement); sharpens boundary gradient traces near
    /// corners where the eigenfunction gradient vanishes or is singular.
    pub grade_vertices: bool,
}

impl Default for TriangulateOptions {
    fn default() -> Self {
        TriangulateOptions { grade_vertices: false }
    }
}

impl Mesh {
    /// Signed doubled area of triangle t.
    fn double_area(&self, t: [usize; 3]) -> f64 {
        let [a, b, c] = t;
        (self.nodes[b] - self.nodes[a]).cross(self.nodes[c] - self.nodes[a])
    }

    /// Nodes on the boundary (indices), from the boundary edge list.
    pub fn boundary_nodes(&self) -> Vec<bool> {
        let mut on = vec![false; self.nodes.len()];
        for e in &self.boundary_edges {
            on[e.a] = true;
            on[e.b] = true;
        }
        on
    }

    /// Interior node indices in ascending order.
    pub fn interior_nodes(&self) -> Vec<usize> {
        let on = self.boundary_nodes();
        (0..self.nodes.len()).filter(|&i| !on[i]).collect()
    }
}

/// Triangulates `poly`: fan from the vertex mean when convex, ear clipping
/// otherwise, then `level` uniform red refinements (each quarters every
/// triangle and halves the mesh size).
pub fn triangulate(poly: &Polygon, level: usize) -> Result<Mesh> {
    triangulate_with(poly, level, TriangulateOptions::default())
}

/// [`triangulate`] with options; vertex grading is applied after the uniform
/// levels so the rings live at the finest scale.
pub fn triangulate_with(poly: &Polygon, level: usize, opts: TriangulateOptions) -> Result<Mesh> {
    let mut mesh = if poly.is_convex() { fan_base(poly) } else { ear_clip_base(poly)? };
    for _ in 0..level {
        let marks = vec![true; mesh.triangles.len()];
        mesh = refine_marked(&mesh, marks);
        mesh.refinement_level += 1;
    }
    if opts.grade_vertices {
        for _ in 0..2 {
            let corner: Vec<bool> = {
                let mut is_corner = vec![false; mesh.nodes.len()];
                for &v in &mesh.polygon_vertex_nodes {
                    is_corner[v] = true;
                }
                mesh.triangles
                    .iter()
                    .map(|t| t.iter().any(|&v| is_corner[v]))
                    .collect()
            };
            mesh = refine_marked(&mesh, corner);
        }
    }
    Ok(mesh)
}

fn fan_base(poly: &Polygon) -> Mesh {
    let n = poly.len();
    let mut nodes = vec![poly.vertex_mean()];
    nodes.extend_from_slice(poly.vertices());
    let triangles = (0..n).map(|i| [0, 1 + i, 1 + (i + 1) % n]).collect();
    let boundary_edges =
        (0..n).map(|i| BoundaryEdge { a: 1 + i, b: 1 + (i + 1) % n, polygon_edge: i }).collect();
    Mesh {
        nodes,
        triangles,
        boundary_edges,
        refinement_level: 0,
        polygon_vertex_nodes: (1..=n).collect(),
        polygon: poly.clone(),
    }
}

fn ear_clip_base(poly: &Polygon) -> Result<Mesh> {
    let n = poly.len();
    let pts = poly.vertices();
    let diam = poly.diameter();
    let eps = 1e-12 * diam * diam;
    let mut ring: Vec<usize> = (0..n).collect();
    let mut triangles = Vec::with_capacity(n - 2);

    let is_convex_at = |ring: &[usize], k: usize| -> bool {
        let m = ring.len();
        let p = pts[ring[(k + m - 1) % m]];
        let q = pts[ring[k]];
        let r = pts[ring[(k + 1) % m]];
        (q - p).cross(r - q) > eps
    };
    let contains_other = |ring: &[usize], k: usize| -> bool {
        let m = ring.len();
        let ia = ring[(k + m - 1) % m];
        let ib = ring[k];
        let ic = ring[(k + 1) % m];
        let (a, b, c) = (pts[ia], pts[ib], pts[ic]);
        ring.iter().any(|&j| {
            if j == ia || j == ib || j == ic {
                return false;
            }
            let p = pts[j];
            (b - a).cross(p - a) >= -eps
                && (c - b).cross(p - b) >= -eps
                && (a - c).cross(p - c) >= -eps
        })
    };

    while ring.len() > 3 {
        let m = ring.len();
        let mut clipped = false;
        for k in 0..m {
            if is_convex_at(&ring, k) && !contains_other(&ring, k) {
                let tri = [ring[(k + m - 1) % m], ring[k], ring[(k + 1) % m]];
                triangles.push(tri);
                ring.remove(k);
                clipped = true;
                break;
            }
        }
        if !clipped {
            return Err(Error::InvalidPolygon("ear clipping found no ear".into()));
        }
    }
    triangles.push([ring[0], ring[1], ring[2]]);

    let boundary_edges =
        (0..n).map(|i| BoundaryEdge { a: i, b: (i + 1) % n, polygon_edge: i }).collect();
    Ok(Mesh {
        nodes: pts.to_vec(),
        triangles,
        boundary_edges,
        refinement_level: 0,
        polygon_vertex_nodes: (0..n).collect(),
        polygon: poly.clone(),
    })
}

/// Red-green refinement: marked triangles split into four, unmarked ones with
/// two or three split edges are promoted, and those with exactly one split
/// edge are bisected so the mesh stays conforming. New node indices are
/// assigned in triangle order, so the construction is deterministic.
fn refine_marked(mesh: &Mesh, mut red: Vec<bool>) -> Mesh {
    let edge_key = |u: usize, v: usize| (u.min(v), u.max(v));

    // Promote until the split-edge pattern is closed under the 2+ rule.
    loop {
        let mut split: HashMap<(usize, usize), ()> = HashMap::new();
        for (t, tri) in mesh.triangles.iter().enumerate() {
            if red[t] {
                for k in 0..3 {
                    split.insert(edge_key(tri[k], tri[(k + 1) % 3]), ());
                }
            }
        }
        let mut changed = false;
        for (t, tri) in mesh.triangles.iter().enumerate() {
            if red[t] {
                continue;
            }
            let count = (0..3)
                .filter(|&k| split.contains_key(&edge_key(tri[k], tri[(k + 1) % 3])))
                .count();
            if count >= 2 {
                red[t] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut nodes = mesh.nodes.clone();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |u: usize, v: usize, nodes: &mut Vec<Point>| -> usize {
        *midpoint.entry(edge_key(u, v)).or_insert_with(|| {
            nodes.push((nodes[u] + nodes[v]) * 0.5);
            nodes.len() - 1
        })
    };

    let mut triangles = Vec::with_capacity(mesh.triangles.len() * 4);
    for (t, &[a, b, c]) in mesh.triangles.iter().enumerate() {
        if red[t] {
            let ab = mid(a, b, &mut nodes);
            let bc = mid(b, c, &mut nodes);
            let ca = mid(c, a, &mut nodes);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        } else {
            triangles.push([a, b, c]);
        }
    }
    // Green closure: bisect remaining triangles with one split edge.
    let mut closed = Vec::with_capacity(triangles.len());
    for tri in triangles {
        let split_edges: Vec<usize> = (0..3)
            .filter(|&k| midpoint.contains_key(&edge_key(tri[k], tri[(k + 1) % 3])))
            .collect();
        match split_edges.len() {
            0 => closed.push(tri),
            1 => {
                let k = split_edges[0];
                let (u, v, w) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let m = midpoint[&edge_key(u, v)];
                closed.push([u, m, w]);
                closed.push([m, v, w]);
            }
            // Red children never have split edges; promotion removed the rest.
            _ => unreachable!("unsplit triangle with {} split edges", split_edges.len()),
        }
    }

    let mut boundary_edges = Vec::with_capacity(mesh.boundary_edges.len() * 2);
    for e in &mesh.boundary_edges {
        if let Some(&m) = midpoint.get(&edge_key(e.a, e.b)) {
            boundary_edges.push(BoundaryEdge { a: e.a, b: m, polygon_edge: e.polygon_edge });
            boundary_edges.push(BoundaryEdge { a: m, b: e.b, polygon_edge: e.polygon_edge });
        } else {
            boundary_edges.push(*e);
        }
    }

    Mesh {
        nodes,
        triangles: closed,
        boundary_edges,
        refinement_level: mesh.refinement_level,
        polygon_vertex_nodes: mesh.polygon_vertex_nodes.clone(),
        polygon: mesh.polygon.clone(),
    }
}

/// Checks the mesh invariants: positive orientation, conforming edge
/// incidence (interior edges in two triangles, boundary edges in one), and
/// boundary chain lying on the polygon within 1e-12 of the diameter.
pub fn validate_mesh(mesh: &Mesh) -> Result<()> {
    let nn = mesh.nodes.len();
    let diam = mesh.polygon.diameter();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if tri.iter().any(|&v| v >= nn) {
            return Err(Error::InvalidPolygon(format!("triangle {t} references missing node")));
        }
        if mesh.double_area(*tri) <= 0.0 {
            return Err(Error::InvalidPolygon(format!("triangle {t} is not positively oriented")));
        }
    }

    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    for tri in &mesh.triangles {
        for k in 0..3 {
            let (u, v) = (tri[k], tri[(k + 1) % 3]);
            *counts.entry((u.min(v), u.max(v))).or_insert(0) += 1;
        }
    }
    let mut boundary_set: HashMap<(usize, usize), usize> = HashMap::new();
    for e in &mesh.boundary_edges {
        boundary_set.insert((e.a.min(e.b), e.a.max(e.b)), e.polygon_edge);
    }
    for (&edge, &c) in &counts {
        let on_boundary = boundary_set.contains_key(&edge);
        match (c, on_boundary) {
            (1, true) | (2, false) => {}
            _ => {
                return Err(Error::InvalidPolygon(format!(
                    "edge {edge:?} appears {c} times (boundary: {on_boundary})"
                )))
            }
        }
    }
    for (&edge, _) in &boundary_set {
        if counts.get(&edge) != Some(&1) {
            return Err(Error::InvalidPolygon(format!(
                "boundary edge {edge:?} not matched by exactly one triangle"
            )));
        }
    }

    // Every boundary node must lie on its tagged polygon edge; successive
    // boundary edges chain into closed loops (each node has degree 2).
    let mut degree: HashMap<usize, usize> = HashMap::new();
    for e in &mesh.boundary_edges {
        *degree.entry(e.a).or_insert(0) += 1;
        *degree.entry(e.b).or_insert(0) += 1;
        let p = mesh.polygon.vertex(e.polygon_edge);
        let q = mesh.polygon.vertex(e.polygon_edge + 1);
        let along = (q - p) / (q - p).norm();
        for node in [mesh.nodes[e.a], mesh.nodes[e.b]] {
            let rel = node - p;
            let off = rel.cross(along).abs();
            let s = rel.dot(along);
            if off > 1e-12 * diam || s < -1e-12 * diam || s > (q - p).norm() + 1e-12 * diam {
                return Err(Error::InvalidPolygon(format!(
                    "boundary node off its polygon edge by {off}"
                )));
            }
        }
    }
    if degree.values().any(|&d| d != 2) {
        return Err(Error::InvalidPolygon("boundary edges do not form closed loops".into()));
    }
    Ok(())
}

/// Per-triangle constant gradient of a nodal field with zeros on the boundary.
fn triangle_gradient(mesh: &Mesh, full: &[f64], tri: [usize; 3]) -> Point {
    let [a, b, c] = tri;
    let (pa, pb, pc) = (mesh.nodes[a], mesh.nodes[b], mesh.nodes[c]);
    let two_a = (pb - pa).cross(pc - pa);
    // grad phi_a = perp(pc - pb) / 2A, cyclically.
    let g = (pc - pb).perp() * full[a] + (pa - pc).perp() * full[b] + (pb - pa).perp() * full[c];
    g / two_a
}

/// Gradient magnitude sampled along one polygon edge.
#[derive(Clone, Debug)]
pub struct EdgeTrace {
    /// Arclength of each sub-edge midpoint, measured from the edge start.
    pub arclengths: Vec<f64>,
    /// |grad u| of the adjacent triangle, constant per sub-edge.
    pub values: Vec<f64>,
    /// Sub-edge lengths (quadrature weights in arclength).
    pub weights: Vec<f64>,
    /// Total edge length.
    pub length: f64,
}

/// Samples |grad u| along polygon edge `polygon_edge` of the solution's mesh.
pub fn edge_gradient_trace(sol: &EigenSolution, polygon_edge: usize) -> Result<EdgeTrace> {
    let mesh = &sol.mesh;
    if polygon_edge >= mesh.polygon.len() {
        return Err(Error::FrameMismatch(format!("polygon edge {polygon_edge} out of range")));
    }
    let full = sol.full_nodal();
    let owner = boundary_owners(mesh);
    let start = mesh.polygon.vertex(polygon_edge);
    let end = mesh.polygon.vertex(polygon_edge + 1);
    let along = (end - start) / (end - start).norm();

    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for (idx, e) in mesh.boundary_edges.iter().enumerate() {
        if e.polygon_edge != polygon_edge {
            continue;
        }
        let (pa, pb) = (mesh.nodes[e.a], mesh.nodes[e.b]);
        let mid = (pa + pb) * 0.5;
        let tri = mesh.triangles[owner[idx]];
        let g = triangle_gradient(mesh, &full, tri).norm();
        rows.push(((mid - start).dot(along), g, pa.dist(pb)));
    }
    if rows.is_empty() {
        return Err(Error::FrameMismatch(format!("no boundary edges tagged {polygon_edge}")));
    }
    rows.sort_by(|x, y| x.0.total_cmp(&y.0));
    let length = mesh.polygon.vertex(polygon_edge + 1).dist(start);
    Ok(EdgeTrace {
        arclengths: rows.iter().map(|r| r.0).collect(),
        values: rows.iter().map(|r| r.1).collect(),
        weights: rows.iter().map(|r| r.2).collect(),
        length,
    })
}

/// The window leg a trace runs along: `Upper` is the leg from `frame.v1` to
/// the moved vertex, `Lower` the leg from `frame.v3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceSide {
    Upper,
    Lower,
}

/// Gradient magnitude along one window leg, parametrized by the height
/// coordinate alpha over the window chord: alpha = 0 at the chord endpoint,
/// alpha = xi at the moved vertex. The derivative formulas integrate
/// g(alpha)^2 against (alpha/xi) d alpha, so `weights` are height extents.
#[derive(Clone, Debug)]
pub struct BoundaryTrace {
    pub alphas: Vec<f64>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
    pub xi: f64,
}

impl BoundaryTrace {
    /// Quadrature of (alpha/xi) * g(alpha)^2 d alpha over [0, xi]: the
    /// one-sided ingredient of the first derivative formula.
    pub fn weighted_square_integral(&self) -> f64 {
        self.alphas
            .iter()
            .zip(&self.values)
            .zip(&self.weights)
            .map(|((a, g), w)| (a / self.xi) * g * g * w)
            .sum()
    }

    /// Quadrature of alpha * g(alpha)^2 d alpha (second derivative ingredient).
    pub fn alpha_square_integral(&self) -> f64 {
        self.alphas
            .iter()
            .zip(&self.values)
            .zip(&self.weights)
            .map(|((a, g), w)| a * g * g * w)
            .sum()
    }
}

/// Samples |grad u| along the window leg `side`, checked against the
/// solution's own polygon: the moved vertex must sit on the frame's axis at
/// height xi and the leg base must coincide with the frame's chord endpoint.
pub fn boundary_gradient_trace(
    sol: &EigenSolution,
    frame: &SymmetrizationFrame,
    side: TraceSide,
) -> Result<BoundaryTrace> {
    let mesh = &sol.mesh;
    let poly = &mesh.polygon;
    let n = poly.len();
    let diam = poly.diameter();
    let tol = 1e-9 * diam;

    let tip_idx = frame.moved_vertex() % n;
    let tip = poly.vertex(tip_idx);
    let height = (tip - frame.m).dot(frame.axis);
    if (height - frame.xi).abs() > tol {
        return Err(Error::FrameMismatch(format!(
            "moved vertex sits at height {height}, frame expects xi = {}",
            frame.xi
        )));
    }
    let base = match side {
        TraceSide::Upper => frame.v1,
        TraceSide::Lower => frame.v3,
    };
    let prev = poly.vertex(tip_idx + n - 1);
    let next = poly.vertex(tip_idx + 1);
    let polygon_edge = if prev.dist(base) <= tol {
        (tip_idx + n - 1) % n
    } else if next.dist(base) <= tol {
        tip_idx
    } else {
        return Err(Error::FrameMismatch(
            "frame chord endpoint is not a neighbor of the moved vertex".into(),
        ));
    };

    let edge = edge_gradient_trace(sol, polygon_edge)?;
    // Convert arclength midpoints to chord heights: the leg runs linearly
    // from height 0 at the base to xi at the tip.
    let p = poly.vertex(polygon_edge);
    let q = poly.vertex(polygon_edge + 1);
    let base_h = (p - frame.m).dot(frame.axis);
    let slope = (q - p).dot(frame.axis) / (q - p).norm();
    let mut rows: Vec<(f64, f64, f64)> = edge
        .arclengths
        .iter()
        .zip(&edge.values)
        .zip(&edge.weights)
        .map(|((s, g), w)| {
            let alpha = base_h + s * slope;
            (alpha, *g, (w * slope).abs())
        })
        .collect();
    rows.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(BoundaryTrace {
        alphas: rows.iter().map(|r| r.0).collect(),
        values: rows.iter().map(|r| r.1).collect(),
        weights: rows.iter().map(|r| r.2).collect(),
        xi: frame.xi,
    })
}

/// For each boundary edge (by list index), the triangle containing it.
fn boundary_owners(mesh: &Mesh) -> Vec<usize> {
    let mut map: HashMap<(usize, usize), usize> = HashMap::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            let (u, v) = (tri[k], tri[(k + 1) % 3]);
            map.insert((u.min(v), u.max(v)), t);
        }
    }
    mesh.boundary_edges
        .iter()
        .map(|e| map[&(e.a.min(e.b), e.a.max(e.b))])
        .collect()
}
