//! Convex polygon intersection by half-plane clipping, and the symmetric
//! difference area built on it.

use super::{signed_area_of, Point, Polygon};
use crate::error::{Error, Result};

/// Clips a vertex loop against the left half-plane of the directed edge (a, b).
fn clip_half_plane(pts: &[Point], a: Point, b: Point, eps: f64) -> Vec<Point> {
    let dir = b - a;
    let side = |p: Point| dir.cross(p - a);
    let mut out = Vec::with_capacity(pts.len() + 1);
    let n = pts.len();
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        let sp = side(p);
        let sq = side(q);
        if sp >= -eps {
            out.push(p);
        }
        // Edge crosses the boundary line: keep the crossing point.
        if (sp > eps && sq < -eps) || (sp < -eps && sq > eps) {
            let t = sp / (sp - sq);
            out.push(p + (q - p) * t.clamp(0.0, 1.0));
        }
    }
    out
}

/// Area of the intersection of two convex polygons.
///
/// Returns `Unsupported` when either polygon is non-convex: half-plane
/// clipping is only exact on convex input.
pub fn convex_intersection_area(p: &Polygon, q: &Polygon) -> Result<f64> {
    if !p.is_convex() || !q.is_convex() {
        return Err(Error::Unsupported(
            "intersection area requires convex polygons".into(),
        ));
    }
    let scale = p.diameter().max(q.diameter());
    let eps = 1e-14 * scale;
    let mut pts: Vec<Point> = q.vertices().to_vec();
    let n = p.len();
    for i in 0..n {
        if pts.len() < 3 {
            return Ok(0.0);
        }
        pts = clip_half_plane(&pts, p.vertex(i), p.vertex(i + 1), eps);
    }
    if pts.len() < 3 {
        return Ok(0.0);
    }
    Ok(signed_area_of(&pts).abs())
}

/// Area of the symmetric difference of two convex polygons:
/// `|P| + |Q| - 2 |P intersect Q|`.
pub fn symmetric_difference_area(p: &Polygon, q: &Polygon) -> Result<f64> {
    let inter = convex_intersection_area(p, q)?;
    Ok((p.area() + q.area() - 2.0 * inter).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn square(side: f64) -> Polygon {
        Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(side, 0.0),
            Point::new(side, side),
            Point::new(0.0, side),
        ])
        .unwrap()
    }

    #[test]
    fn identical_polygons_have_zero_symmetric_difference() {
        let p = square(1.0);
        assert!(symmetric_difference_area(&p, &p).unwrap() < 1e-14);
    }

    #[test]
    fn disjoint_squares() {
        let p = square(1.0);
        let q = square(1.0).translated(Point::new(5.0, 0.0));
        assert!((convex_intersection_area(&p, &q).unwrap()).abs() < 1e-14);
        assert!((symmetric_difference_area(&p, &q).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unit_square_shifted_by_half() {
        let p = square(1.0);
        let q = p.translated(Point::new(0.5, 0.0));
        // Overlap is a 0.5 x 1 strip.
        assert!((convex_intersection_area(&p, &q).unwrap() - 0.5).abs() < 1e-12);
        assert!((symmetric_difference_area(&p, &q).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotated_square_closed_form() {
        // Unit square vs the same square rotated 45 degrees about its center:
        // symmetric difference is 8 corner triangles of total area 6 - 4 sqrt(2).
        let p = square(1.0);
        let c = Point::new(0.5, 0.5);
        let q = p.translated(-c).rotated(std::f64::consts::FRAC_PI_4).translated(c);
        let expect = 6.0 - 4.0 * 2f64.sqrt();
        assert!((symmetric_difference_area(&p, &q).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn non_convex_input_is_rejected() {
        let p = square(1.0);
        let ccv = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 2.0),
            Point::new(1.0, 0.5),
            Point::new(0.0, 2.0),
        ])
        .unwrap();
        assert!(matches!(
            symmetric_difference_area(&p, &ccv),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn contained_triangle() {
        let p = square(4.0);
        let t = Polygon::new(vec![
            Point::new(1.0, 1.0),
            Point::new(3.0, 1.0),
            Point::new(1.0, 3.0),
        ])
        .unwrap();
        assert!((convex_intersection_area(&p, &t).unwrap() - 2.0).abs() < 1e-12);
        assert!((symmetric_difference_area(&p, &t).unwrap() - 14.0).abs() < 1e-12);
    }
}
