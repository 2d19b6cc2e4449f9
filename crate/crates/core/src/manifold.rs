//! The constraint manifold of fixed-area polygons in angle/radius coordinates:
//! Jacobians of the defining constraint maps at the regular polygon, their
//! kernel dimensions by singular value decomposition, and a sampler for
//! near-regular polygons on the manifold.

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative threshold on singular values below which a direction counts as kernel.
pub const RANK_TOL: f64 = 1e-10;

/// Singular value summary of a constraint Jacobian.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JacobianReport {
    pub n: usize,
    pub matrix_rows: usize,
    pub matrix_cols: usize,
    /// All singular values, descending.
    pub singular_values: Vec<f64>,
    /// Kernel dimension: columns minus rank at tolerance [`RANK_TOL`].
    pub nullity: usize,
}

/// Tail sine sum `-(sin(2 pi j / n) + ... + sin(2 pi (n-1) / n))`.
fn tail_sin(j: usize, n: usize) -> f64 {
    -((j..n).map(|k| (2.0 * PI * k as f64 / n as f64).sin()).sum::<f64>())
}

/// Tail cosine sum `cos(2 pi j / n) + ... + cos(2 pi (n-1) / n)`.
fn tail_cos(j: usize, n: usize) -> f64 {
    (j..n).map(|k| (2.0 * PI * k as f64 / n as f64).cos()).sum()
}

/// Jacobian of the four manifold constraints (angle sum, area, two barycenter
/// components) at the regular polygon, as a 4 x 2n row-major matrix.
///
/// The matrix is transcribed exactly as displayed in its source derivation,
/// including the unit entry in the first column of the last row (the
/// literal derivative there is sin(0) = 0); the rank is 4 either way.
pub fn dq_matrix(n: usize) -> Result<Vec<Vec<f64>>> {
    if n < 3 {
        return Err(Error::DomainError(format!("need n >= 3, got {n}")));
    }
    let step = 2.0 * PI / n as f64;
    let mut m = vec![vec![0.0; 2 * n]; 4];
    for j in 0..n {
        // x-derivative block.
        m[0][j] = 1.0;
        m[1][j] = step.cos();
        m[2][j] = tail_sin(j + 1, n);
        m[3][j] = tail_cos(j + 1, n);
        // r-derivative block.
        m[0][n + j] = 0.0;
        m[1][n + j] = 2.0 * step.sin();
        m[2][n + j] = (step * j as f64).cos();
        m[3][n + j] = if j == 0 { 1.0 } else { (step * j as f64).sin() };
    }
    Ok(m)
}

/// Jacobian of the equilateral-submanifold constraints (angle sum, n equal
/// squared sides, area, two barycenter components) at the regular polygon,
/// as an (n+4) x (2n+1) row-major matrix; the trailing column differentiates
/// in the shared squared-side variable.
///
/// Transcribed exactly as displayed, with the same unit first entry in the
/// last row as [`dq_matrix`].
pub fn dpsi_matrix(n: usize) -> Result<Vec<Vec<f64>>> {
    if n < 3 {
        return Err(Error::DomainError(format!("need n >= 3, got {n}")));
    }
    let step = 2.0 * PI / n as f64;
    let alpha = 2.0 * step.sin();
    let w = 2.0 * (1.0 - step.cos());
    let rows = n + 4;
    let cols = 2 * n + 1;
    let mut m = vec![vec![0.0; cols]; rows];
    for j in 0..n {
        m[0][j] = 1.0;
        m[n + 1][j] = step.cos();
        m[n + 2][j] = tail_sin(j + 1, n);
        m[n + 3][j] = tail_cos(j + 1, n);
        m[n + 1][n + j] = alpha;
        m[n + 2][n + j] = (step * j as f64).cos();
        m[n + 3][n + j] = if j == 0 { 1.0 } else { (step * j as f64).sin() };
    }
    // Side i couples x_i with r_i, r_{i+1} and the squared-side variable.
    for i in 0..n {
        m[1 + i][i] = alpha;
        m[1 + i][n + i] = w;
        m[1 + i][n + (i + 1) % n] = w;
        m[1 + i][2 * n] = -1.0;
    }
    Ok(m)
}

fn svd_report(n: usize, matrix: &[Vec<f64>]) -> JacobianReport {
    let rows = matrix.len();
    let cols = matrix[0].len();
    let m = DMatrix::from_fn(rows, cols, |i, j| matrix[i][j]);
    let mut sv: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > RANK_TOL * smax).count();
    JacobianReport {
        n,
        matrix_rows: rows,
        matrix_cols: cols,
        singular_values: sv,
        nullity: cols - rank,
    }
}

/// Kernel summary of the manifold-constraint Jacobian at the regular n-gon.
/// The nullity equals 2n - 4 for every n >= 3.
pub fn dq_at_regular(n: usize) -> Result<JacobianReport> {
    Ok(svd_report(n, &dq_matrix(n)?))
}

/// Kernel summary of the equilateral-submanifold Jacobian at the regular
/// n-gon. The nullity equals n - 3 for n >= 4; the n = 3 report is
/// informational only (the constraints are not independent there).
pub fn dpsi_at_regular(n: usize) -> Result<JacobianReport> {
    Ok(svd_report(n, &dpsi_matrix(n)?))
}

/// Result of sampling near-regular polygons of fixed area.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub polygons: Vec<Polygon>,
    /// Total candidate draws, including rejected ones.
    pub attempts: usize,
    /// Set when `radius` exceeds a quarter of the regular side length, so
    /// convexity is no longer guaranteed and rejection filtering was active.
    pub convexity_warning: bool,
}

/// Largest perturbation radius for which convexity filtering stays silent:
/// one quarter of the side length of the regular n-gon of area `alpha`.
pub fn convexity_safe_radius(n: usize, alpha: f64) -> Result<f64> {
    let regular = Polygon::regular_with_area(n, alpha)?;
    Ok(0.25 * regular.side_lengths().iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Draws `count` convex polygons with each vertex within `radius` of the
/// matching vertex of the regular n-gon of area `alpha`, rescaled about the
/// vertex barycenter so the area is exactly `alpha`. Deterministic in `seed`.
pub fn sample_near_regular(
    n: usize,
    radius: f64,
    alpha: f64,
    seed: u64,
    count: usize,
) -> Result<SampleBatch> {
    if n < 3 {
        return Err(Error::DomainError(format!("need n >= 3, got {n}")));
    }
    if !(radius >= 0.0) {
        return Err(Error::DomainError("radius must be nonnegative".into()));
    }
    if !(alpha > 0.0) {
        return Err(Error::DomainError("area must be positive".into()));
    }
    let reference = Polygon::regular_with_area(n, alpha)?;
    let convexity_warning = radius > convexity_safe_radius(n, alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut polygons = Vec::with_capacity(count);
    let mut attempts = 0usize;
    let budget = 1000 * count.max(1);
    while polygons.len() < count {
        attempts += 1;
        if attempts > budget {
            return Err(Error::Unsupported(format!(
                "rejected too many candidates at radius {radius}; only {} of {count} accepted",
                polygons.len()
            )));
        }
        // Draw inside 80% of the radius so the area-fixing rescale below
        // cannot push a vertex past the full radius.
        let pts: Vec<Point> = reference
            .vertices()
            .iter()
            .map(|&v| {
                let (dx, dy) = uniform_disk(&mut rng, 0.8 * radius);
                v + Point::new(dx, dy)
            })
            .collect();
        let Ok(poly) = Polygon::new(pts) else { continue };
        if poly.len() != n || !poly.is_convex() {
            continue;
        }
        let center = poly.vertex_mean();
        let scale = (alpha / poly.area()).sqrt();
        let Ok(scaled) = poly.translated(-center).scaled(scale) else { continue };
        let fixed = scaled.translated(center);
        if !fixed.is_convex() || fixed.len() != n {
            continue;
        }
        let within = fixed
            .vertices()
            .iter()
            .zip(reference.vertices())
            .all(|(a, b)| a.dist(*b) <= radius);
        if radius > 0.0 && !within {
            continue;
        }
        polygons.push(fixed);
    }
    Ok(SampleBatch { polygons, attempts, convexity_warning })
}

fn uniform_disk<R: Rng>(rng: &mut R, radius: f64) -> (f64, f64) {
    if radius == 0.0 {
        return (0.0, 0.0);
    }
    loop {
        let x = rng.gen_range(-radius..=radius);
        let y = rng.gen_range(-radius..=radius);
        if x * x + y * y <= radius * radius {
            return (x, y);
        }
    }
}
