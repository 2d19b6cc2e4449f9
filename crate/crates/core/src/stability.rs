//! Deficit equivalence and Faber-Krahn stability experiments for triangles:
//! the eigenvalue deficit against the isoperimetric deficit, the degenerate
//! thin-isosceles family, and the sharpness-exponent fit.

use crate::error::{Error, Result};
use crate::fem::{solve_lambda1, triangulate_with, TriangulateOptions};
use crate::geometry::{fraenkel_asymmetry, Point, Polygon};
use crate::spectra::{equilateral_triangle_lambda, rectangle_lambda};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Limit of the thin-isosceles deficit ratio.
pub const THIN_LIMIT_RATIO: f64 = PI * PI / 16.0;

/// One evaluated triangle of a stability experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilitySample {
    pub delta_lambda: f64,
    pub delta_perimeter: f64,
    pub asymmetry: f64,
    /// Deficit quotient; absent where the isoperimetric deficit vanishes.
    pub ratio: Option<f64>,
}

/// Aggregated deficit-equivalence or exponent-fit experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityExperiment {
    pub family: String,
    pub refine: usize,
    pub samples: Vec<StabilitySample>,
    /// Smallest and largest finite deficit quotient over the sample.
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Samples skipped because both deficits vanish (equilateral inputs).
    pub excluded: usize,
    /// Log-log slope of delta_lambda against asymmetry, where fitted.
    pub fitted_exponent: Option<f64>,
    /// Two-standard-error band around the fitted exponent.
    pub exponent_band: Option<(f64, f64)>,
}

/// One row of the thin-isosceles family report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThinFamilyRow {
    pub a: f64,
    pub lambda: f64,
    /// (lambda - 4 pi^2 / sqrt(3)) / (L^2 - 12 sqrt(3)) for the area-1 triangle.
    pub ratio: f64,
    /// Eigenvalue of the containing rectangle (below the triangle's).
    pub lambda_outer: f64,
    /// Eigenvalue of the inscribed rectangle (above the triangle's).
    pub lambda_inner: f64,
    pub sandwich_ok: bool,
    pub bracket: (f64, f64),
    pub in_bracket: bool,
}

fn require_triangle(tri: &Polygon) -> Result<()> {
    if tri.len() != 3 {
        return Err(Error::Unsupported(format!(
            "stability deficits need a triangle, got {} vertices",
            tri.len()
        )));
    }
    let d = tri.diameter();
    if tri.area() < 1e-10 * d * d {
        return Err(Error::Degenerate(format!(
            "triangle area {} below resolution for diameter {d}",
            tri.area()
        )));
    }
    Ok(())
}

/// Longest side squared over twice the area: the side-to-height ratio.
fn aspect(tri: &Polygon) -> f64 {
    let longest = (0..tri.len())
        .map(|e| tri.vertex(e + 1).dist(tri.vertex(e)))
        .fold(0.0f64, f64::max);
    longest * longest / (2.0 * tri.area())
}

/// One extra uniform refinement level for strongly anisotropic triangles.
/// A second level would quadruple memory again and the factorization does
/// not fit; past the warning threshold the accuracy claim is refused instead.
fn anisotropy_extra(tri: &Polygon) -> usize {
    if aspect(tri) <= 10.0 {
        0
    } else {
        1
    }
}

fn lambda_graded(p: &Polygon, refine: usize) -> Result<f64> {
    let opts = TriangulateOptions {
        grade_vertices: true,
    };
    Ok(solve_lambda1(triangulate_with(p, refine, opts)?)?.lambda1)
}

/// Eigenvalue deficit and isoperimetric deficit of a triangle.
///
/// The eigenvalue deficit is the area-normalized gap to the equilateral
/// triangle of equal area; the isoperimetric deficit is the squared-perimeter
/// excess over the equilateral value. Both are dilation invariant.
pub fn deficits(tri: &Polygon, refine: usize) -> Result<(f64, f64)> {
    require_triangle(tri)?;
    let lambda = lambda_graded(tri, refine + anisotropy_extra(tri))?;
    let area = tri.area();
    let delta_lambda = area * lambda - area * equilateral_triangle_lambda(area);
    let perim = tri.perimeter();
    let delta_perimeter = perim * perim / (12.0 * 3f64.sqrt() * area) - 1.0;
    Ok((delta_lambda, delta_perimeter))
}

/// Evaluates the deficit quotient over a triangle sample, reporting the
/// empirical envelope of delta_lambda / delta_P. Equilateral inputs, where
/// the quotient is 0/0, are excluded and counted.
pub fn equivalence_ratio_scan(samples: &[Polygon], refine: usize) -> Result<StabilityExperiment> {
    let rows: Vec<StabilitySample> = samples
        .par_iter()
        .map(|tri| {
            let (dl, dp) = deficits(tri, refine)?;
            let asymmetry = fraenkel_asymmetry(tri, 3)?;
            let ratio = (dp > 1e-9).then(|| dl / dp);
            Ok(StabilitySample {
                delta_lambda: dl,
                delta_perimeter: dp,
                asymmetry,
                ratio,
            })
        })
        .collect::<Result<_>>()?;
    let excluded = rows.iter().filter(|s| s.ratio.is_none()).count();
    let finite: Vec<f64> = rows.iter().filter_map(|s| s.ratio).collect();
    let min_ratio = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(StabilityExperiment {
        family: "triangle-scan".into(),
        refine,
        samples: rows,
        min_ratio,
        max_ratio,
        excluded,
        fitted_exponent: None,
        exponent_band: None,
    })
}

/// Area-1 isosceles triangle with base 2a on the x axis and apex above the
/// origin.
pub fn thin_isosceles(a: f64) -> Result<Polygon> {
    if !(a >= 3.0) {
        return Err(Error::DomainError(format!(
            "thin-isosceles family needs a >= 3, got {a}"
        )));
    }
    Polygon::new(vec![
        Point::new(-a, 0.0),
        Point::new(a, 0.0),
        Point::new(0.0, 1.0 / a),
    ])
}

/// Deficit ratio of the degenerate thin-isosceles family, one row per value
/// of `a`, with the rectangle sandwich and the limit bracket attached.
pub fn pi2_over_16_family(
    a_values: &[f64],
    epsilon: f64,
    refine: usize,
) -> Result<Vec<ThinFamilyRow>> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::DomainError(format!(
            "bracket width epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let bracket = (
        (1.0 - epsilon) * THIN_LIMIT_RATIO,
        THIN_LIMIT_RATIO / ((1.0 - epsilon) * (1.0 - epsilon)),
    );
    a_values
        .par_iter()
        .map(|&a| {
            let tri = thin_isosceles(a)?;
            if aspect(&tri) > 5e3 {
                return Err(Error::AccuracyWarning(format!(
                    "a = {a}: triangle aspect {:.0} exceeds what two extra \
                     refinement levels resolve; the eigenvalue error would \
                     swamp the bracket on this anisotropic mesh",
                    aspect(&tri)
                )));
            }
            let lambda = lambda_graded(&tri, refine + anisotropy_extra(&tri))?;
            let height = 1.0 / a;
            let perim = tri.perimeter();
            let ratio =
                (lambda - 4.0 * PI * PI / 3f64.sqrt()) / (perim * perim - 12.0 * 3f64.sqrt());
            let lambda_outer = rectangle_lambda(2.0 * a, height);
            let lambda_inner = rectangle_lambda(2.0 * a * epsilon, (1.0 - epsilon) * height);
            Ok(ThinFamilyRow {
                a,
                lambda,
                ratio,
                lambda_outer,
                lambda_inner,
                sandwich_ok: lambda_outer < lambda && lambda < lambda_inner,
                bracket,
                in_bracket: bracket.0 < ratio && ratio < bracket.1,
            })
        })
        .collect()
}

/// Log-log fit of the eigenvalue deficit against Fraenkel asymmetry over the
/// vertex-sheared equilateral family: one vertex moved a distance t parallel
/// to the opposite side, area renormalized. Returns the experiment with the
/// fitted exponent and a two-standard-error band.
///
/// The equilateral reference eigenvalue is solved on the same meshing
/// pipeline at the same refinement instead of using the closed form: the
/// conforming bias of the two solves cancels, which keeps the small deficits
/// of the fit from being floored by discretization error.
pub fn sharpness_exponent_fit(t_values: &[f64], refine: usize) -> Result<StabilityExperiment> {
    let reference = sheared_equilateral(0.0)?;
    let lambda_eq = lambda_graded(&reference, refine)?;
    let rows: Vec<StabilitySample> = t_values
        .par_iter()
        .map(|&t| {
            let tri = sheared_equilateral(t)?;
            require_triangle(&tri)?;
            let area = tri.area();
            let dl = area * (lambda_graded(&tri, refine + anisotropy_extra(&tri))? - lambda_eq);
            let perim = tri.perimeter();
            let dp = perim * perim / (12.0 * 3f64.sqrt() * area) - 1.0;
            let asymmetry = fraenkel_asymmetry(&tri, 3)?;
            let ratio = (dp > 1e-9).then(|| dl / dp);
            Ok(StabilitySample {
                delta_lambda: dl,
                delta_perimeter: dp,
                asymmetry,
                ratio,
            })
        })
        .collect::<Result<_>>()?;
    let excluded = rows.iter().filter(|s| s.ratio.is_none()).count();
    let pairs: Vec<(f64, f64)> = rows
        .iter()
        .filter(|s| s.ratio.is_some() && s.delta_lambda > 0.0 && s.asymmetry > 0.0)
        .map(|s| (s.asymmetry.ln(), s.delta_lambda.ln()))
        .collect();
    if pairs.len() < 2 {
        return Err(Error::DomainError(
            "exponent fit needs at least two nondegenerate offsets".into(),
        ));
    }
    let (slope, band) = fit_line(&pairs);
    let finite: Vec<f64> = rows.iter().filter_map(|s| s.ratio).collect();
    Ok(StabilityExperiment {
        family: "sheared-equilateral".into(),
        refine,
        samples: rows,
        min_ratio: finite.iter().copied().fold(f64::INFINITY, f64::min),
        max_ratio: finite.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        excluded,
        fitted_exponent: Some(slope),
        exponent_band: Some(band),
    })
}

/// Unit equilateral triangle with one vertex moved distance t parallel to
/// the opposite side, rescaled back to the original area.
pub fn sheared_equilateral(t: f64) -> Result<Polygon> {
    let base = Polygon::new(vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(0.5 + t, 0.75f64.sqrt()),
    ])?;
    // The shear preserves area exactly; the rescale keeps the construction
    // honest for directions that do not.
    let scale = (3f64.sqrt() / 4.0 / base.area()).sqrt();
    base.scaled(scale)
}

/// Least-squares slope of y on x with a two-standard-error band.
pub(crate) fn fit_line(pairs: &[(f64, f64)]) -> (f64, (f64, f64)) {
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let dof = (pairs.len() as f64 - 2.0).max(1.0);
    let ss_res: f64 = pairs
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    let se = (ss_res / dof / sxx).sqrt();
    (slope, (slope - 2.0 * se, slope + 2.0 * se))
}
