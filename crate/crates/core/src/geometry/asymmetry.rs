//! Fraenkel asymmetry: relative symmetric-difference distance to the best
//! rigidly-placed regular polygon of equal area.

use super::{symmetric_difference_area, Point, Polygon};
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Derivative-free simplex minimizer (Nelder-Mead); small fixed dimension.
///
/// Returns the best point and value seen over the whole run.
pub(crate) fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: &[f64],
    max_iter: usize,
    tol: f64,
) -> (Vec<f64>, f64) {
    let dim = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += step[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(&ai, &bi)| ai + t * (bi - ai)).collect()
    };

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];
        if (values[worst] - values[best]).abs() <= tol {
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; dim];
        for &i in &order[..dim] {
            for (c, &xi) in centroid.iter_mut().zip(&simplex[i]) {
                *c += xi / dim as f64;
            }
        }

        let reflected = lerp(&centroid, &simplex[worst], -1.0);
        let fr = f(&reflected);
        if fr < values[best] {
            let expanded = lerp(&centroid, &simplex[worst], -2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            let contracted = lerp(&centroid, &simplex[worst], 0.5);
            let fc = f(&contracted);
            if fc < values[worst] {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                // Shrink toward the best vertex.
                let anchor = simplex[best].clone();
                for i in 0..=dim {
                    if i == best {
                        continue;
                    }
                    simplex[i] = lerp(&anchor, &simplex[i], 0.5);
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }

    let mut bi = 0;
    for i in 1..=dim {
        if values[i] < values[bi] {
            bi = i;
        }
    }
    (simplex[bi].clone(), values[bi])
}

/// Golden-section minimizer on a bracket; assumes one local minimum inside.
fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Fraenkel asymmetry of a convex polygon relative to regular `n_ref`-gons:
/// the infimum over rigid placements Q of `|P symdiff Q| / |P|`, where Q is a
/// regular `n_ref`-gon of area `|P|`.
///
/// Regular polygons have full dihedral symmetry, so minimizing over rotations
/// and translations already covers reflections. The value always lies in [0, 2].
pub fn fraenkel_asymmetry(poly: &Polygon, n_ref: usize) -> Result<f64> {
    if n_ref < 3 {
        return Err(Error::DomainError(format!("reference polygon needs n >= 3, got {n_ref}")));
    }
    if !poly.is_convex() {
        return Err(Error::Unsupported(
            "Fraenkel asymmetry is implemented for convex polygons".into(),
        ));
    }
    let area = poly.area();
    let reference = Polygon::regular_with_area(n_ref, area)?;
    let diam = poly.diameter();
    let c0 = poly.area_centroid();

    let objective = |cx: f64, cy: f64, theta: f64| -> f64 {
        let q = reference.rotated(theta).translated(Point::new(cx, cy));
        // Clipping cannot fail here: rigid motions preserve convexity.
        symmetric_difference_area(poly, &q).expect("convex inputs") / area
    };

    // The reference is invariant under rotation by 2 pi / n_ref. Every
    // rotation probe re-fits the translation: the best center moves with the
    // angle, so scanning at a fixed center can miss the global basin.
    let translate_fit = |theta: f64, iters: usize| -> f64 {
        let (_, v) = nelder_mead(
            |c| objective(c[0], c[1], theta),
            &[c0.x, c0.y],
            &[0.08 * diam, 0.08 * diam],
            iters,
            1e-10,
        );
        v
    };
    let period = 2.0 * PI / n_ref as f64;
    let coarse = 24usize;
    let mut best_theta = 0.0;
    let mut best_val = f64::INFINITY;
    for k in 0..coarse {
        let theta = period * k as f64 / coarse as f64;
        let v = translate_fit(theta, 80);
        if v < best_val {
            best_val = v;
            best_theta = theta;
        }
    }

    let half_window = period / coarse as f64;
    let (theta_ref, val_ref) = golden_section(
        |theta| translate_fit(theta, 160),
        best_theta - half_window,
        best_theta + half_window,
        32,
    );
    best_val = best_val.min(val_ref);

    // Joint polish over translation and rotation.
    let (_, val_polish) = nelder_mead(
        |v| objective(v[0], v[1], v[2]),
        &[c0.x, c0.y, theta_ref],
        &[0.02 * diam, 0.02 * diam, 0.1 * half_window],
        240,
        1e-11,
    );
    best_val = best_val.min(val_polish);

    Ok(best_val.clamp(0.0, 2.0))
}
