//! Manifold contract tests: Jacobian kernels against an independent
//! elimination-based rank oracle, an entry-by-entry hand transcription at
//! n = 5, and the near-regular sampler contract.

use polyfreq_core::geometry::{to_manifold, validate_manifold, MANIFOLD_ANGLE_TOL, MANIFOLD_AREA_TOL};
use polyfreq_core::manifold::{
    convexity_safe_radius, dpsi_at_regular, dpsi_matrix, dq_at_regular, dq_matrix,
    sample_near_regular,
};
use std::f64::consts::PI;

/// Independent rank computation: Gaussian elimination with partial pivoting,
/// counting pivots above a fixed relative tolerance. No SVD involved.
fn elimination_rank(matrix: &[Vec<f64>], rel_tol: f64) -> usize {
    let rows = matrix.len();
    let cols = matrix[0].len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let scale = a
        .iter()
        .flat_map(|r| r.iter().map(|v| v.abs()))
        .fold(0.0f64, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let tol = rel_tol * scale;
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let (pivot_row, pivot_val) = (row..rows)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if pivot_val <= tol {
            continue;
        }
        a.swap(row, pivot_row);
        for r in (row + 1)..rows {
            let f = a[r][col] / a[row][col];
            for c in col..cols {
                a[r][c] -= f * a[row][c];
            }
        }
        rank += 1;
        row += 1;
    }
    rank
}

#[test]
fn dq_kernel_dimensions_match_elimination_oracle() {
    for n in 3..=32usize {
        let m = dq_matrix(n).unwrap();
        let report = dq_at_regular(n).unwrap();
        assert_eq!(report.matrix_rows, 4);
        assert_eq!(report.matrix_cols, 2 * n);
        assert_eq!(report.nullity, 2 * n - 4, "n = {n}");
        let oracle_rank = elimination_rank(&m, 1e-10);
        assert_eq!(2 * n - oracle_rank, report.nullity, "n = {n}: oracle disagrees");
        // Singular values are reported in descending order.
        for w in report.singular_values.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }
}

#[test]
fn dpsi_kernel_dimensions_match_elimination_oracle() {
    for n in 4..=32usize {
        let m = dpsi_matrix(n).unwrap();
        let report = dpsi_at_regular(n).unwrap();
        assert_eq!(report.matrix_rows, n + 4);
        assert_eq!(report.matrix_cols, 2 * n + 1);
        assert_eq!(report.nullity, n - 3, "n = {n}");
        let oracle_rank = elimination_rank(&m, 1e-10);
        assert_eq!(2 * n + 1 - oracle_rank, report.nullity, "n = {n}: oracle disagrees");
    }
}

#[test]
fn dpsi_n3_report_is_informational() {
    // The n = 3 equilateral constraints are degenerate; the report must still
    // come back with consistent dimensions, whatever the nullity.
    let report = dpsi_at_regular(3).unwrap();
    assert_eq!(report.matrix_rows, 7);
    assert_eq!(report.matrix_cols, 7);
    assert_eq!(report.singular_values.len(), 7);
    assert!(report.nullity <= 7);
}

#[test]
fn named_kernel_dimensions() {
    assert_eq!(dq_at_regular(5).unwrap().nullity, 6);
    assert_eq!(dq_at_regular(3).unwrap().nullity, 2);
    assert_eq!(dq_at_regular(12).unwrap().nullity, 20);
    assert_eq!(dpsi_at_regular(7).unwrap().nullity, 4);
    assert_eq!(dpsi_at_regular(4).unwrap().nullity, 1);
    assert_eq!(dpsi_at_regular(10).unwrap().nullity, 7);
}

#[test]
fn dq_n5_matches_hand_transcription() {
    // Every entry written out by hand for n = 5, with s = 2 pi / 5. Tail sums
    // spelled literally; the first column of the last row carries the
    // displayed unit entry (the literal derivative there would be sin 0 = 0).
    let s = 2.0 * PI / 5.0;
    let (s1, s2, s3, s4) = ((s).sin(), (2.0 * s).sin(), (3.0 * s).sin(), (4.0 * s).sin());
    let (c1, c2, c3, c4) = ((s).cos(), (2.0 * s).cos(), (3.0 * s).cos(), (4.0 * s).cos());
    let hand: [[f64; 10]; 4] = [
        [1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [c1, c1, c1, c1, c1, 2.0 * s1, 2.0 * s1, 2.0 * s1, 2.0 * s1, 2.0 * s1],
        [
            -(s1 + s2 + s3 + s4),
            -(s2 + s3 + s4),
            -(s3 + s4),
            -s4,
            0.0,
            1.0,
            c1,
            c2,
            c3,
            c4,
        ],
        [
            c1 + c2 + c3 + c4,
            c2 + c3 + c4,
            c3 + c4,
            c4,
            0.0,
            1.0,
            s1,
            s2,
            s3,
            s4,
        ],
    ];
    let m = dq_matrix(5).unwrap();
    for (i, row) in hand.iter().enumerate() {
        for (j, &expect) in row.iter().enumerate() {
            assert!(
                (m[i][j] - expect).abs() < 1e-14,
                "entry ({i}, {j}): {} vs hand {expect}",
                m[i][j]
            );
        }
    }
}

#[test]
fn sampler_is_deterministic_and_on_manifold() {
    let a = sample_near_regular(7, 0.05, 2.0, 99, 10).unwrap();
    let b = sample_near_regular(7, 0.05, 2.0, 99, 10).unwrap();
    assert_eq!(a.polygons.len(), 10);
    for (p, q) in a.polygons.iter().zip(&b.polygons) {
        assert_eq!(p, q, "same seed must reproduce identical polygons");
    }
    assert!(!a.convexity_warning);
    let reference = polyfreq_core::Polygon::regular_with_area(7, 2.0).unwrap();
    for p in &a.polygons {
        assert_eq!(p.len(), 7);
        assert!(p.is_convex());
        assert!((p.area() - 2.0).abs() <= 1e-12 * 2.0, "area {}", p.area());
        for (v, r) in p.vertices().iter().zip(reference.vertices()) {
            assert!(v.dist(*r) <= 0.05, "vertex strayed {}", v.dist(*r));
        }
        let m = to_manifold(p).unwrap();
        let check = validate_manifold(&m, MANIFOLD_ANGLE_TOL, MANIFOLD_AREA_TOL).unwrap();
        assert!(check.ok, "residuals {} {} {}", check.angle_residual, check.area_residual, check.centroid_residual);
    }

    let c = sample_near_regular(7, 0.05, 2.0, 100, 3).unwrap();
    assert_ne!(a.polygons[0], c.polygons[0], "different seeds must differ");
}

#[test]
fn sampler_radius_zero_returns_regular_copies() {
    let batch = sample_near_regular(6, 0.0, 1.5, 7, 4).unwrap();
    let reference = polyfreq_core::Polygon::regular_with_area(6, 1.5).unwrap();
    for p in &batch.polygons {
        for (v, r) in p.vertices().iter().zip(reference.vertices()) {
            assert!(v.dist(*r) < 1e-14);
        }
    }
}

#[test]
fn sampler_warns_past_safe_radius_but_filters_to_convex() {
    let safe = convexity_safe_radius(4, 1.0).unwrap();
    assert!((safe - 0.25).abs() < 1e-12, "unit square side 1, quarter = 0.25");
    let batch = sample_near_regular(4, 0.4, 1.0, 3, 25).unwrap();
    assert!(batch.convexity_warning);
    assert!(batch.attempts >= 25);
    for p in &batch.polygons {
        assert!(p.is_convex());
        assert!((p.area() - 1.0).abs() <= 1e-12);
    }
}
