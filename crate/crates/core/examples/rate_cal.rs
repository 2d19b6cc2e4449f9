//! Scratch probe: per-term series positivity with both derivatives at t = 0,
//! plus per-sample sums, for the acceptance calibration.

use polyfreq_core::fem::{solve_lambda1, triangulate_with, TriangulateOptions};
use polyfreq_core::manifold::sample_near_regular;
use polyfreq_core::shape_derivatives::{d2lambda_dt2, dlambda_dt};
use polyfreq_core::symmetrize::{run_flow, SymmetrizationFrame};

fn main() {
    let opts = TriangulateOptions { grade_vertices: true };
    for n in [12usize, 24] {
        let batch = sample_near_regular(n, 0.03, 2.0, 1, 3).unwrap();
        for (s, poly) in batch.polygons.iter().enumerate() {
            let start = std::time::Instant::now();
            let trace = run_flow(poly, 6000, 1e-5).unwrap();
            let mut neg = 0usize;
            let mut total = 0usize;
            let mut worst = f64::INFINITY;
            let mut sum = 0.0;
            for j in 0..trace.polygons.len() - 1 {
                let frame =
                    SymmetrizationFrame::from_polygon(&trace.polygons[j], trace.window_indices[j])
                        .unwrap();
                let t = frame.t_star;
                if t == 0.0 {
                    continue;
                }
                let symmetric = frame.offset_polygon(&trace.polygons[j], 0.0).unwrap();
                let sol0 = solve_lambda1(triangulate_with(&symmetric, 2, opts).unwrap()).unwrap();
                let alpha = dlambda_dt(&sol0, &frame).unwrap();
                let beta = d2lambda_dt2(&sol0, &frame, 0.0).unwrap();
                let term = alpha * t + beta * t * t / 7.0;
                total += 1;
                if term < 0.0 {
                    neg += 1;
                }
                if term < worst {
                    worst = term;
                }
                sum += term;
            }
            println!(
                "n {n} sample {s}: flow_iters {} steps {total} neg {neg} worst {worst:.3e} sum {sum:.6e} time {:?}",
                trace.polygons.len() - 1,
                start.elapsed()
            );
        }
    }
}
