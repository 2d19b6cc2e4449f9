//! Plot-ready CSV renderings of result objects. Every table documents its
//! columns in a leading comment and keeps row order stable, so downstream
//! plotting never has to guess.

use polyfreq_core::spectra::SeriesReconstruction;
use polyfreq_core::stability::{StabilityExperiment, ThinFamilyRow};
use polyfreq_core::symmetrize::{max_side_deviation, FlowTrace};

/// One row per polygon in the trace; `t_k` is the offset of the step that
/// produced row k (zero for the input row).
pub fn flow_csv(trace: &FlowTrace) -> String {
    let mut out = String::from("# columns: k,t_k,perimeter,area,max_side_dev\n");
    let iters = match trace.iterations_to_converge {
        Some(k) => k.to_string(),
        None => "none".to_string(),
    };
    out.push_str(&format!(
        "# converged: {}, iterations_to_converge: {}\n",
        trace.converged, iters
    ));
    for (k, poly) in trace.polygons.iter().enumerate() {
        let t_k = if k == 0 { 0.0 } else { trace.offsets[k - 1] };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            k,
            t_k,
            trace.perimeters[k],
            trace.areas[k],
            max_side_deviation(poly)
        ));
    }
    out
}

/// One row per family member, base length against deficit quotient.
pub fn thin_family_csv(rows: &[ThinFamilyRow]) -> String {
    let mut out = String::from("# columns: a,ratio\n");
    for r in rows {
        out.push_str(&format!("{},{}\n", r.a, r.ratio));
    }
    out
}

/// One row per series term, in flow order.
pub fn series_csv(series: &SeriesReconstruction) -> String {
    let mut out = String::from("# columns: k,alpha_k,beta_k,partial_sum\n");
    for k in 0..series.alpha_terms.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            k, series.alpha_terms[k], series.beta_terms[k], series.partial_sums[k]
        ));
    }
    out
}

/// One row per shear magnitude, in input order.
pub fn sharpness_csv(t_values: &[f64], fit: &StabilityExperiment) -> String {
    let mut out = String::from("# columns: t,asymmetry,delta_lambda\n");
    for (t, s) in t_values.iter().zip(&fit.samples) {
        out.push_str(&format!("{},{},{}\n", t, s.asymmetry, s.delta_lambda));
    }
    out
}

/// One row per scanned triangle, in input order; the ratio field is empty
/// for excluded (equilateral-deficit) samples.
pub fn scan_csv(scan: &StabilityExperiment) -> String {
    let mut out = String::from("# columns: index,delta_lambda,delta_perimeter,asymmetry,ratio\n");
    for (i, s) in scan.samples.iter().enumerate() {
        let ratio = s.ratio.map(|r| r.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            i, s.delta_lambda, s.delta_perimeter, s.asymmetry, ratio
        ));
    }
    out
}
