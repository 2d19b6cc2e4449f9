//! End-to-end runs of the binary: output formats, exit codes, manifests,
//! and byte-level reproducibility.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use polyfreq_core::geometry::{Point, Polygon};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyfreq"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_polygon(path: &Path, vertices: &[(f64, f64)]) {
    let poly = Polygon::new(vertices.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap();
    fs::write(path, serde_json::to_string(&poly).unwrap()).unwrap();
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn eig_reports_the_square_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    write_polygon(&dir.path().join("sq.json"), &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
    let out = run(dir.path(), &["eig", "--polygon", "sq.json", "--refine", "5"]);
    let v = stdout_json(&out);
    let lambda = v["lambda1"].as_f64().unwrap();
    let exact = 2.0 * PI * PI;
    assert!((lambda - exact).abs() / exact < 5e-3, "lambda {lambda}");
    assert!(v["ndof"].as_u64().unwrap() > 0);
    assert!(v["residual"].as_f64().unwrap() < 1e-6);
    let order = v["order_estimate"].as_f64().unwrap();
    assert!((order - 2.0).abs() < 0.5, "order {order}");
}

#[test]
fn flow_writes_trace_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    write_polygon(&dir.path().join("tri.json"), &[(0.0, 0.0), (1.3, 0.0), (0.4, 0.9)]);
    let out = run(dir.path(), &["flow", "--polygon", "tri.json", "--trace", "t.csv"]);
    let v = stdout_json(&out);
    assert_eq!(v["converged"], serde_json::Value::Bool(true));

    let csv = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "# columns: k,t_k,perimeter,area,max_side_dev");
    assert!(lines.next().unwrap().starts_with("# converged: true"));
    let perimeters: Vec<f64> = lines
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(perimeters.len() > 2);
    for pair in perimeters.windows(2) {
        assert!(pair[1] <= pair[0] * (1.0 + 1e-12), "perimeter grew: {pair:?}");
    }

    let man: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("t.csv.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(man["command"], "flow");
    assert!(man["input_hashes"]["tri.json"].as_str().unwrap().len() == 64);
    assert_eq!(man["output_paths"][0], "t.csv");
}

#[test]
fn missing_input_exits_one_and_unknown_flag_exits_sixty_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["eig", "--polygon", "missing.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let out = run(dir.path(), &["eig", "--polygon", "x.json", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write_polygon(&dir.path().join("sq.json"), &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
    let args = ["eig", "--polygon", "sq.json", "--refine", "3", "--json", "e.json"];
    assert_eq!(run(dir.path(), &args).status.code(), Some(0));
    let first = fs::read(dir.path().join("e.json")).unwrap();
    let first_man = fs::read(dir.path().join("e.json.manifest.json")).unwrap();
    assert_eq!(run(dir.path(), &args).status.code(), Some(0));
    assert_eq!(first, fs::read(dir.path().join("e.json")).unwrap());
    assert_eq!(first_man, fs::read(dir.path().join("e.json.manifest.json")).unwrap());
}

#[test]
fn seed_env_overrides_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["sample", "--n", "7", "--radius", "0.03", "--count", "5"];
    let mut args = base.to_vec();
    args.extend(["--seed", "11", "--out", "a.jsonl"]);
    assert_eq!(run(dir.path(), &args).status.code(), Some(0));

    let mut args = base.to_vec();
    args.extend(["--seed", "7", "--out", "b.jsonl"]);
    let out = Command::new(env!("CARGO_BIN_EXE_polyfreq"))
        .current_dir(dir.path())
        .env("POLYFREQ_SEED", "11")
        .args(&args)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));

    let a = fs::read(dir.path().join("a.jsonl")).unwrap();
    let b = fs::read(dir.path().join("b.jsonl")).unwrap();
    assert_eq!(a, b, "same effective seed must reproduce the batch");
    let man: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("b.jsonl.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(man["seed"], 11, "manifest records the seed actually used");
    assert_eq!(man["parameters"]["seed"], 11);
}

#[test]
fn sampled_triangles_feed_the_scan() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["sample", "--n", "3", "--radius", "0.05", "--count", "3", "--out", "tris.jsonl"],
    );
    assert_eq!(out.status.code(), Some(0));
    let out = run(
        dir.path(),
        &[
            "stability", "--family", "triangle-scan", "--polygons", "tris.jsonl", "--refine",
            "3", "--json", "scan.json", "--csv", "scan.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("scan.json")).unwrap()).unwrap();
    assert_eq!(v["family"], "triangle-scan");
    assert_eq!(v["samples"].as_array().unwrap().len(), 3);
    let csv = fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    assert!(csv.starts_with("# columns: index,delta_lambda,delta_perimeter,asymmetry,ratio"));
}

#[test]
fn series_csv_documents_its_columns() {
    let dir = tempfile::tempdir().unwrap();
    write_polygon(&dir.path().join("tri.json"), &[(0.0, 0.0), (1.3, 0.0), (0.4, 0.9)]);
    let out = run(
        dir.path(),
        &["series", "--polygon", "tri.json", "--terms", "3", "--refine", "2", "--csv", "s.csv"],
    );
    let v = stdout_json(&out);
    assert_eq!(v["alpha_terms"].as_array().unwrap().len(), 3);
    let csv = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "# columns: k,alpha_k,beta_k,partial_sum");
    assert_eq!(lines.count(), 3);
}

#[test]
fn bubble_reports_equilibrium_and_guards_suction() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["bubble", "--psi", "1", "--sigma", "1", "--n", "12", "--refine", "3"],
    );
    let v = stdout_json(&out);
    assert!(v["a"].as_f64().unwrap() > 0.0);
    assert!(v["residual"].as_f64().unwrap().abs() < 1e-10);
    assert!(v["energy_at_a"].as_f64().unwrap() > 0.0);

    let out = run(
        dir.path(),
        &["bubble", "--psi", "1", "--sigma", "1", "--pressure", "-0.2", "--n", "12", "--refine", "3"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn manifold_kernels_match_the_expected_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["manifold", "--n", "9", "--check-kernels"]);
    let v = stdout_json(&out);
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["nullity"], 2 * 9 - 4);
    assert_eq!(reports[1]["nullity"], 9 - 3);
}

#[test]
fn thin_family_csv_pairs_base_with_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["stability", "--family", "thin-isosceles", "--a", "5,10", "--refine", "3", "--csv", "f.csv"],
    );
    let v = stdout_json(&out);
    assert_eq!(v.as_array().unwrap().len(), 2);
    let csv = fs::read_to_string(dir.path().join("f.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "# columns: a,ratio");
    let first = lines.next().unwrap();
    assert!(first.starts_with("5,0.7"), "row {first}");
}
