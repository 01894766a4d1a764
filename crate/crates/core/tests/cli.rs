//! The `ssf` binary end to end: outputs, determinism and exit codes.

use std::path::{Path, PathBuf};
use std::process::Command;

use spectral_shift::cli::compute::read_densities;
use tempfile::TempDir;

fn ssf(args: &[&str], out: &Path) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_ssf"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("ssf runs");
    status.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn scalar_pair(dir: &Path) -> (String, String) {
    let h0 = write(dir, "h0.json", r#"{"dim": 1, "re": [[0.0]]}"#);
    let v = write(dir, "v.json", r#"{"dim": 1, "re": [[1.0]]}"#);
    (h0.to_string_lossy().into_owned(), v.to_string_lossy().into_owned())
}

fn diagonal_pair(dir: &Path, n: usize) -> (String, String) {
    let row = |i: usize, f: &dyn Fn(usize, usize) -> f64| {
        let cells: Vec<String> = (0..n).map(|j| format!("{:?}", f(i, j))).collect();
        format!("[{}]", cells.join(","))
    };
    let matrix = |f: &dyn Fn(usize, usize) -> f64| {
        let rows: Vec<String> = (0..n).map(|i| row(i, f)).collect();
        format!(r#"{{"dim": {n}, "re": [{}]}}"#, rows.join(","))
    };
    let h0 = matrix(&|i, j| if i == j { i as f64 } else { 0.0 });
    let v = matrix(&|i, j| 1.0 / (1 + i + j) as f64);
    let h0 = write(dir, "h0.json", &h0);
    let v = write(dir, "v.json", &v);
    (h0.to_string_lossy().into_owned(), v.to_string_lossy().into_owned())
}

#[test]
fn scalar_pair_gives_the_textbook_densities() {
    let dir = TempDir::new().unwrap();
    let (h0, v) = scalar_pair(dir.path());
    let out = dir.path().join("out");
    assert_eq!(ssf(&["compute", "--order", "3", "--grid", "-0.5:1.5:9", "--h0", &h0, "--v", &v], &out), 0);
    for row in csv_rows(&out.join("samples.csv")) {
        let t = row[0];
        let inside = (0.0..1.0).contains(&t);
        let eta1 = if inside { 1.0 } else { 0.0 };
        let eta2 = if inside { 1.0 - t } else { 0.0 };
        let eta3 = if inside { (1.0 - t).powi(2) / 2.0 } else { 0.0 };
        for (got, want) in row[1..].iter().zip([eta1, eta2, eta3]) {
            assert!((got - want).abs() < 1e-14, "t = {t}: {got} vs {want}");
        }
    }
    for row in csv_rows(&out.join("masses.csv")) {
        assert!(row[3] < 1e-14, "order {}: {}", row[0], row[3]);
    }
}

#[test]
fn densities_json_reproduces_the_samples() {
    let dir = TempDir::new().unwrap();
    let (h0, v) = diagonal_pair(dir.path(), 4);
    let out = dir.path().join("out");
    assert_eq!(ssf(&["compute", "--order", "4", "--grid", "-2:5:41", "--h0", &h0, "--v", &v], &out), 0);
    let file = read_densities(&out.join("densities.json")).unwrap();
    assert_eq!(file.densities.len(), 4);
    for row in csv_rows(&out.join("samples.csv")) {
        for (eta, got) in file.densities.iter().zip(&row[1..]) {
            assert!((eta.density.evaluate(row[0]) - got).abs() <= 1e-12);
        }
    }
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = ["verify", "--random", "3", "3", "--orders", "1..3", "--seed", "11"];
    let codes = (ssf(&args, &a), ssf(&args, &b));
    assert_eq!(codes, (0, 0));
    let report = |d: &Path| std::fs::read(d.join("report.json")).unwrap();
    assert_eq!(report(&a), report(&b));

    let (h0, v) = diagonal_pair(dir.path(), 3);
    let args = ["compute", "--order", "3", "--grid", "-1:3:17", "--h0", &h0, "--v", &v];
    let (c, d) = (dir.path().join("c"), dir.path().join("d"));
    assert_eq!((ssf(&args, &c), ssf(&args, &d)), (0, 0));
    for name in ["densities.json", "samples.csv", "masses.csv"] {
        assert_eq!(std::fs::read(c.join(name)).unwrap(), std::fs::read(d.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn json_format_switches_the_tables() {
    let dir = TempDir::new().unwrap();
    let (h0, v) = scalar_pair(dir.path());
    let out = dir.path().join("out");
    assert_eq!(ssf(&["compute", "-p", "2", "--grid", "0:1:3", "--format", "json", "--h0", &h0, "--v", &v], &out), 0);
    let samples: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("samples.json")).unwrap()).unwrap();
    assert_eq!(samples["columns"], serde_json::json!(["t", "eta_1", "eta_2"]));
    assert_eq!(samples["rows"][1], serde_json::json!([0.5, 1.0, 0.5]));
    assert!(out.join("masses.json").exists());
}

#[test]
fn basic_spline_on_three_nodes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    assert_eq!(ssf(&["spline", "--nodes", "0,1,3", "--grid", "0:3:7"], &out), 0);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("spline.json")).unwrap()).unwrap();
    assert!((summary["integral"].as_f64().unwrap() - 0.5).abs() < 1e-15);
    // hat with peak 1/3 at t = 1
    for row in csv_rows(&out.join("spline_samples.csv")) {
        let t = row[0];
        let want = if t < 1.0 { t / 3.0 } else { (3.0 - t) / 6.0 };
        assert!((row[1] - want).abs() < 1e-15, "t = {t}");
    }
    assert_eq!(csv_rows(&out.join("spline_pieces.csv")).len(), 2);
}

#[test]
fn cumulative_kernel_on_two_nodes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    assert_eq!(ssf(&["spline", "--nodes", "0,1", "--kind", "cumulative", "--grid", "0:1:5"], &out), 0);
    let values: Vec<f64> = csv_rows(&out.join("spline_samples.csv")).iter().map(|r| r[1]).collect();
    assert_eq!(values, vec![1.0, 0.75, 0.5, 0.25, 0.0]);
}

#[test]
fn non_hermitian_input_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let h0 = write(dir.path(), "h0.json", r#"{"dim": 2, "re": [[0, 1], [0, 0]]}"#);
    let v = write(dir.path(), "v.json", r#"{"dim": 2, "re": [[1, 0], [0, 1]]}"#);
    let args = ["compute", "--order", "2", "--h0", h0.to_str().unwrap(), "--v", v.to_str().unwrap()];
    assert_eq!(ssf(&args, &dir.path().join("out")), 2);
}

#[test]
fn malformed_arguments_are_validation_errors() {
    let dir = TempDir::new().unwrap();
    let (h0, v) = scalar_pair(dir.path());
    let out = dir.path().join("out");
    assert_eq!(ssf(&["compute", "--order", "0", "--h0", &h0, "--v", &v], &out), 2);
    assert_eq!(ssf(&["compute", "--order", "2", "--grid", "1:0:5", "--h0", &h0, "--v", &v], &out), 2);
    assert_eq!(ssf(&["compute", "--order", "2", "--h0", &h0], &out), 2);
    assert_eq!(ssf(&["spline", "--nodes", "1,1"], &out), 2);
}

#[test]
fn mismatched_dimensions_are_rejected() {
    let dir = TempDir::new().unwrap();
    let h0 = write(dir.path(), "h0.json", r#"{"dim": 1, "re": [[0]]}"#);
    let v = write(dir.path(), "v.json", r#"{"dim": 2, "re": [[1, 0], [0, 1]]}"#);
    let args = ["compute", "--order", "2", "--h0", h0.to_str().unwrap(), "--v", v.to_str().unwrap()];
    assert_eq!(ssf(&args, &dir.path().join("out")), 2);
}

#[test]
fn oversized_orders_exceed_capacity() {
    let dir = TempDir::new().unwrap();
    let (h0, v) = diagonal_pair(dir.path(), 8);
    assert_eq!(ssf(&["compute", "--order", "9", "--h0", &h0, "--v", &v], &dir.path().join("out")), 4);
}

#[test]
fn impossible_tolerance_fails_the_check() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let args = ["verify", "--random", "2", "3", "--orders", "1..3", "--seed", "3", "--tol", "mass_identity=1e-300"];
    assert_eq!(ssf(&args, &out), 3);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["family"].as_str().unwrap())
        .collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|f| *f == "mass_identity"), "{failed:?}");
}
