use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use conformal_core::{shapes, TrigBoundary};
use serde_json::{json, Value};
use tempfile::TempDir;

fn conformap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conformap"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, config: Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn circle() -> Value {
    json!({"coeffs": [{"k": 1, "re": 1.0, "im": 0.0}]})
}

fn example3() -> Value {
    json!({"coeffs": [
        {"k": 1, "re": 1.0, "im": 0.0},
        {"k": -2, "re": 0.25, "im": 0.0},
        {"k": -3, "re": 0.0, "im": 0.125}
    ]})
}

fn write_samples(dir: &Path, name: &str, points: &[num_complex::Complex64]) -> PathBuf {
    let pairs: Vec<[f64; 2]> = points.iter().map(|p| [p.re, p.im]).collect();
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string(&json!({ "samples": pairs })).unwrap()).unwrap();
    path
}

#[test]
fn fit_boundary_recovers_circle_coefficient() {
    let dir = TempDir::new().unwrap();
    let pts: Vec<_> = (0..256).map(|j| TrigBoundary::unit_circle().eval(std::f64::consts::TAU * j as f64 / 256.0)).collect();
    write_samples(dir.path(), "circle.json", &pts);
    let o = conformap(dir.path(), &["fit-boundary", "--samples", "circle.json", "--m", "0", "--n", "1", "--out-dir", "fit"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let spec = read_json(dir.path().join("fit/boundary.json"));
    let coeffs = spec["coeffs"].as_array().unwrap();
    let d1 = coeffs.iter().find(|c| c["k"] == 1).unwrap();
    assert!((d1["re"].as_f64().unwrap() - 1.0).abs() < 1e-14);
    assert!(d1["im"].as_f64().unwrap().abs() < 1e-14);
    assert!(String::from_utf8_lossy(&o.stdout).contains("residual"));
}

#[test]
fn fit_boundary_on_semidisk_reports_residual_and_corners() {
    let dir = TempDir::new().unwrap();
    write_samples(dir.path(), "semi.json", &shapes::semidisk_samples(256));
    let o = conformap(dir.path(), &["fit-boundary", "--samples", "semi.json", "--m", "16", "--n", "16", "--out-dir", "fit"]);
    assert_eq!(code(&o), 0);
    let report = read_json(dir.path().join("fit/fit_report.json"));
    let residual = report["residual"].as_f64().unwrap();
    assert!(residual > 0.0 && residual < 0.05, "{residual}");
    assert_eq!(report["corners"].as_array().unwrap().len(), 2);
}

#[test]
fn fit_boundary_accepts_csv_samples() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("x,y\n");
    for p in shapes::semidisk_samples(128) {
        text.push_str(&format!("{},{}\n", p.re, p.im));
    }
    fs::write(dir.path().join("semi.csv"), text).unwrap();
    let o = conformap(dir.path(), &["fit-boundary", "--samples", "semi.csv", "--m", "8", "--n", "8", "--out-dir", "fit"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn too_few_samples_name_the_nyquist_bound() {
    let dir = TempDir::new().unwrap();
    write_samples(dir.path(), "few.json", &shapes::semidisk_samples(32));
    let o = conformap(dir.path(), &["fit-boundary", "--samples", "few.json", "--m", "16", "--n", "16"]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("2(m+n)+1") && err.contains("[boundary]"), "{err}");
}

#[test]
fn circle_solve_has_zero_coefficients_and_no_fold() {
    let dir = TempDir::new().unwrap();
    write_config(dir.path(), "c.json", json!({"boundary": circle(), "M": 8, "N": 256}));
    let o = conformap(dir.path(), &["solve", "--config", "c.json"]);
    assert_eq!(code(&o), 0);
    let sol = read_json(dir.path().join("out/solution.json"));
    assert_eq!(sol["M"], 8);
    for key in ["alpha", "beta"] {
        assert!(sol[key].as_array().unwrap().iter().all(|v| v.as_f64().unwrap().abs() <= 1e-12));
    }
    let report = read_json(dir.path().join("out/correction.json"));
    assert_eq!(report["status"], "no_fold");
    assert_eq!(report["monotonicity"]["strictly_increasing"], true);
}

#[test]
fn example3_solve_succeeds() {
    let dir = TempDir::new().unwrap();
    write_config(dir.path(), "e.json", json!({"boundary": example3(), "corners": "none"}));
    let o = conformap(dir.path(), &["solve", "--config", "e.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let sol = read_json(dir.path().join("out/solution.json"));
    assert_eq!(sol["M"], 64);
    assert!(sol["residual"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn order_above_quarter_grid_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    write_config(dir.path(), "c.json", json!({"boundary": circle(), "M": 100, "N": 256}));
    let o = conformap(dir.path(), &["solve", "--config", "c.json"]);
    assert_eq!(code(&o), 2);
    // the flag form as well
    write_config(dir.path(), "d.json", json!({"boundary": circle()}));
    let o = conformap(dir.path(), &["solve", "--config", "d.json", "--M", "65", "--N", "256"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_solution_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    write_config(dir.path(), "c.json", json!({"boundary": circle()}));
    let o = conformap(dir.path(), &["map", "--config", "c.json"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("run `solve` first"));
}

#[test]
fn circle_map_writes_identity_grid() {
    let dir = TempDir::new().unwrap();
    write_config(dir.path(), "c.json", json!({"boundary": circle(), "M": 8, "N": 256, "Nq": 512}));
    assert_eq!(code(&conformap(dir.path(), &["solve", "--config", "c.json"])), 0);
    let o = conformap(dir.path(), &["map", "--config", "c.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out/grid.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("re_zeta,im_zeta,re_f,im_f"));
    let mut rows = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[0] - v[2]).abs() <= 1e-10 && (v[1] - v[3]).abs() <= 1e-10, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 1 + 8 * 64);
    let report = read_json(dir.path().join("out/report.json"));
    assert_eq!(report["winding"], 1);
}

#[test]
fn rim_points_get_error_records() {
    let dir = TempDir::new().unwrap();
    write_config(
        dir.path(),
        "c.json",
        json!({"boundary": circle(), "M": 8, "N": 256, "map_grid": {"radii": 1, "angles": 4, "points": [[0.999, 0.0], [0.5, 0.5]]}}),
    );
    assert_eq!(code(&conformap(dir.path(), &["solve", "--config", "c.json"])), 0);
    let o = conformap(dir.path(), &["map", "--config", "c.json"]);
    assert_eq!(code(&o), 0);
    let errors = read_json(dir.path().join("out/map_errors.json"));
    let errors = errors.as_array().unwrap();
    assert_eq!(errors.len(), 1);
    assert_eq!(errors[0]["index"], 5);
    assert_eq!(errors[0]["re_zeta"], 0.999);
    assert!(errors[0]["error"].as_str().unwrap().contains("trusted"));
    let rows = fs::read_to_string(dir.path().join("out/grid.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 6);
}

#[test]
fn example3_level_lines_are_nested_closed_curves() {
    let dir = TempDir::new().unwrap();
    write_config(
        dir.path(),
        "e.json",
        json!({"boundary": example3(), "corners": "none",
               "level_lines": {"radii": [0.25, 0.5, 0.75, 0.99], "rays": 8, "points": 128}}),
    );
    assert_eq!(code(&conformap(dir.path(), &["solve", "--config", "e.json"])), 0);
    let o = conformap(dir.path(), &["map", "--config", "e.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out/level_lines.csv")).unwrap();
    let mut circles: Vec<Vec<num_complex::Complex64>> = vec![Vec::new(); 4];
    let mut rays = 0;
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let p = num_complex::Complex64::new(f[4].parse().unwrap(), f[5].parse().unwrap());
        match f[0] {
            "radius" => circles[f[1].parse::<usize>().unwrap()].push(p),
            "angle" => rays += 1,
            other => panic!("unknown family {other}"),
        }
    }
    assert_eq!(rays, 8 * 129);
    let mut previous = 0.0;
    for c in &circles {
        assert_eq!(c.len(), 129);
        assert!((c[0] - c[128]).norm() < 1e-12, "closed");
        let winding = conformal_core::polyline::ClosedPolyline::new(c[..128].to_vec())
            .winding_number(num_complex::Complex64::new(0.0, 0.0));
        assert_eq!(winding, 1);
        // each image circle encloses a larger mean radius than the last
        let mean: f64 = c.iter().map(|p| p.norm()).sum::<f64>() / c.len() as f64;
        assert!(mean > previous);
        previous = mean;
    }
}

#[test]
fn circle_verify_passes_every_check() {
    let dir = TempDir::new().unwrap();
    write_config(dir.path(), "c.json", json!({"boundary": circle(), "M": 8, "N": 256}));
    assert_eq!(code(&conformap(dir.path(), &["solve", "--config", "c.json"])), 0);
    let o = conformap(dir.path(), &["verify", "--config", "c.json"]);
    assert_eq!(code(&o), 0);
    let v = read_json(dir.path().join("out/verify.json"));
    assert_eq!(v["passed"], true);
    assert!(v["report"]["f0_abs"].as_f64().unwrap() <= 1e-12);
    assert!(v["report"]["cr_residual"].as_f64().unwrap() <= 1e-8);
    assert!(v["report"]["boundary_dev"].as_f64().unwrap() <= 5e-3 + 1e-10);
}

fn semidisk_setup(dir: &Path) {
    write_samples(dir, "semi.json", &shapes::semidisk_samples(256));
    let o = conformap(dir, &["fit-boundary", "--samples", "semi.json", "--m", "16", "--n", "16", "--out-dir", "fit"]);
    assert_eq!(code(&o), 0);
    write_config(dir, "s.json", json!({"boundary": {"file": "fit/boundary.json"}, "M": 16}));
}

#[test]
fn semidisk_without_correction_breaches_monotonicity() {
    let dir = TempDir::new().unwrap();
    semidisk_setup(dir.path());
    let o = conformap(dir.path(), &["solve", "--config", "s.json", "--no-correction"]);
    assert_eq!(code(&o), 4);
    let o = conformap(dir.path(), &["verify", "--config", "s.json", "--no-correction"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not monotone"));
}

#[test]
fn semidisk_with_correction_passes_monotonicity() {
    let dir = TempDir::new().unwrap();
    semidisk_setup(dir.path());
    assert_eq!(code(&conformap(dir.path(), &["solve", "--config", "s.json"])), 0);
    let report = read_json(dir.path().join("out/correction.json"));
    assert_eq!(report["status"], "corrected");
    for r in report["corners"].as_array().unwrap() {
        assert!(r["eps1"].as_f64().unwrap() > 0.0 && r["eps2"].as_f64().unwrap() > 0.0);
        assert_eq!(r["kind"], "cubic");
    }
    let o = conformap(dir.path(), &["verify", "--config", "s.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn per_corner_spline_kind_is_honoured() {
    let dir = TempDir::new().unwrap();
    semidisk_setup(dir.path());
    let fit = read_json(dir.path().join("fit/fit_report.json"));
    let corners: Vec<Value> = fit["corners"]
        .as_array()
        .unwrap()
        .iter()
        .zip(["linear", "cubic"])
        .map(|(c, kind)| json!({"t0": c["t0"], "lambda": c["lambda"], "spline": kind}))
        .collect();
    write_config(dir.path(), "p.json", json!({"boundary": {"file": "fit/boundary.json"}, "M": 16, "corners": corners}));
    assert_eq!(code(&conformap(dir.path(), &["solve", "--config", "p.json"])), 0);
    let report = read_json(dir.path().join("out/correction.json"));
    let kinds: Vec<&str> = report["corners"].as_array().unwrap().iter().map(|r| r["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["linear", "cubic"]);
}

#[test]
fn kernel_dump_writes_grids() {
    let dir = TempDir::new().unwrap();
    let ellipse = json!({"coeffs": [{"k": 1, "re": 1.0, "im": 0.0}, {"k": -1, "re": 0.3, "im": 0.0}]});
    write_config(dir.path(), "c.json", json!({"boundary": ellipse, "M": 8, "N": 64}));
    assert_eq!(code(&conformap(dir.path(), &["solve", "--config", "c.json", "--dump-kernel"])), 0);
    let k = fs::read_to_string(dir.path().join("out/kernel_k.csv")).unwrap();
    assert_eq!(k.lines().count(), 64);
    assert!(k.lines().all(|l| l.split(',').count() == 64));
    let p = fs::read_to_string(dir.path().join("out/kernel_p.csv")).unwrap();
    assert_eq!(p.lines().count(), 1 + 64);
}

#[test]
fn runs_are_bit_for_bit_reproducible() {
    let dir = TempDir::new().unwrap();
    semidisk_setup(dir.path());
    let mut outputs = Vec::new();
    for out in ["a", "b"] {
        for cmd in ["solve", "map"] {
            let o = conformap(dir.path(), &[cmd, "--config", "s.json", "--out-dir", out]);
            assert_eq!(code(&o), 0);
        }
        let files: Vec<Vec<u8>> = ["solution.json", "correction.json", "grid.csv", "level_lines.csv", "report.json"]
            .iter()
            .map(|f| fs::read(dir.path().join(out).join(f)).unwrap())
            .collect();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
}
