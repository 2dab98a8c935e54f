use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use essspec::cli::{run, EXIT_FAILED, EXIT_OK, EXIT_USAGE};
use essspec::config::{emit_config, load_config, parse_config_str, Config};
use essspec::presets::{diagonal_config, film_config, FILM_C0, FILM_DELTA, FILM_ETA};
use serde_json::Value;
use tempfile::TempDir;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn essspec(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("essspec").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn film_file(dir: &Path, perturbed: bool) -> PathBuf {
    write(dir, "film.json", &emit_config(&film_config(FILM_DELTA, FILM_ETA, FILM_C0, perturbed)))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_film_preset() {
    let dir = TempDir::new().unwrap();
    let cfg = film_file(dir.path(), false);
    let o = essspec(&["check", s(&cfg), "--json"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stdout);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["case"], "OFFDIAG");
    assert_eq!(v["kappa"], 4);
    assert_eq!(v["omega"]["holds"], true);
    let omega1 = 5.0 / (2.0 * FILM_DELTA);
    assert!((v["omega"]["omega1"].as_f64().unwrap() - omega1).abs() < 1e-6);
    assert!((v["omega"]["omega2"].as_f64().unwrap() - (FILM_C0 - 17.0 / 21.0).abs()).abs() < 1e-6);
    let bound = (9.0 * FILM_ETA * omega1 / FILM_DELTA).sqrt();
    assert!((v["omega"]["bound"].as_f64().unwrap() - bound).abs() < 1e-6);
    // constant coefficients: the stabilization metric vanishes identically
    for m in v["stabilization"]["metrics"].as_array().unwrap() {
        assert_eq!(m["metric"].as_f64().unwrap(), 0.0);
    }
    let a0 = v["pencil"]["A"][0][0].as_f64().unwrap();
    assert!((a0 - 2.5510204).abs() < 1e-7);

    let plain = essspec(&["check", s(&cfg)]);
    assert_eq!(plain.code, EXIT_OK);
    assert!(plain.stdout.starts_with("case OFFDIAG, kappa 4"));
}

#[test]
fn check_perturbed_film_stabilizes() {
    let dir = TempDir::new().unwrap();
    let cfg = film_file(dir.path(), true);
    let o = essspec(&["check", s(&cfg), "--json"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stdout);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["stabilization"]["nonincreasing"], true);
    let metrics: Vec<f64> = v["stabilization"]["metrics"].as_array().unwrap().iter().map(|m| m["metric"].as_f64().unwrap()).collect();
    assert!(metrics[0] > 0.0 && metrics[0] < 1e-9);
    assert_eq!(v["omega"]["holds"], true);
}

#[test]
fn check_flags_vanishing_leading_coefficient() {
    let dir = TempDir::new().unwrap();
    // leading coefficient tanh(x)^2, written as 1 + (tanh(x)^2 - 1)
    let cfg = write(
        dir.path(),
        "deg.json",
        r#"{"entries": {
            "a": [{"power": 2, "limit": "1", "perturbation": "tanh(x)^2 - 1"}, {"power": 0, "limit": "-1"}],
            "d": [{"power": 1, "limit": "1"}]
        }}"#,
    );
    let o = essspec(&["check", s(&cfg), "--json"]);
    assert_eq!(o.code, EXIT_FAILED);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert!(v["ellipticity"]["dn_margin"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["pass"], false);
    assert!(v["failures"][0].as_str().unwrap().starts_with("ellipticity"));
}

#[test]
fn load_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let q0 = write(
        dir.path(),
        "q0.json",
        r#"{"entries": {"a": [{"power": 2, "limit": "1"}], "d": [{"power": 0, "limit": "1"}]}}"#,
    );
    let o = essspec(&["check", s(&q0)]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("m≥q>0"), "{}", o.stderr);

    let tanh = write(
        dir.path(),
        "tanh.json",
        r#"{"entries": {"a": [{"power": 2, "limit": "1"}, {"power": 0, "limit": "0", "perturbation": "tanh(x)"}],
                        "d": [{"power": 1, "limit": "1"}]}}"#,
    );
    let o = essspec(&["check", s(&tanh)]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("decay check failed") && o.stderr.contains("/entries/a/1/perturbation"), "{}", o.stderr);

    let schema = write(dir.path(), "schema.json", r#"{"entries": {"a": [{"power": "two", "limit": "1"}], "d": []}}"#);
    let o = essspec(&["check", s(&schema)]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("/entries/a/0/power"), "{}", o.stderr);

    let syntax = write(
        dir.path(),
        "syntax.json",
        r#"{"entries": {"a": [{"power": 2, "limit": "1+*2"}], "d": [{"power": 1, "limit": "1"}]}}"#,
    );
    let o = essspec(&["check", s(&syntax)]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("/entries/a/0/limit") && o.stderr.contains("byte 2"), "{}", o.stderr);

    let o = essspec(&["check", s(&dir.path().join("missing.json"))]);
    assert_eq!(o.code, EXIT_USAGE);
}

#[test]
fn spectrum_outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = film_file(dir.path(), false);
    let mut outputs = Vec::new();
    for run_ix in 0..2 {
        let csv = dir.path().join(format!("s{run_ix}.csv"));
        let svg = dir.path().join(format!("s{run_ix}.svg"));
        let o = essspec(&["spectrum", s(&cfg), "--window=-3,0.2,-20,20", "--out-csv", s(&csv), "--out-svg", s(&svg)]);
        assert_eq!(o.code, EXIT_OK, "{}{}", o.stdout, o.stderr);
        outputs.push((fs::read(&csv).unwrap(), fs::read(&svg).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let csv = String::from_utf8(outputs[0].0.clone()).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "xi,branch,re_lambda,im_lambda,ok,near_sigma_d,near_sigma_a,in_lambda_set");
    assert_eq!(lines.count(), 2 * 2001);
    // the origin is on the curve at xi = 0
    assert!(csv.lines().any(|l| l.starts_with("0,") && l.contains(",0,0,1,1,0,0")), "origin row missing");
}

#[test]
fn spectrum_zoom_window() {
    let dir = TempDir::new().unwrap();
    let cfg = film_file(dir.path(), false);
    let csv = dir.path().join("zoom.csv");
    let svg = dir.path().join("zoom.svg");
    let o = essspec(&["spectrum", s(&cfg), "--window", "-0.2,0.1,-0.2,0.2", "--out-csv", s(&csv), "--out-svg", s(&svg)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let svg = fs::read_to_string(svg).unwrap();
    assert!(svg.contains("<polyline"));
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["window"]["re_min"], -0.2);
}

#[test]
fn spectrum_diagonal_preset() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "diag.json", &emit_config(&diagonal_config()));
    let csv = dir.path().join("d.csv");
    let o = essspec(&["spectrum", s(&cfg), "--out-csv", s(&csv), "--out-svg", s(&dir.path().join("d.svg"))]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["lambda_set"].as_array().unwrap().len(), 1);
    let text = fs::read_to_string(csv).unwrap();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (xi, re, im): (f64, f64, f64) = (f[0].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap());
        // every root lies on [0, inf) or on the imaginary axis
        let scale = 1e-12 * (1.0 + xi * xi);
        let on_real = im.abs() <= scale && (re - xi * xi).abs() <= scale;
        let on_imag = re.abs() <= scale && (im - xi).abs() <= scale;
        assert!(on_real || on_imag, "{line}");
    }
}

#[test]
fn spectrum_respects_failed_checks() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "deg.json",
        r#"{"entries": {
            "a": [{"power": 2, "limit": "1", "perturbation": "tanh(x)^2 - 1"}],
            "d": [{"power": 1, "limit": "1"}]
        }}"#,
    );
    let csv = dir.path().join("f.csv");
    let svg = dir.path().join("f.svg");
    let o = essspec(&["spectrum", s(&cfg), "--out-csv", s(&csv), "--out-svg", s(&svg)]);
    assert_eq!(o.code, EXIT_FAILED);
    assert!(!csv.exists());
    let o = essspec(&["spectrum", s(&cfg), "--force", "--out-csv", s(&csv), "--out-svg", s(&svg)]);
    assert_eq!(o.code, EXIT_OK);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("# forced: check failed: ellipticity"));
    assert!(fs::read_to_string(&svg).unwrap().contains("<!-- forced: check failed: ellipticity"));
}

#[test]
fn validate_constant_film() {
    let dir = TempDir::new().unwrap();
    let cfg = film_file(dir.path(), false);
    let eig_csv = dir.path().join("eig.csv");
    let o = essspec(&["validate", s(&cfg), "--L=3.14159265", "--M=16", "--out-csv", s(&eig_csv)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["matched_fraction"], 1.0);
    assert!(v["max_matched_distance"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 32);
    let rows = fs::read_to_string(eig_csv).unwrap();
    assert!(rows.starts_with("re,im\n"));
    assert_eq!(rows.lines().count(), 33);

    let o = essspec(&["validate", s(&cfg), "--M=10", "--L=2", "--scheme", "FD"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let o = essspec(&["validate", s(&cfg), "--M=7"]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("M=7"));
}

#[test]
fn film_command() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("film.json");
    let csv = dir.path().join("film.csv");
    let svg = dir.path().join("film.svg");
    let o = essspec(&["film", "--out-config", s(&cfg), "--out-csv", s(&csv), "--out-svg", s(&svg)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert!((v["pencil"]["A"][0][0].as_f64().unwrap() - 2.5510204).abs() < 1e-7);
    assert_eq!(v["omega"]["holds"], true);
    assert_eq!(v["lambda_set"].as_array().unwrap().len(), 0);
    // the written config loads back to the preset
    let loaded = load_config(&cfg).unwrap();
    assert_eq!(loaded, Config::from_file(film_config(FILM_DELTA, FILM_ETA, FILM_C0, false)).unwrap());

    let o = essspec(&["film", "--c0=1.0", "--out-config", s(&cfg), "--out-csv", s(&csv), "--out-svg", s(&svg)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["pencil"]["B"][1][0].as_f64().unwrap(), 0.0);

    let o = essspec(&["film", "--perturbed", "--out-config", s(&cfg), "--out-csv", s(&csv), "--out-svg", s(&svg)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(!load_config(&cfg).unwrap().operator.is_constant());

    let o = essspec(&["film", "--delta=-1", "--out-config", s(&cfg)]);
    assert_eq!(o.code, EXIT_USAGE);
    let o = essspec(&["film", "--eta=0", "--out-config", s(&cfg)]);
    assert_eq!(o.code, EXIT_USAGE);
}

#[test]
fn config_round_trip() {
    for file in [film_config(0.5, 0.2, 0.9, true), diagonal_config()] {
        let text = emit_config(&file);
        let back = parse_config_str(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(emit_config(&back), text);
        assert_eq!(Config::from_file(back).unwrap(), Config::from_file(file).unwrap());
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_essspec");
    let dir = TempDir::new().unwrap();
    let cfg = film_file(dir.path(), false);
    assert_eq!(Command::new(bin).args(["check", s(&cfg)]).status().unwrap().code(), Some(0));
    assert_eq!(Command::new(bin).args(["check", "no-such-file.json"]).output().unwrap().status.code(), Some(2));
    assert_eq!(Command::new(bin).args(["frobnicate"]).output().unwrap().status.code(), Some(2));
    assert_eq!(Command::new(bin).arg("--help").output().unwrap().status.code(), Some(0));
}
