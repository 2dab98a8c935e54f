//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use essspec::cli::{run, run_spectrum, EXIT_OK};
use essspec::config::{emit_config, Config};
use essspec::ellipticity::{check_dn_ellipticity, check_entrywise, SampleGrid};
use essspec::numerics::{eigenvalues, match_distance, poly_roots_companion, quadratic_roots, Matrix};
use essspec::presets::{diagonal_config, film_config, FILM_C0, FILM_DELTA, FILM_ETA};
use essspec::schur::{
    build_pencil, default_probe, limiting_schur_symbol, pencil_by_interpolation, stabilization_metric, Complement,
};
use essspec::spectrum::{Window, DEFAULT_XI_POINTS};
use essspec::symbols::{CoeffFn, DiffSymbol, OperatorMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const DELTA: f64 = FILM_DELTA;
const ETA: f64 = FILM_ETA;
const C0: f64 = FILM_C0;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64, what: &str) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || format!("{what} took {:.2} s (limit {limit_s} s)", elapsed.as_secs_f64()))
}

struct Cli {
    code: i32,
    stdout: String,
    stderr: String,
}

fn essspec(args: &[&str]) -> Cli {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("essspec").chain(args.iter().copied()), &mut out, &mut err);
    Cli { code, stdout: String::from_utf8_lossy(&out).into_owned(), stderr: String::from_utf8_lossy(&err).into_owned() }
}

fn write_film(dir: &Path, perturbed: bool) -> PathBuf {
    let path = dir.join(if perturbed { "film_perturbed.json" } else { "film.json" });
    fs::write(&path, emit_config(&film_config(DELTA, ETA, C0, perturbed))).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Film pencil coefficients in powers of `i xi`, written out from the
/// closed-form alpha and beta.
fn alpha_beta() -> (Vec<Complex64>, Vec<Complex64>) {
    let k = 9.0 * ETA / (2.0 * DELTA);
    let alpha = vec![5.0 / (2.0 * DELTA), -(2.0 * C0 - 17.0 / 21.0), -k];
    let beta = vec![
        0.0,
        5.0 / (2.0 * DELTA) * (1.0 - C0),
        1.0 / 7.0 + C0 * (C0 - 17.0 / 21.0),
        k * (C0 - 4.0 / 9.0),
        5.0 / (6.0 * DELTA),
    ];
    (alpha.into_iter().map(|v| c(v, 0.0)).collect(), beta.into_iter().map(|v| c(v, 0.0)).collect())
}

fn horner(p: &[Complex64], s: Complex64) -> Complex64 {
    p.iter().rev().fold(c(0.0, 0.0), |acc, &k| acc * s + k)
}

/// Roots of `lambda^2 + alpha lambda + beta` from the closed forms.
fn film_roots(xi: f64) -> [Complex64; 2] {
    let (alpha, beta) = alpha_beta();
    let s = c(0.0, xi);
    let a = horner(&alpha, s);
    let b = horner(&beta, s);
    let disc = (a * a - 4.0 * b).sqrt();
    [(-a + disc) / 2.0, (-a - disc) / 2.0]
}

fn json(text: &str) -> Result<Value, String> {
    serde_json::from_str(text).map_err(|e| format!("bad JSON output: {e}"))
}

fn pairs(v: &Value) -> Vec<Complex64> {
    v.as_array()
        .map(|a| a.iter().map(|p| c(p[0].as_f64().unwrap_or(f64::NAN), p[1].as_f64().unwrap_or(f64::NAN))).collect())
        .unwrap_or_default()
}

fn film_gate() -> Outcome {
    let dir = TempDir::new().unwrap();
    let cfg = write_film(dir.path(), false);
    let t0 = Instant::now();
    let o = essspec(&["check", s(&cfg), "--json"]);
    let elapsed = t0.elapsed();
    ensure(o.code == EXIT_OK, || format!("check exited {}: {}{}", o.code, o.stdout, o.stderr))?;
    let v = json(&o.stdout)?;
    ensure(v["case"] == "OFFDIAG", || format!("case {}", v["case"]))?;
    ensure(v["kappa"] == 4, || format!("kappa {}", v["kappa"]))?;
    ensure(v["omega"]["holds"] == true, || "omega condition does not hold".into())?;
    let omega1 = 5.0 / (2.0 * DELTA);
    let omega2 = (C0 - 17.0 / 21.0).abs();
    let bound = (9.0 * ETA * omega1 / DELTA).sqrt();
    for (key, want) in [("omega1", omega1), ("omega2", omega2), ("bound", bound)] {
        let got = v["omega"][key].as_f64().unwrap_or(f64::NAN);
        ensure((got - want).abs() <= 1e-6, || format!("{key} = {got}, expected {want}"))?;
    }
    within(elapsed, 5.0, "check")?;
    Ok(format!("omega1={omega1:.7} omega2={omega2:.7} bound={bound:.7}"))
}

fn pencil_anchors() -> Outcome {
    let dir = TempDir::new().unwrap();
    let cfg = write_film(dir.path(), false);
    let o = essspec(&["check", s(&cfg), "--json"]);
    let v = json(&o.stdout)?;
    let (alpha, beta) = alpha_beta();
    let mut worst: f64 = 0.0;
    for (name, got, want) in [("A", pairs(&v["pencil"]["A"]), alpha), ("B", pairs(&v["pencil"]["B"]), beta)] {
        ensure(got.len() == want.len(), || format!("{name} has {} coefficients, expected {}", got.len(), want.len()))?;
        let scale = want.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (k, (g, w)) in got.iter().zip(&want).enumerate() {
            let err = (g - w).norm() / w.norm().max(1e-300);
            let ok = if w.norm() == 0.0 { g.norm() <= 1e-10 * scale } else { err <= 1e-10 };
            ensure(ok, || format!("{name}[{k}] = {g}, expected {w}"))?;
            if w.norm() > 0.0 {
                worst = worst.max(err);
            }
        }
    }
    let cfg = Config::from_file(film_config(DELTA, ETA, C0, false)).unwrap();
    let sp = run_spectrum(&cfg, Window::default(), DEFAULT_XI_POINTS, None);
    let origin = sp.curve.samples.iter().find(|s| s.xi == 0.0).ok_or("no sample at xi = 0")?;
    let expected = [c(0.0, 0.0), c(-5.0 / (2.0 * DELTA), 0.0)];
    let d = match_distance(&origin.roots, &expected).unwrap();
    ensure(d <= 1e-10, || format!("roots at xi=0 {:?}, distance {d:e}", origin.roots))?;
    Ok(format!("max relative coefficient error {worst:.1e}, xi=0 roots off by {d:.1e}"))
}

fn exceptional_set() -> Outcome {
    let film = Config::from_file(film_config(DELTA, ETA, C0, false)).unwrap();
    let sp = run_spectrum(&film, Window::default(), DEFAULT_XI_POINTS, None);
    ensure(sp.exceptional.lambda_set.is_empty(), || format!("film Lambda = {:?}", sp.exceptional.lambda_set))?;
    let diag = Config::from_file(diagonal_config()).unwrap();
    let sp = run_spectrum(&diag, Window::default(), DEFAULT_XI_POINTS, None);
    let set = &sp.exceptional.lambda_set;
    ensure(set.len() == 1, || format!("diagonal Lambda has {} points: {set:?}", set.len()))?;
    ensure(set[0].lambda.norm() <= 1e-8, || format!("diagonal Lambda point {}", set[0].lambda))?;
    Ok(format!("film empty, diagonal {{{:.1e}}}", set[0].lambda.norm()))
}

fn validate_constant(m: usize, tol: f64, limit_s: f64) -> Result<String, String> {
    let dir = TempDir::new().unwrap();
    let cfg = write_film(dir.path(), false);
    let l = std::f64::consts::PI.to_string();
    let m_arg = m.to_string();
    let t0 = Instant::now();
    let o = essspec(&["validate", s(&cfg), "--scheme", "FOURIER", "--L", &l, "--M", &m_arg]);
    let elapsed = t0.elapsed();
    ensure(o.code == EXIT_OK, || format!("validate exited {}: {}", o.code, o.stderr))?;
    let v = json(&o.stdout)?;
    let eigs = pairs(&v["eigenvalues"]);
    ensure(eigs.len() == 2 * m, || format!("{} eigenvalues, expected {}", eigs.len(), 2 * m))?;
    // with L = pi the Fourier frequencies are the integers
    let roots: Vec<Complex64> = (-(m as i64) / 2..m as i64 / 2).flat_map(|k| film_roots(k as f64)).collect();
    let mut worst: f64 = 0.0;
    for e in &eigs {
        let d = roots.iter().map(|r| (r - e).norm()).fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    ensure(worst <= tol, || format!("eigenvalue off the integer-frequency roots by {worst:e}"))?;
    let fraction = v["matched_fraction"].as_f64().unwrap_or(f64::NAN);
    ensure(fraction == 1.0, || format!("matched_fraction {fraction}"))?;
    within(elapsed, limit_s, &format!("M={m}"))?;
    Ok(format!("M={m}: max distance {worst:.1e}, {:.2} s", elapsed.as_secs_f64()))
}

fn discretization_oracle() -> Outcome {
    let a = validate_constant(16, 1e-8, 5.0)?;
    let b = validate_constant(128, 1e-7, 60.0)?;
    Ok(format!("{a}; {b}"))
}

fn random_symbol(rng: &mut ChaCha8Rng, order: usize, degenerate: bool) -> DiffSymbol {
    let mut coeffs: Vec<CoeffFn> =
        (0..order).map(|_| CoeffFn::constant(c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))).collect();
    // a literally zero leading coefficient would lower the order, so a
    // degenerate entry gets one far below every margin instead
    let modulus = if degenerate { 1e-14 } else { 10f64.powf(rng.random_range(-1.0..1.0)) };
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    coeffs.push(CoeffFn::constant(Complex64::from_polar(modulus, phase)));
    DiffSymbol::new(coeffs).unwrap()
}

fn ellipticity_equivalence() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let grid = SampleGrid::new(1.0, 3, 1.0, 1e3, 200).unwrap();
    let (mut systems, mut passes, mut degenerate) = (0, 0, 0);
    while systems < 250 {
        let q = rng.random_range(1..=4usize);
        let m = rng.random_range(q..=4usize);
        let n = rng.random_range(1..=4usize);
        let p = rng.random_range(1..=4usize);
        if m + q == n + p {
            continue;
        }
        let mut bad = [false; 4];
        if rng.random_bool(0.1) {
            bad[rng.random_range(0..4)] = true;
            degenerate += 1;
        }
        let t = OperatorMatrix::new(
            random_symbol(&mut rng, m, bad[0]),
            random_symbol(&mut rng, n, bad[1]),
            random_symbol(&mut rng, p, bad[2]),
            random_symbol(&mut rng, q, bad[3]),
        )
        .unwrap();
        let dn = check_dn_ellipticity(&t, &grid, 1e-8).map_err(|e| e.to_string())?;
        let entry = check_entrywise(&t, &grid, 1e-8).map_err(|e| e.to_string())?;
        ensure(dn.dn_ok == entry.pass, || {
            format!("orders ({m},{n},{p},{q}): determinant says {}, entries say {} ({dn:?})", dn.dn_ok, entry.pass)
        })?;
        passes += usize::from(dn.dn_ok);
        systems += 1;
    }
    ensure(passes < systems, || "no failing instance was generated".into())?;
    within(t0.elapsed(), 30.0, "suite")?;
    Ok(format!("{systems} systems agree ({passes} elliptic, {degenerate} degenerate)"))
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Matrix<f64> {
    let mut a = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    a
}

/// Householder reflector `I - 2 v v^* / (v^* v)`.
fn reflector(rng: &mut ChaCha8Rng, n: usize) -> Matrix<f64> {
    let v: Vec<Complex64> = (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let mut h = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] -= v[i] * v[j].conj() * (2.0 / vv);
        }
    }
    h
}

fn eigensolver() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut report = Vec::new();
    for n in [8, 32, 64] {
        let diag: Vec<Complex64> = (0..n).map(|_| c(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0))).collect();
        let mut t = Matrix::from_diag(&diag);
        let off = 0.2 / (n as f64).sqrt();
        for i in 0..n {
            for j in i + 1..n {
                t[(i, j)] = c(rng.random_range(-off..off), rng.random_range(-off..off));
            }
        }
        let mut q = Matrix::identity(n);
        for _ in 0..3 {
            q = &q * &reflector(&mut rng, n);
        }
        let a = &(&q * &t) * &q.conj_transpose();
        let r = eigenvalues(&a).map_err(|e| e.to_string())?;
        ensure(r.converged, || format!("n={n}: QR did not converge"))?;
        let d = match_distance(&r.eigenvalues, &diag).unwrap();
        ensure(d <= 1e-8, || format!("n={n}: spectrum recovered to {d:e}"))?;

        let b = random_matrix(&mut rng, n);
        let eig = eigenvalues(&b).map_err(|e| e.to_string())?.eigenvalues;
        let sum: Complex64 = eig.iter().sum();
        let scale: f64 = eig.iter().map(|z| z.norm()).sum();
        let rel = (sum - b.trace()).norm() / scale;
        ensure(rel <= 1e-10, || format!("n={n}: trace identity off by {rel:e}"))?;
        report.push(format!("n={n} {d:.0e}"));
    }
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let mut coef = || c(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let (a, b, cc) = (coef(), coef(), coef());
        let closed = quadratic_roots(a, b, cc);
        let companion = poly_roots_companion(&[a, b, cc]).map_err(|e| e.to_string())?;
        let scale = closed.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let d = match_distance(&closed, &companion).unwrap() / scale;
        worst = worst.max(d);
    }
    ensure(worst <= 1e-12, || format!("companion and closed-form roots differ by {worst:e}"))?;
    Ok(format!("{}; quadratics {worst:.0e}", report.join(", ")))
}

fn schur_identities() -> Outcome {
    let cfg = Config::from_file(film_config(DELTA, ETA, C0, false)).unwrap();
    let l = cfg.operator.limiting_matrix();
    let pencil = build_pencil(&l);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    let mut points = 0;
    while points < 1000 {
        let xi = rng.random_range(-30.0..30.0);
        let lam = c(rng.random_range(-10.0..2.0), rng.random_range(-30.0..30.0));
        let s = c(0.0, xi);
        let (a, d) = (l.a.eval(s), l.d.eval(s));
        if (d - lam).norm() < 1e-3 || (a - lam).norm() < 1e-3 {
            continue;
        }
        let p = pencil.eval(lam, xi);
        let scale = pencil.scale(lam, xi);
        let s1 = limiting_schur_symbol(&l, Complement::First, lam, s, 0.0).map_err(|e| format!("pole {e}"))?;
        let s2 = limiting_schur_symbol(&l, Complement::Second, lam, s, 0.0).map_err(|e| format!("pole {e}"))?;
        for lhs in [(d - lam) * s1, (a - lam) * s2] {
            worst = worst.max((lhs - p).norm() / scale);
        }
        points += 1;
    }
    ensure(worst <= 1e-12, || format!("Schur identity residual {worst:e}"))?;
    let first = pencil_by_interpolation(&l, Complement::First);
    let second = pencil_by_interpolation(&l, Complement::Second);
    let mut coef_err: f64 = 0.0;
    for (u, v, w) in [(&first.linear, &second.linear, &pencil.linear), (&first.constant, &second.constant, &pencil.constant)] {
        let scale = w.max_abs_coeff();
        for k in 0..=w.degree().unwrap_or(0) + 1 {
            coef_err = coef_err.max((u.coeff(k) - v.coeff(k)).norm() / scale);
            coef_err = coef_err.max((u.coeff(k) - w.coeff(k)).norm() / scale);
        }
    }
    ensure(coef_err <= 1e-12, || format!("first and second Schur pencils differ by {coef_err:e}"))?;
    Ok(format!("identity residual {worst:.1e} over {points} points, pencils agree to {coef_err:.1e}"))
}

fn stabilization() -> Outcome {
    let perturbed = Config::from_file(film_config(DELTA, ETA, C0, true)).unwrap();
    let probe = default_probe(&perturbed.operator.limiting_matrix());
    let mut xis = perturbed.grid.xis.clone();
    xis.push(0.0);
    let mut metrics = Vec::new();
    for x in [3.0, 6.0, 10.0] {
        metrics.push(stabilization_metric(&perturbed.operator, probe, x, &xis, 0.5).map_err(|e| e.to_string())?);
    }
    ensure(metrics[0] > metrics[1] && metrics[1] > metrics[2], || format!("not strictly decreasing: {metrics:?}"))?;
    ensure(metrics[2] <= 1e-30, || format!("metric at x=10 is {:e}", metrics[2]))?;
    let constant = Config::from_file(film_config(DELTA, ETA, C0, false)).unwrap();
    for x in [3.0, 6.0, 10.0] {
        let v = stabilization_metric(&constant.operator, probe, x, &xis, 0.5).map_err(|e| e.to_string())?;
        ensure(v == 0.0, || format!("constant coefficients give {v:e} at x={x}"))?;
    }
    Ok(format!("{:.2e} > {:.2e} > {:.2e}, constant case 0", metrics[0], metrics[1], metrics[2]))
}

struct Row {
    xi: f64,
    lambda: Complex64,
}

fn parse_csv(text: &str) -> Result<Vec<Row>, String> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|line| {
            let f: Vec<f64> = line.split(',').map(|v| v.parse::<f64>()).collect::<Result<_, _>>().map_err(|e| format!("{line}: {e}"))?;
            Ok(Row { xi: f[0], lambda: c(f[2], f[3]) })
        })
        .collect()
}

fn curve_properties() -> Outcome {
    let dir = TempDir::new().unwrap();
    let cfg = write_film(dir.path(), false);
    let (alpha, beta) = alpha_beta();
    let mut worst_res: f64 = 0.0;
    let mut worst_sym: f64 = 0.0;
    for (tag, window) in [("a", "-3,0.2,-20,20"), ("b", "-0.2,0.1,-0.2,0.2")] {
        let mut outputs = Vec::new();
        for run_ix in 0..2 {
            let csv = dir.path().join(format!("{tag}{run_ix}.csv"));
            let svg = dir.path().join(format!("{tag}{run_ix}.svg"));
            let w = format!("--window={window}");
            let o = essspec(&["spectrum", s(&cfg), &w, "--out-csv", s(&csv), "--out-svg", s(&svg)]);
            ensure(o.code == EXIT_OK, || format!("spectrum exited {}: {}", o.code, o.stderr))?;
            outputs.push((fs::read(&csv).unwrap(), fs::read(&svg).unwrap()));
        }
        ensure(outputs[0] == outputs[1], || format!("window {window}: outputs differ between runs"))?;

        let rows = parse_csv(&String::from_utf8_lossy(&outputs[0].0))?;
        for r in &rows {
            let sv = c(0.0, r.xi);
            let (a, b) = (horner(&alpha, sv), horner(&beta, sv));
            let lam = r.lambda;
            let scale = lam.norm_sqr() + a.norm() * lam.norm() + b.norm();
            worst_res = worst_res.max((lam * lam + a * lam + b).norm() / scale);
        }
        // rows come in pairs per sample; the grid is symmetric in xi
        let samples: Vec<(f64, [Complex64; 2])> =
            rows.chunks(2).map(|p| (p[0].xi, [p[0].lambda, p[1].lambda])).collect();
        let n = samples.len();
        for k in 0..n {
            let (xi, roots) = samples[k];
            let (xm, mirror) = samples[n - 1 - k];
            ensure(xi == -xm, || format!("grid not symmetric at {xi}"))?;
            let d = match_distance(&roots.map(|z| z.conj()), &mirror).unwrap();
            worst_sym = worst_sym.max(d);
        }
    }
    ensure(worst_res <= 1e-10, || format!("pencil residual {worst_res:e}"))?;
    ensure(worst_sym <= 1e-10, || format!("conjugate-symmetry defect {worst_sym:e}"))?;
    Ok(format!("residual {worst_res:.1e}, symmetry {worst_sym:.1e}, both windows byte-identical"))
}

fn perturbed_validation() -> Outcome {
    let dir = TempDir::new().unwrap();
    let cfg = write_film(dir.path(), true);
    let mut fractions = Vec::new();
    let mut detail = Vec::new();
    for m in ["128", "256"] {
        let t0 = Instant::now();
        let o = essspec(&["validate", s(&cfg), "--scheme", "FOURIER", "--L", "20", "--M", m]);
        ensure(o.code == EXIT_OK, || format!("validate M={m} exited {}: {}", o.code, o.stderr))?;
        let v = json(&o.stdout)?;
        let f = v["matched_fraction"].as_f64().unwrap_or(f64::NAN);
        detail.push(format!("M={m}: {f:.3} of {} ({:.1} s)", v["in_window"], t0.elapsed().as_secs_f64()));
        fractions.push(f);
    }
    ensure(fractions[1] >= 0.9, || format!("matched_fraction at M=256 is {}", fractions[1]))?;
    ensure(fractions[1] >= fractions[0], || format!("matched_fraction fell from {} to {}", fractions[0], fractions[1]))?;
    Ok(detail.join(", "))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("film preset gate", film_gate),
        ("pencil anchor values", pencil_anchors),
        ("exceptional set", exceptional_set),
        ("exact discretization oracle", discretization_oracle),
        ("determinant vs entrywise ellipticity", ellipticity_equivalence),
        ("eigensolver suite", eigensolver),
        ("Schur identities", schur_identities),
        ("stabilization", stabilization),
        ("curve properties", curve_properties),
        ("perturbed-operator validation", perturbed_validation),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2} s]", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.2} s]", k + 1);
            }
        }
    }
    let total = start.elapsed();
    let slow = total > Duration::from_secs(300);
    if slow {
        failed += 1;
        println!("FAIL    total runtime {:.1} s exceeds 300 s", total.as_secs_f64());
    }
    println!("{} of {} criteria passed in {:.1} s", criteria.len() - failed.min(criteria.len()), criteria.len(), total.as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
