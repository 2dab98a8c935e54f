//! Command-line front end: `check`, `spectrum`, `validate` and `film`.
//!
//! Exit codes: 0 success, 1 a checked condition failed, 2 usage, I/O or
//! configuration error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::config::{emit_config, load_config, Config, ConfigError};
use crate::ellipticity::{check_dn_ellipticity, check_entrywise, EllipticityError, EllipticityReport};
use crate::poly::Poly;
use crate::presets::{film_config, FILM_C0, FILM_DELTA, FILM_ETA};
use crate::schur::{
    build_pencil, default_probe, exceptional_sets, omega_condition, stabilization_metric, ExceptionalSet,
    IntersectionOptions, LambdaPoint, OmegaReport, SpectralPencil,
};
use crate::spectrum::{
    choose_xi_plot, curve_invariant_check, tanh_grid, trace_spectrum, write_csv, CurveReport, SpectrumCurve, Window,
    DEFAULT_XI_POINTS,
};
use crate::symbols::{OrderCase, Orders};
use crate::svg::render_svg;
use crate::validate::{validate_spectrum, Scheme, ValidateError, ValidateOptions, ValidationReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Abscissae at which the stabilization metric is reported.
pub const STABILIZATION_XS: [f64; 4] = [5.0, 10.0, 20.0, 40.0];

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Ellipticity(#[from] EllipticityError),
    #[error(transparent)]
    Validate(#[from] ValidateError),
}

#[derive(Debug, Parser)]
#[command(name = "essspec", version, about = "Essential spectra of 2x2 mixed-order operator systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check ellipticity, the order condition and stabilization of a config.
    Check(CheckArgs),
    /// Trace the spectrum curve and write CSV and SVG output.
    Spectrum(SpectrumArgs),
    /// Compare eigenvalues of a periodic discretization with the curve.
    Validate(ValidateArgs),
    /// Write the thin-film config and trace its spectrum.
    Film(FilmArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub config: PathBuf,
    /// Print the full report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    /// Number of frequency samples.
    #[arg(long, default_value_t = DEFAULT_XI_POINTS)]
    pub xi_points: usize,
    /// Plot window `re_min,re_max,im_min,im_max`.
    #[arg(long, allow_hyphen_values = true, default_value = "-3,0.2,-20,20")]
    pub window: Window,
    /// Distance below which roots are flagged as near an exceptional curve;
    /// overrides the config value.
    #[arg(long)]
    pub excl_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    pub config: PathBuf,
    #[command(flatten)]
    pub trace: TraceArgs,
    #[arg(long, default_value = "spectrum.csv")]
    pub out_csv: PathBuf,
    #[arg(long, default_value = "spectrum.svg")]
    pub out_svg: PathBuf,
    /// Trace even if the checks fail; the failures are noted in the output.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub config: PathBuf,
    #[arg(long, value_enum, default_value = "FOURIER")]
    pub scheme: Scheme,
    /// Half-length of the periodic domain.
    #[arg(long = "L", default_value_t = 20.0)]
    pub l: f64,
    /// Grid points per component (even).
    #[arg(long = "M", default_value_t = 256)]
    pub m: usize,
    #[arg(long, allow_hyphen_values = true, default_value = "-3,0.2,-20,20")]
    pub window: Window,
    /// Fixed eigenvalue-to-curve tolerance; by default chosen from the
    /// local curve speed.
    #[arg(long)]
    pub dist_tol: Option<f64>,
    /// Also write the eigenvalues as `re,im` rows.
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FilmArgs {
    #[arg(long, default_value_t = FILM_DELTA)]
    pub delta: f64,
    #[arg(long, default_value_t = FILM_ETA)]
    pub eta: f64,
    #[arg(long, default_value_t = FILM_C0, allow_hyphen_values = true)]
    pub c0: f64,
    /// Add Gaussian perturbations to the variable coefficients.
    #[arg(long)]
    pub perturbed: bool,
    #[arg(long, default_value = "film.json")]
    pub out_config: PathBuf,
    #[command(flatten)]
    pub trace: TraceArgs,
    #[arg(long, default_value = "film.csv")]
    pub out_csv: PathBuf,
    #[arg(long, default_value = "film.svg")]
    pub out_svg: PathBuf,
}

fn complex_pairs(p: &Poly<f64>) -> Vec<[f64; 2]> {
    // adding 0.0 maps -0.0 to 0.0
    p.coeffs().iter().map(|z| [z.re + 0.0, z.im + 0.0]).collect()
}

/// Pencil coefficients as `[re, im]` pairs indexed by the power of `i xi`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PencilDump {
    #[serde(rename = "A")]
    pub linear: Vec<[f64; 2]>,
    #[serde(rename = "B")]
    pub constant: Vec<[f64; 2]>,
}

impl From<&SpectralPencil<f64>> for PencilDump {
    fn from(p: &SpectralPencil<f64>) -> Self {
        PencilDump { linear: complex_pairs(&p.linear), constant: complex_pairs(&p.constant) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilizationPoint {
    pub x: f64,
    pub metric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilizationReport {
    pub probe: [f64; 2],
    pub metrics: Vec<StabilizationPoint>,
    pub nonincreasing: bool,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub orders: Orders,
    pub case: OrderCase,
    pub kappa: usize,
    pub ellipticity: EllipticityReport,
    /// Entrywise verdict; absent in the balanced case.
    pub entrywise_pass: Option<bool>,
    pub assumption_b: bool,
    pub stabilization: StabilizationReport,
    pub omega: Option<OmegaReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_note: Option<String>,
    pub pencil: PencilDump,
    pub failures: Vec<String>,
    pub pass: bool,
}

pub fn stabilization(cfg: &Config) -> StabilizationReport {
    let t = &cfg.operator;
    let tol = cfg.tolerances();
    let probe = default_probe(&t.limiting_matrix());
    let mut xis = cfg.grid.xis.clone();
    xis.push(0.0);
    let mut metrics = Vec::new();
    let mut error = None;
    for &x in &STABILIZATION_XS {
        match stabilization_metric(t, probe, x, &xis, tol.pole_guard) {
            Ok(metric) => metrics.push(StabilizationPoint { x, metric }),
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
    }
    let nonincreasing = metrics.windows(2).all(|w| w[1].metric <= w[0].metric);
    let pass = error.is_none() && metrics.last().is_some_and(|p| p.metric <= tol.stab_tol);
    StabilizationReport { probe: [probe.re, probe.im], metrics, nonincreasing, pass, error }
}

pub fn run_check(cfg: &Config) -> Result<CheckReport, CliError> {
    let t = &cfg.operator;
    let tol = cfg.tolerances();
    let orders = t.orders();
    let ellipticity = check_dn_ellipticity(t, &cfg.grid, tol.margin_tol)?;
    let entrywise_pass = match orders.case() {
        OrderCase::Balanced => None,
        _ => Some(check_entrywise(t, &cfg.grid, tol.margin_tol)?.pass),
    };
    let stab = stabilization(cfg);
    let (omega, omega_note) = match omega_condition(t, &cfg.grid.xs) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut failures = Vec::new();
    if !ellipticity.dn_ok {
        failures.push(format!(
            "ellipticity: determinant margin {:e} (leading {:e}) below margin_tol {:e}",
            ellipticity.dn_margin, ellipticity.leading_margin, tol.margin_tol
        ));
    }
    if !ellipticity.assumption_b_ok {
        failures.push("order condition: off-diagonal orders of opposite sign require m+q ≥ max(n, p)".into());
    }
    if !stab.pass {
        match &stab.error {
            Some(e) => failures.push(format!("stabilization: {e}")),
            None => failures.push(format!(
                "stabilization: metric {:e} at x={} exceeds stab_tol {:e}",
                stab.metrics.last().map_or(f64::NAN, |p| p.metric),
                STABILIZATION_XS[STABILIZATION_XS.len() - 1],
                tol.stab_tol
            )),
        }
    }
    let pencil = build_pencil(&t.limiting_matrix());
    Ok(CheckReport {
        orders,
        case: orders.case(),
        kappa: orders.kappa(),
        assumption_b: ellipticity.assumption_b_ok,
        ellipticity,
        entrywise_pass,
        stabilization: stab,
        omega,
        omega_note,
        pencil: PencilDump::from(&pencil),
        pass: failures.is_empty(),
        failures,
    })
}

/// Everything produced by one trace of the spectrum.
#[derive(Debug, Clone)]
pub struct SpectrumRun {
    pub pencil: SpectralPencil<f64>,
    pub xi_plot: f64,
    pub exceptional: ExceptionalSet,
    pub curve: SpectrumCurve,
    pub report: CurveReport,
}

pub fn run_spectrum(cfg: &Config, window: Window, xi_points: usize, excl_tol: Option<f64>) -> SpectrumRun {
    let tol = cfg.tolerances();
    let l = cfg.operator.limiting_matrix();
    let pencil = build_pencil(&l);
    let xi_plot = choose_xi_plot(&pencil, &window);
    let grid = tanh_grid(xi_plot, xi_points);
    let opts = IntersectionOptions { coarse_tol: tol.coarse_tol, refine_tol: tol.refine_tol, ..Default::default() };
    let exceptional = exceptional_sets(&l, &grid, &opts);
    let curve = trace_spectrum(&pencil, &exceptional, &grid, Some(window), excl_tol.unwrap_or(tol.excl_tol));
    let report = curve_invariant_check(&curve, &pencil);
    SpectrumRun { pencil, xi_plot, exceptional, curve, report }
}

#[derive(Debug, Serialize)]
struct SpectrumSummary<'a> {
    pencil: PencilDump,
    xi_plot: f64,
    xi_points: usize,
    window: Window,
    lambda_set: &'a [LambdaPoint],
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<OmegaReport>,
    curve: &'a CurveReport,
    root_tol_ok: bool,
    forced: Vec<String>,
    csv: String,
    svg: String,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    writeln!(out, "{text}").map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })
}

fn print_line(out: &mut dyn Write, line: &str) -> Result<(), CliError> {
    writeln!(out, "{line}").map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })
}

pub fn cmd_check(args: &CheckArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = load_config(&args.config)?;
    let report = run_check(&cfg)?;
    if args.json {
        print_json(out, &report)?;
    } else {
        let e = &report.ellipticity;
        let case = serde_json::to_value(report.case).expect("case serializes");
        print_line(out, &format!("case {}, kappa {}", case.as_str().unwrap_or("?"), report.kappa))?;
        print_line(out, &format!("ellipticity margin {:e}, leading {:e}", e.dn_margin, e.leading_margin))?;
        print_line(out, &format!("order condition {}", if report.assumption_b { "holds" } else { "fails" }))?;
        for p in &report.stabilization.metrics {
            print_line(out, &format!("stabilization x={}: {:e}", p.x, p.metric))?;
        }
        if let Some(o) = &report.omega {
            print_line(out, &format!("omega1 {} omega2 {} bound {} holds {}", o.omega1, o.omega2, o.bound, o.holds))?;
        }
        for f in &report.failures {
            print_line(out, &format!("FAIL {f}"))?;
        }
        print_line(out, if report.pass { "pass" } else { "fail" })?;
    }
    Ok(if report.pass { EXIT_OK } else { EXIT_FAILED })
}

fn trace_and_write(
    cfg: &Config,
    trace: &TraceArgs,
    csv_path: &Path,
    svg_path: &Path,
    forced: Vec<String>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    if trace.xi_points == 0 {
        return Err(CliError::Usage("--xi-points must be positive".into()));
    }
    let run = run_spectrum(cfg, trace.window, trace.xi_points, trace.excl_tol);
    let comments: Vec<String> = forced.iter().map(|f| format!("forced: check failed: {f}")).collect();
    let mut csv = Vec::new();
    write_csv(&mut csv, &run.curve, &comments).expect("writing to memory");
    write_file(csv_path, &csv)?;
    write_file(svg_path, render_svg(&run.curve, &trace.window, &comments).as_bytes())?;
    let summary = SpectrumSummary {
        pencil: PencilDump::from(&run.pencil),
        xi_plot: run.xi_plot,
        xi_points: trace.xi_points,
        window: trace.window,
        lambda_set: &run.exceptional.lambda_set,
        omega: omega_condition(&cfg.operator, &cfg.grid.xs).ok(),
        curve: &run.report,
        root_tol_ok: run.report.max_residual <= cfg.tolerances().root_tol,
        forced,
        csv: csv_path.display().to_string(),
        svg: svg_path.display().to_string(),
    };
    print_json(out, &summary)?;
    Ok(EXIT_OK)
}

pub fn cmd_spectrum(args: &SpectrumArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = load_config(&args.config)?;
    let check = run_check(&cfg)?;
    if !check.pass && !args.force {
        for f in &check.failures {
            print_line(out, &format!("FAIL {f}"))?;
        }
        print_line(out, "checks failed; rerun with --force to trace anyway")?;
        return Ok(EXIT_FAILED);
    }
    trace_and_write(&cfg, &args.trace, &args.out_csv, &args.out_svg, check.failures, out)
}

pub fn cmd_validate(args: &ValidateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = load_config(&args.config)?;
    let report = validate_config(&cfg, args)?;
    if let Some(path) = &args.out_csv {
        let mut text = String::from("re,im\n");
        for z in &report.eigenvalues {
            text.push_str(&format!("{},{}\n", z.re, z.im));
        }
        write_file(path, text.as_bytes())?;
    }
    print_json(out, &report)?;
    Ok(if report.converged { EXIT_OK } else { EXIT_FAILED })
}

pub fn validate_config(cfg: &Config, args: &ValidateArgs) -> Result<ValidationReport, CliError> {
    let pencil = build_pencil(&cfg.operator.limiting_matrix());
    let grid = tanh_grid(choose_xi_plot(&pencil, &args.window), DEFAULT_XI_POINTS);
    let opts = ValidateOptions {
        scheme: args.scheme,
        l: args.l,
        m: args.m,
        window: args.window,
        dist_tol: args.dist_tol.or(cfg.tolerances().dist_tol),
        qr_tol: cfg.tolerances().qr_tol,
    };
    Ok(validate_spectrum(&cfg.operator, &pencil, &grid, &opts)?)
}

pub fn cmd_film(args: &FilmArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    if !(args.delta > 0.0 && args.delta.is_finite()) || !(args.eta > 0.0 && args.eta.is_finite()) {
        return Err(CliError::Usage(format!("--delta and --eta must be positive (got {}, {})", args.delta, args.eta)));
    }
    if !args.c0.is_finite() {
        return Err(CliError::Usage("--c0 must be finite".into()));
    }
    let file = film_config(args.delta, args.eta, args.c0, args.perturbed);
    write_file(&args.out_config, emit_config(&file).as_bytes())?;
    let cfg = Config::from_file(file)?;
    let check = run_check(&cfg)?;
    if !check.pass {
        for f in &check.failures {
            print_line(out, &format!("FAIL {f}"))?;
        }
        return Ok(EXIT_FAILED);
    }
    trace_and_write(&cfg, &args.trace, &args.out_csv, &args.out_svg, Vec::new(), out)
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Check(a) => cmd_check(a, out),
        Command::Spectrum(a) => cmd_spectrum(a, out),
        Command::Validate(a) => cmd_validate(a, out),
        Command::Film(a) => cmd_film(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}
