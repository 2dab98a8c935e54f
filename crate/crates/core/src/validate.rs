//! Discretization of the operator matrix on a periodic truncated domain and
//! comparison of its eigenvalues with the analytic spectrum.

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::expr::EvalError;
use crate::numerics::{eigenvalues_with, Matrix, NumericsError, QrOptions};
use crate::schur::SpectralPencil;
use crate::spectrum::Window;
use crate::symbols::{DiffSymbol, OperatorMatrix, XPoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidateError {
    #[error("grid size M={0} must be even and within 8..=1024")]
    GridSize(usize),
    #[error("half-length L={0} must be positive and finite")]
    Length(f64),
    #[error("coefficient evaluation failed at x={x}: {source}")]
    Eval { x: f64, source: EvalError },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Scheme {
    /// Pseudo-spectral differentiation through the dense DFT matrix.
    #[default]
    #[value(name = "FOURIER", alias = "fourier")]
    Fourier,
    /// Powers of the central first-difference circulant.
    #[value(name = "FD", alias = "fd")]
    Fd,
}

#[derive(Debug, Clone)]
pub struct Discretization {
    pub scheme: Scheme,
    pub l: f64,
    pub m: usize,
    /// `x_j = -L + 2 L j / M`
    pub xs: Vec<f64>,
    /// `xi_k = pi k / L` for `k = -M/2 .. M/2 - 1`
    pub xis: Vec<f64>,
    /// `[[A, B], [C, D]]`, dimension `2M`.
    pub matrix: Matrix<f64>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `F[k][j] = exp(-i xi_k x_j)`.
fn dft_matrix(xis: &[f64], xs: &[f64]) -> Matrix<f64> {
    let rows: Vec<Vec<Complex64>> = xis
        .iter()
        .map(|&xi| xs.iter().map(|&x| Complex64::from_polar(1.0, -xi * x)).collect())
        .collect();
    Matrix::from_rows(&rows).expect("square by construction")
}

/// Derivative matrices `D^0 ..= D^max_power`.
fn derivative_powers(scheme: Scheme, xs: &[f64], xis: &[f64], l: f64, max_power: usize) -> Vec<Matrix<f64>> {
    let m = xs.len();
    let mut out = vec![Matrix::identity(m)];
    match scheme {
        Scheme::Fourier => {
            let f = dft_matrix(xis, xs);
            let f_inv = {
                let mut g = f.conj_transpose();
                g.scale_rows(&vec![c(1.0 / m as f64, 0.0); m]);
                g
            };
            for j in 1..=max_power {
                let symbol: Vec<Complex64> = xis.iter().map(|&xi| crate::scalar::cpowi(c(0.0, xi), j as u32)).collect();
                let mut df = f.clone();
                df.scale_rows(&symbol);
                out.push(&f_inv * &df);
            }
        }
        Scheme::Fd => {
            let h = 2.0 * l / m as f64;
            let mut d1 = Matrix::zeros(m);
            for r in 0..m {
                d1[(r, (r + 1) % m)] = c(0.5 / h, 0.0);
                d1[(r, (r + m - 1) % m)] = c(-0.5 / h, 0.0);
            }
            for j in 1..=max_power {
                let next = &out[j - 1] * &d1;
                out.push(next);
            }
        }
    }
    out
}

fn block(sym: &DiffSymbol, xs: &[f64], powers: &[Matrix<f64>]) -> Result<Matrix<f64>, ValidateError> {
    let m = xs.len();
    let mut acc = Matrix::zeros(m);
    for (j, coeff) in sym.coeffs().iter().enumerate() {
        let vals: Vec<Complex64> = xs
            .iter()
            .map(|&x| coeff.eval(XPoint::At(x)).map_err(|source| ValidateError::Eval { x, source }))
            .collect::<Result<_, _>>()?;
        let mut term = powers[j].clone();
        term.scale_rows(&vals);
        acc.add_assign(&term);
    }
    Ok(acc)
}

/// Builds the `2M x 2M` matrix realizing each entry as
/// `sum_j diag(coeff_j(x)) D^j` on the periodic grid.
pub fn assemble(t: &OperatorMatrix, scheme: Scheme, l: f64, m: usize) -> Result<Discretization, ValidateError> {
    if !m.is_multiple_of(2) || !(8..=1024).contains(&m) {
        return Err(ValidateError::GridSize(m));
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(ValidateError::Length(l));
    }
    let xs: Vec<f64> = (0..m).map(|j| -l + 2.0 * l * j as f64 / m as f64).collect();
    let half = (m / 2) as i64;
    let xis: Vec<f64> = (-half..half).map(|k| std::f64::consts::PI * k as f64 / l).collect();
    let max_power = t.entries().iter().filter_map(|(_, s)| s.order()).max().unwrap_or(0);
    let powers = derivative_powers(scheme, &xs, &xis, l, max_power);
    let mut matrix = Matrix::zeros(2 * m);
    matrix.set_block(0, 0, &block(&t.a, &xs, &powers)?);
    matrix.set_block(0, m, &block(&t.b, &xs, &powers)?);
    matrix.set_block(m, 0, &block(&t.c, &xs, &powers)?);
    matrix.set_block(m, m, &block(&t.d, &xs, &powers)?);
    Ok(Discretization { scheme, l, m, xs, xis, matrix })
}

fn serialize_complex<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

fn serialize_complex_list<S: Serializer>(zs: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(zs.iter().map(|z| [z.re, z.im]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outlier {
    #[serde(serialize_with = "serialize_complex")]
    pub lambda: Complex64,
    pub distance: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub scheme: Scheme,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub converged: bool,
    pub qr_iterations: usize,
    #[serde(serialize_with = "serialize_complex_list")]
    pub eigenvalues: Vec<Complex64>,
    pub in_window: usize,
    pub matched: usize,
    pub matched_fraction: f64,
    pub max_matched_distance: f64,
    /// Fixed tolerance, or `None` when chosen per eigenvalue from the local
    /// curve speed.
    pub dist_tol: Option<f64>,
    pub outliers: Vec<Outlier>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    pub scheme: Scheme,
    pub l: f64,
    pub m: usize,
    pub window: Window,
    /// `None` selects `max(10 (pi/L) speed, 1e-2)` per eigenvalue.
    pub dist_tol: Option<f64>,
    pub qr_tol: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            scheme: Scheme::Fourier,
            l: 20.0,
            m: 256,
            window: Window::default(),
            dist_tol: None,
            qr_tol: QrOptions::<f64>::default().tol,
        }
    }
}

pub const DIST_TOL_FLOOR: f64 = 1e-2;
const REFINE: usize = 10;

/// Curve point with the local speed `|d lambda / d xi|`.
struct CurvePoint {
    lambda: Complex64,
    speed: f64,
}

/// Pencil roots on `plot_grid` refined tenfold, plus the frequencies of the
/// discretization.
fn dense_curve(pencil: &SpectralPencil<f64>, plot_grid: &[f64], extra: &[f64]) -> Vec<CurvePoint> {
    let mut xis: Vec<f64> = Vec::with_capacity(plot_grid.len() * REFINE + extra.len());
    for w in plot_grid.windows(2) {
        for s in 0..REFINE {
            xis.push(w[0] + (w[1] - w[0]) * s as f64 / REFINE as f64);
        }
    }
    xis.extend(plot_grid.last());
    xis.extend_from_slice(extra);
    xis.iter()
        .flat_map(|&xi| {
            pencil.roots_at(xi).map(|r| CurvePoint { lambda: r, speed: pencil.root_speed(r, xi).unwrap_or(0.0) })
        })
        .collect()
}

/// Eigenvalues of the discretized operator matched against the analytic
/// curve inside the window. Eigenvalues farther than the tolerance are
/// reported as outliers.
pub fn validate_spectrum(
    t: &OperatorMatrix,
    pencil: &SpectralPencil<f64>,
    plot_grid: &[f64],
    opts: &ValidateOptions,
) -> Result<ValidationReport, ValidateError> {
    let disc = assemble(t, opts.scheme, opts.l, opts.m)?;
    let eig = eigenvalues_with(&disc.matrix, QrOptions { tol: opts.qr_tol, ..QrOptions::default() })?;
    let curve = dense_curve(pencil, plot_grid, &disc.xis);
    let spacing = std::f64::consts::PI / opts.l;

    let mut matched = 0;
    let mut in_window = 0;
    let mut max_matched_distance: f64 = 0.0;
    let mut outliers = Vec::new();
    for &lam in &eig.eigenvalues {
        if !opts.window.contains(lam) {
            continue;
        }
        in_window += 1;
        let nearest = curve
            .iter()
            .min_by(|p, q| (p.lambda - lam).norm().total_cmp(&(q.lambda - lam).norm()))
            .expect("curve is never empty");
        let distance = (nearest.lambda - lam).norm();
        let tolerance = opts.dist_tol.unwrap_or_else(|| (10.0 * spacing * nearest.speed).max(DIST_TOL_FLOOR));
        if distance <= tolerance {
            matched += 1;
            max_matched_distance = max_matched_distance.max(distance);
        } else {
            outliers.push(Outlier { lambda: lam, distance, tolerance });
        }
    }
    let matched_fraction = if in_window == 0 { 0.0 } else { matched as f64 / in_window as f64 };
    Ok(ValidationReport {
        scheme: opts.scheme,
        l: opts.l,
        m: opts.m,
        converged: eig.converged,
        qr_iterations: eig.iterations,
        eigenvalues: eig.eigenvalues,
        in_window,
        matched,
        matched_fraction,
        max_matched_distance,
        dist_tol: opts.dist_tol,
        outliers,
    })
}

/// Largest distance from an eigenvalue to the nearest pencil root at the
/// discretization frequencies. For constant coefficients and the FOURIER
/// scheme this is zero up to rounding.
pub fn grid_root_distance(eigs: &[Complex64], pencil: &SpectralPencil<f64>, xis: &[f64]) -> f64 {
    let roots: Vec<Complex64> = xis.iter().flat_map(|&xi| pencil.roots_at(xi)).collect();
    eigs.iter()
        .map(|e| roots.iter().map(|r| (r - e).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}
