//! Tracing the zero set of the spectral pencil over real frequencies.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numerics::match_distance;
use crate::schur::{CellIndex, ExceptionalSet, SpectralPencil};

/// Rectangle `[re_min, re_max] x [im_min, im_max]` in the lambda plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Default for Window {
    fn default() -> Self {
        Window { re_min: -3.0, re_max: 0.2, im_min: -20.0, im_max: 20.0 }
    }
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Option<Self> {
        let ok = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite()) && re_min < re_max && im_min < im_max;
        ok.then_some(Window { re_min, re_max, im_min, im_max })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (self.re_min..=self.re_max).contains(&z.re) && (self.im_min..=self.im_max).contains(&z.im)
    }
}

impl std::str::FromStr for Window {
    type Err = String;

    /// Parses `re_min,re_max,im_min,im_max`.
    fn from_str(s: &str) -> Result<Self, String> {
        let vals: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("window component {p:?}: {e}")))
            .collect::<Result<_, _>>()?;
        if vals.len() != 4 {
            return Err(format!("window needs 4 comma-separated numbers, got {}", vals.len()));
        }
        Window::new(vals[0], vals[1], vals[2], vals[3]).ok_or_else(|| "window bounds must be finite with min < max".to_string())
    }
}

pub const DEFAULT_XI_POINTS: usize = 2001;
pub const DEFAULT_EXCL_TOL: f64 = 1e-6;
const U_MAX: f64 = 3.0;
const XI_PLOT_CAP: f64 = 65536.0;

/// `xi_k = xi_plot * tanh(u_k)` with `u` uniform on `[-3, 3]`.
///
/// The nonnegative half is computed and mirrored, so the grid is exactly
/// symmetric; odd point counts include `xi = 0`.
pub fn tanh_grid(xi_plot: f64, points: usize) -> Vec<f64> {
    if points == 0 {
        return Vec::new();
    }
    if points == 1 {
        return vec![0.0];
    }
    let step = 2.0 * U_MAX / (points - 1) as f64;
    let half: Vec<f64> = (0..points.div_ceil(2))
        .map(|j| {
            // index from the right end, so u is exactly representable there
            let k = points - 1 - j;
            let u = k as f64 * step - U_MAX;
            xi_plot * u.tanh()
        })
        .collect();
    let mut grid: Vec<f64> = half.iter().map(|v| -v).collect();
    let mirror_from = if points % 2 == 1 { half.len() - 1 } else { half.len() };
    grid.extend(half[..mirror_from].iter().rev());
    if points % 2 == 1 {
        let mid = points / 2;
        grid[mid] = 0.0;
    }
    grid
}

/// Smallest `2^k` (capped at `2^16`) such that both roots at `xi = +-2^k`
/// lie outside the window.
pub fn choose_xi_plot(pencil: &SpectralPencil<f64>, window: &Window) -> f64 {
    let mut xi = 1.0;
    while xi < XI_PLOT_CAP {
        let outside = [xi, -xi]
            .iter()
            .all(|&x| pencil.roots_at(x).iter().all(|r| !window.contains(*r)));
        if outside {
            return xi;
        }
        xi *= 2.0;
    }
    XI_PLOT_CAP
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct RootFlags {
    /// Outside the exceptional set `Λ` and not simultaneously near both
    /// diagonal curves.
    pub ok: bool,
    pub near_sigma_d: bool,
    pub near_sigma_a: bool,
    pub in_lambda_set: bool,
    /// Outside the plotting window; retained in the data.
    pub clipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSample {
    pub xi: f64,
    /// Indexed by branch.
    pub roots: [Complex64; 2],
    pub flags: [RootFlags; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumCurve {
    pub samples: Vec<SpectrumSample>,
    pub xi_grid: Vec<f64>,
    pub lambda_window: Option<Window>,
}

/// Roots of the pencil on each grid frequency, paired into two continuous
/// branches by minimal-sum matching, and flagged against the exceptional
/// set.
pub fn trace_spectrum(
    pencil: &SpectralPencil<f64>,
    exc: &ExceptionalSet,
    xi_grid: &[f64],
    window: Option<Window>,
    excl_tol: f64,
) -> SpectrumCurve {
    let cell = excl_tol.max(f64::MIN_POSITIVE);
    let index_d = CellIndex::new(&exc.curve_d, cell);
    let index_a = CellIndex::new(&exc.curve_a, cell);
    let lambdas: Vec<Complex64> = exc.lambda_set.iter().map(|p| p.lambda).collect();
    let index_l = CellIndex::new(&lambdas, cell);
    let near = |index: &CellIndex, pts: &[Complex64], r: Complex64| index.near(r).any(|k| (pts[k] - r).norm() <= excl_tol);

    let mut samples: Vec<SpectrumSample> = Vec::with_capacity(xi_grid.len());
    for &xi in xi_grid {
        let mut roots = pencil.roots_at(xi);
        if let Some(prev) = samples.last() {
            // pair against a linear prediction so that crossing branches
            // keep their labels
            let pred = match samples.len().checked_sub(2).map(|k| &samples[k]) {
                Some(pp) if prev.xi != pp.xi => {
                    let ratio = (xi - prev.xi) / (prev.xi - pp.xi);
                    [0, 1].map(|b| prev.roots[b] + (prev.roots[b] - pp.roots[b]) * ratio)
                }
                _ => prev.roots,
            };
            let keep = (roots[0] - pred[0]).norm() + (roots[1] - pred[1]).norm();
            let swap = (roots[1] - pred[0]).norm() + (roots[0] - pred[1]).norm();
            if swap < keep {
                roots.swap(0, 1);
            }
        }
        let flags = roots.map(|r| {
            let near_sigma_d = near(&index_d, &exc.curve_d, r);
            let near_sigma_a = near(&index_a, &exc.curve_a, r);
            let in_lambda_set = near(&index_l, &lambdas, r);
            RootFlags {
                ok: !in_lambda_set && !(near_sigma_d && near_sigma_a),
                near_sigma_d,
                near_sigma_a,
                in_lambda_set,
                clipped: window.is_some_and(|w| !w.contains(r)),
            }
        });
        samples.push(SpectrumSample { xi, roots, flags });
    }
    SpectrumCurve { samples, xi_grid: xi_grid.to_vec(), lambda_window: window }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveReport {
    /// `max |P(r, xi)| / (|r|^2 + |A| |r| + |B|)` over all samples.
    pub max_residual: f64,
    /// Largest distance between the roots at `-xi` and the conjugated roots
    /// at `xi`; `None` when the grid is not symmetric.
    pub symmetry_defect: Option<f64>,
    /// Largest step between consecutive roots of one branch.
    pub max_branch_jump: f64,
}

pub fn curve_invariant_check(curve: &SpectrumCurve, pencil: &SpectralPencil<f64>) -> CurveReport {
    let mut max_residual: f64 = 0.0;
    for s in &curve.samples {
        for &r in &s.roots {
            let scale = pencil.scale(r, s.xi);
            let res = pencil.eval(r, s.xi).norm();
            max_residual = max_residual.max(if scale > 0.0 { res / scale } else { res });
        }
    }
    let n = curve.samples.len();
    let symmetric = (0..n).all(|k| curve.samples[k].xi == -curve.samples[n - 1 - k].xi);
    let symmetry_defect = symmetric.then(|| {
        (0..n)
            .map(|k| {
                let here = curve.samples[k].roots.map(|r| r.conj());
                match_distance(&here, &curve.samples[n - 1 - k].roots).unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max)
    });
    let max_branch_jump = curve
        .samples
        .windows(2)
        .flat_map(|w| (0..2).map(move |b| (w[1].roots[b] - w[0].roots[b]).norm()))
        .fold(0.0, f64::max);
    CurveReport { max_residual, symmetry_defect, max_branch_jump }
}

pub const CSV_HEADER: &str = "xi,branch,re_lambda,im_lambda,ok,near_sigma_d,near_sigma_a,in_lambda_set";

/// One row per sample and branch (branches numbered 1 and 2), clipped
/// roots included. `comments` are written first as `# ` lines. Negative
/// zero is written as `0`.
pub fn write_csv<W: Write>(out: &mut W, curve: &SpectrumCurve, comments: &[String]) -> io::Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{CSV_HEADER}")?;
    let bit = |b: bool| u8::from(b);
    for s in &curve.samples {
        for (b, (r, f)) in s.roots.iter().zip(&s.flags).enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.xi + 0.0,
                b + 1,
                r.re + 0.0,
                r.im + 0.0,
                bit(f.ok),
                bit(f.near_sigma_d),
                bit(f.near_sigma_a),
                bit(f.in_lambda_set)
            )?;
        }
    }
    Ok(())
}
