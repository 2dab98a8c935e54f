//! Uniform Douglis–Nirenberg ellipticity and the order condition on the
//! off-diagonal entries.
//!
//! The asymptotic bound `|det M(x, xi)| >= C <xi>^kappa` for large `|xi|` is
//! checked in two parts: the infimum of the normalised determinant over a
//! finite `(x, xi)` sample, and the modulus of the degree-`kappa`
//! coefficient of the principal determinant, which controls the tail beyond
//! the sampled frequencies.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::expr::EvalError;
use crate::scalar::japanese;
use crate::symbols::{DiffSymbol, OperatorMatrix, OrderCase, SymbolError, XPoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EllipticityError {
    #[error("invalid sample grid: {0}")]
    InvalidGrid(String),
    #[error("entrywise characterisation does not apply when m+q = n+p; use the determinant check")]
    Balanced,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl From<SymbolError> for EllipticityError {
    fn from(e: SymbolError) -> Self {
        match e {
            SymbolError::Eval(e) => EllipticityError::Eval(e),
            // only reachable for zero symbols, which callers skip
            other => EllipticityError::InvalidGrid(other.to_string()),
        }
    }
}

/// Sample points in `x` and `xi`. The limit `|x| -> infinity` is always
/// included in addition to `xs`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    pub xs: Vec<f64>,
    pub xis: Vec<f64>,
}

impl SampleGrid {
    /// `x_points` equispaced points on `[-x_max, x_max]` and `xi_points`
    /// log-spaced magnitudes on `[xi_min, xi_max]`, taken with both signs.
    pub fn new(x_max: f64, x_points: usize, xi_min: f64, xi_max: f64, xi_points: usize) -> Result<Self, EllipticityError> {
        if !(x_max.is_finite() && x_max > 0.0) || x_points < 2 {
            return Err(EllipticityError::InvalidGrid(format!("x range {x_max} with {x_points} points")));
        }
        if !(xi_min > 0.0 && xi_max.is_finite() && xi_max > xi_min) || xi_points < 2 {
            return Err(EllipticityError::InvalidGrid(format!(
                "xi range [{xi_min}, {xi_max}] with {xi_points} points"
            )));
        }
        let xs = (0..x_points)
            .map(|k| -x_max + 2.0 * x_max * k as f64 / (x_points - 1) as f64)
            .collect();
        let (l0, l1) = (xi_min.ln(), xi_max.ln());
        let mut xis = Vec::with_capacity(2 * xi_points);
        for k in 0..xi_points {
            let r = (l0 + (l1 - l0) * k as f64 / (xi_points - 1) as f64).exp();
            xis.push(r);
            xis.push(-r);
        }
        Ok(SampleGrid { xs, xis })
    }

    pub fn from_points(xs: Vec<f64>, xis: Vec<f64>) -> Result<Self, EllipticityError> {
        if xis.is_empty() || xs.iter().chain(&xis).any(|v| !v.is_finite()) {
            return Err(EllipticityError::InvalidGrid("empty or non-finite sample set".into()));
        }
        Ok(SampleGrid { xs, xis })
    }

    fn x_points(&self) -> impl Iterator<Item = XPoint> + '_ {
        self.xs.iter().map(|&x| XPoint::At(x)).chain(std::iter::once(XPoint::Infinity))
    }
}

impl Default for SampleGrid {
    /// 201 points on `[-50, 50]` (so that `x = 0` is sampled) and 200
    /// magnitudes on `[1, 1e3]`.
    fn default() -> Self {
        SampleGrid::new(50.0, 201, 1.0, 1e3, 200).expect("default grid is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipticityReport {
    pub kappa: usize,
    pub case: OrderCase,
    /// `inf |det M(x, xi)| / <xi>^kappa` over the sample.
    pub dn_margin: f64,
    /// `inf_x |coefficient of (i xi)^kappa in det M(x, .)|`.
    pub leading_margin: f64,
    /// `inf |sigma_top(x, xi)| / <xi>^order` for the entries that carry the
    /// ellipticity in the current case.
    pub entry_margins: BTreeMap<String, f64>,
    pub assumption_b_ok: bool,
    /// Determinant verdict on its own.
    pub dn_ok: bool,
    pub pass: bool,
}

/// The order condition on off-diagonal orders of opposite sign, over raw
/// orders; `None` is a zero entry (order minus infinity).
pub fn assumption_b_holds(m: i64, q: i64, n: Option<i64>, p: Option<i64>) -> bool {
    let n = n.unwrap_or(i64::MIN);
    let p = p.unwrap_or(i64::MIN);
    let lo = n.min(p);
    let hi = n.max(p);
    lo >= 0 || hi <= 0 || m + q >= hi
}

pub fn check_assumption_b(t: &OperatorMatrix) -> bool {
    let o = t.orders();
    assumption_b_holds(o.m as i64, o.q as i64, o.n.map(|v| v as i64), o.p.map(|v| v as i64))
}

fn entry_margin(s: &DiffSymbol, grid: &SampleGrid) -> Result<f64, EllipticityError> {
    let k = s.order().expect("entry margins are only taken for non-zero entries") as i32;
    let mut worst = f64::INFINITY;
    for x in grid.x_points() {
        let lead = s.leading(x)?.norm();
        for &xi in &grid.xis {
            let v = lead * (xi.abs() / japanese(xi)).powi(k);
            worst = worst.min(v);
        }
    }
    Ok(worst)
}

fn entries_for_case(t: &OperatorMatrix, case: OrderCase) -> Vec<(&'static str, &DiffSymbol)> {
    match case {
        OrderCase::Diag => vec![("a", &t.a), ("d", &t.d)],
        OrderCase::Offdiag => vec![("b", &t.b), ("c", &t.c)],
        OrderCase::Balanced => vec![],
    }
}

fn leading_det(t: &OperatorMatrix, case: OrderCase, x: XPoint) -> Result<f64, EllipticityError> {
    let ad = || -> Result<_, EllipticityError> { Ok(t.a.leading(x)? * t.d.leading(x)?) };
    let bc = || -> Result<_, EllipticityError> { Ok(t.b.leading(x)? * t.c.leading(x)?) };
    // principal det = a_m d_q (i xi)^(m+q) - b_n c_p (i xi)^(n+p)
    let v = match case {
        OrderCase::Diag => ad()?,
        OrderCase::Offdiag => bc()?,
        OrderCase::Balanced => ad()? - bc()?,
    };
    Ok(v.norm())
}

/// Determinant-based ellipticity check.
pub fn check_dn_ellipticity(t: &OperatorMatrix, grid: &SampleGrid, margin_tol: f64) -> Result<EllipticityReport, EllipticityError> {
    let orders = t.orders();
    let kappa = orders.kappa();
    let case = orders.case();

    let mut dn_margin = f64::INFINITY;
    let mut leading_margin = f64::INFINITY;
    for x in grid.x_points() {
        leading_margin = leading_margin.min(leading_det(t, case, x)?);
        for &xi in &grid.xis {
            let v = t.det_principal(x, xi)?.norm() / japanese(xi).powi(kappa as i32);
            dn_margin = dn_margin.min(v);
        }
    }

    let mut entry_margins = BTreeMap::new();
    for (name, s) in entries_for_case(t, case) {
        entry_margins.insert(name.to_string(), entry_margin(s, grid)?);
    }
    let assumption_b_ok = check_assumption_b(t);
    let dn_ok = dn_margin >= margin_tol && leading_margin >= margin_tol;
    Ok(EllipticityReport {
        kappa,
        case,
        dn_margin,
        leading_margin,
        entry_margins,
        assumption_b_ok,
        dn_ok,
        pass: dn_ok && assumption_b_ok,
    })
}

/// Entrywise characterisation: when `m+q > n+p` the diagonal entries must
/// be uniformly elliptic, when `m+q < n+p` the off-diagonal ones.
pub fn check_entrywise(t: &OperatorMatrix, grid: &SampleGrid, margin_tol: f64) -> Result<EllipticityReport, EllipticityError> {
    let case = t.orders().case();
    if case == OrderCase::Balanced {
        return Err(EllipticityError::Balanced);
    }
    let mut report = check_dn_ellipticity(t, grid, margin_tol)?;
    report.pass = report.entry_margins.values().all(|&m| m >= margin_tol);
    Ok(report)
}
