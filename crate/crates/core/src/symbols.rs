//! Differential symbols, the 2x2 operator matrix and its limit at infinity.
//!
//! A symbol of order `k` is `sum_j coeff_j(x) (i xi)^j` for `j = 0..=k`. Each
//! coefficient is an asymptotically constant function: a limit plus an
//! optional decaying perturbation.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Expr, Params};
use crate::poly::Poly;
use crate::scalar::{cpowi, i_times, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymbolError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("no principal symbol: the symbol is identically zero")]
    NoPrincipal,
    #[error("leading coefficient of order-{0} symbol is identically zero")]
    LeadingVanishes(usize),
    #[error("diagonal entry {0} must not be identically zero")]
    ZeroDiagonal(char),
    #[error("orders: requires m≥q>0 (got m={m}, q={q})")]
    Orders { m: usize, q: usize },
    #[error("perturbation does not decay: |{value:e}| at x={x} exceeds {tol:e}")]
    NoDecay { x: f64, value: f64, tol: f64 },
}

/// A point on the real line or the limit `|x| -> infinity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XPoint {
    At(f64),
    Infinity,
}

impl From<f64> for XPoint {
    fn from(x: f64) -> Self {
        XPoint::At(x)
    }
}

/// An asymptotically constant coefficient `c(x) = limit + perturbation(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffFn {
    pub limit: Complex64,
    /// Closed expression in `x` (parameters already bound).
    pub perturbation: Option<Expr>,
}

impl CoeffFn {
    pub fn constant(limit: Complex64) -> Self {
        CoeffFn { limit, perturbation: None }
    }

    pub fn real(limit: f64) -> Self {
        CoeffFn::constant(Complex64::new(limit, 0.0))
    }

    /// Coefficient with a perturbation; parameters in `perturbation` are
    /// bound now.
    pub fn perturbed(limit: Complex64, perturbation: &Expr, params: &Params) -> Result<Self, EvalError> {
        Ok(CoeffFn { limit, perturbation: Some(perturbation.bind(params)?) })
    }

    pub fn is_identically_zero(&self) -> bool {
        self.perturbation.is_none() && self.limit == Complex64::new(0.0, 0.0)
    }

    /// `c(x) - limit`; zero at infinity and when no perturbation is present.
    pub fn perturbation_at(&self, x: XPoint) -> Result<Complex64, EvalError> {
        match (x, &self.perturbation) {
            (XPoint::At(x), Some(e)) => e.eval(x, &Params::new()),
            _ => Ok(Complex64::new(0.0, 0.0)),
        }
    }

    pub fn eval(&self, x: XPoint) -> Result<Complex64, EvalError> {
        Ok(self.limit + self.perturbation_at(x)?)
    }

    /// Checks `|perturbation(+-x_far)| <= tol`.
    pub fn check_decay(&self, x_far: f64, tol: f64) -> Result<(), SymbolError> {
        for x in [-x_far, x_far] {
            let v = self.perturbation_at(XPoint::At(x))?.norm();
            if v > tol {
                return Err(SymbolError::NoDecay { x, value: v, tol });
            }
        }
        Ok(())
    }
}

/// A differential symbol; the empty coefficient list is the zero symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffSymbol {
    coeffs: Vec<CoeffFn>,
}

impl DiffSymbol {
    pub fn zero() -> Self {
        DiffSymbol { coeffs: Vec::new() }
    }

    /// Builds a symbol from coefficients indexed by power of `i xi`.
    pub fn new(coeffs: Vec<CoeffFn>) -> Result<Self, SymbolError> {
        if let Some(lead) = coeffs.last() {
            if lead.is_identically_zero() {
                return Err(SymbolError::LeadingVanishes(coeffs.len() - 1));
            }
        }
        Ok(DiffSymbol { coeffs })
    }

    /// Constant-coefficient symbol from real coefficients, low to high.
    pub fn constant(coeffs: &[f64]) -> Result<Self, SymbolError> {
        DiffSymbol::new(coeffs.iter().map(|&c| CoeffFn::real(c)).collect())
    }

    pub fn coeffs(&self) -> &[CoeffFn] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Order, or `None` for the zero symbol (order minus infinity).
    pub fn order(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: XPoint, xi: f64) -> Result<Complex64, EvalError> {
        let s = i_times(xi);
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * s + c.eval(x)?;
        }
        Ok(acc)
    }

    /// `sum_j (c_j(x) - c_j(inf)) (i xi)^j`, evaluated without cancellation.
    pub fn eval_perturbation(&self, x: XPoint, xi: f64) -> Result<Complex64, EvalError> {
        let s = i_times(xi);
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * s + c.perturbation_at(x)?;
        }
        Ok(acc)
    }

    /// Leading coefficient `c_order(x)`.
    pub fn leading(&self, x: XPoint) -> Result<Complex64, SymbolError> {
        let lead = self.coeffs.last().ok_or(SymbolError::NoPrincipal)?;
        Ok(lead.eval(x)?)
    }

    /// Principal symbol `c_order(x) (i xi)^order`.
    pub fn principal(&self, x: XPoint, xi: f64) -> Result<Complex64, SymbolError> {
        let k = self.order().ok_or(SymbolError::NoPrincipal)?;
        Ok(self.leading(x)? * cpowi(i_times(xi), k as u32))
    }

    /// Principal symbol, or zero for the zero symbol.
    pub fn principal_or_zero(&self, x: XPoint, xi: f64) -> Result<Complex64, EvalError> {
        match self.principal(x, xi) {
            Ok(v) => Ok(v),
            Err(SymbolError::Eval(e)) => Err(e),
            Err(_) => Ok(Complex64::new(0.0, 0.0)),
        }
    }

    /// The constant-coefficient polynomial obtained by dropping all
    /// perturbations.
    pub fn limit_poly(&self) -> Poly<f64> {
        Poly::new(self.coeffs.iter().map(|c| c.limit).collect())
    }

    pub fn check_decay(&self, x_far: f64, tol: f64) -> Result<(), SymbolError> {
        self.coeffs.iter().try_for_each(|c| c.check_decay(x_far, tol))
    }
}

/// Relation between the diagonal and off-diagonal order sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OrderCase {
    /// `m + q > n + p`
    Diag,
    /// `m + q = n + p`
    Balanced,
    /// `m + q < n + p`
    Offdiag,
}

/// Orders of the four entries; `None` marks a zero entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Orders {
    pub m: usize,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub q: usize,
}

impl Orders {
    /// `n + p`, minus infinity when either off-diagonal entry vanishes.
    pub fn offdiag_sum(&self) -> Option<usize> {
        Some(self.n? + self.p?)
    }

    pub fn kappa(&self) -> usize {
        let diag = self.m + self.q;
        self.offdiag_sum().map_or(diag, |s| s.max(diag))
    }

    pub fn case(&self) -> OrderCase {
        let diag = self.m + self.q;
        match self.offdiag_sum() {
            None => OrderCase::Diag,
            Some(s) if diag > s => OrderCase::Diag,
            Some(s) if diag == s => OrderCase::Balanced,
            Some(_) => OrderCase::Offdiag,
        }
    }
}

/// The 2x2 operator matrix `[[T_a, T_b], [T_c, T_d]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub a: DiffSymbol,
    pub b: DiffSymbol,
    pub c: DiffSymbol,
    pub d: DiffSymbol,
    orders: Orders,
}

impl OperatorMatrix {
    pub fn new(a: DiffSymbol, b: DiffSymbol, c: DiffSymbol, d: DiffSymbol) -> Result<Self, SymbolError> {
        let m = a.order().ok_or(SymbolError::ZeroDiagonal('a'))?;
        let q = d.order().ok_or(SymbolError::ZeroDiagonal('d'))?;
        if !(m >= q && q > 0) {
            return Err(SymbolError::Orders { m, q });
        }
        let orders = Orders { m, n: b.order(), p: c.order(), q };
        Ok(OperatorMatrix { a, b, c, d, orders })
    }

    pub fn orders(&self) -> Orders {
        self.orders
    }

    pub fn entries(&self) -> [(char, &DiffSymbol); 4] {
        [('a', &self.a), ('b', &self.b), ('c', &self.c), ('d', &self.d)]
    }

    /// Drops every perturbation.
    pub fn limiting_matrix(&self) -> LimitingMatrix<f64> {
        LimitingMatrix {
            a: self.a.limit_poly(),
            b: self.b.limit_poly(),
            c: self.c.limit_poly(),
            d: self.d.limit_poly(),
        }
    }

    /// Determinant of the principal symbol matrix, `a_m d_q - b_n c_p`.
    pub fn det_principal(&self, x: XPoint, xi: f64) -> Result<Complex64, EvalError> {
        let ad = self.a.principal_or_zero(x, xi)? * self.d.principal_or_zero(x, xi)?;
        let bc = self.b.principal_or_zero(x, xi)? * self.c.principal_or_zero(x, xi)?;
        Ok(ad - bc)
    }

    /// Whether every coefficient is constant.
    pub fn is_constant(&self) -> bool {
        self.entries()
            .iter()
            .all(|(_, s)| s.coeffs().iter().all(|c| c.perturbation.is_none()))
    }

    pub fn check_decay(&self, x_far: f64, tol: f64) -> Result<(), SymbolError> {
        self.entries().iter().try_for_each(|(_, s)| s.check_decay(x_far, tol))
    }
}

/// Constant-coefficient limit of the operator matrix: each entry is a
/// polynomial in `s = i xi`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitingMatrix<T> {
    pub a: Poly<T>,
    pub b: Poly<T>,
    pub c: Poly<T>,
    pub d: Poly<T>,
}

impl<T: Real> LimitingMatrix<T> {
    /// The 2x2 matrix at frequency `xi`, row-major.
    pub fn at(&self, xi: T) -> [[crate::scalar::Cplx<T>; 2]; 2] {
        [[self.a.eval_xi(xi), self.b.eval_xi(xi)], [self.c.eval_xi(xi), self.d.eval_xi(xi)]]
    }
}
