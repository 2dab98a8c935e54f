//! Schur-complement symbols, the limiting spectral pencil and the data
//! needed to interpret its zero set.
//!
//! For the first Schur complement the symbol is
//! `a - lambda - b c / (d - lambda)`; clearing the denominator of its
//! constant-coefficient limit gives the pencil
//! `P(lambda, xi) = lambda^2 + A(xi) lambda + B(xi) = det(M_inf(xi) - lambda)`
//! with `A = -(a + d)` and `B = a d - b c`. The second complement swaps the
//! roles of `a` and `d` and clears to the same pencil.

use std::collections::HashMap;

use num_complex::{Complex, Complex64};
use serde::Serialize;
use thiserror::Error;

use crate::expr::EvalError;
use crate::numerics::quadratic_roots;
use crate::poly::Poly;
use crate::scalar::{i_times, japanese, Cplx, Real};
use crate::symbols::{LimitingMatrix, OperatorMatrix, OrderCase, SymbolError, XPoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchurError {
    #[error("resolvent pole: denominator {0:e} is within tolerance of zero")]
    Pole(f64),
    #[error("probe {probe} lies within {distance:e} of the resolvent curve (guard {guard})")]
    PoleGuard { probe: Complex64, distance: f64, guard: f64 },
    #[error("omega-condition requires film-template operator: {0}")]
    Template(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Complement {
    /// `a - lambda - b (d - lambda)^-1 c`
    First,
    /// `d - lambda - c (a - lambda)^-1 b`
    Second,
}

pub const DEFAULT_POLE_TOL: f64 = 1e-12;

fn schur_value<T: Real>(
    a: Cplx<T>,
    b: Cplx<T>,
    c: Cplx<T>,
    d: Cplx<T>,
    which: Complement,
    lam: Cplx<T>,
    pole_tol: T,
) -> Result<Cplx<T>, T> {
    let (main, other) = match which {
        Complement::First => (a, d),
        Complement::Second => (d, a),
    };
    let den = other - lam;
    if den.norm() <= pole_tol {
        return Err(den.norm());
    }
    let coupling = if which == Complement::First { b * c } else { c * b };
    Ok(main - lam - coupling / den)
}

/// Schur-complement symbol at `(x, xi)`, using pointwise products of the
/// entry symbols. At infinity this is exactly the limiting symbol.
pub fn schur_symbol(
    t: &OperatorMatrix,
    which: Complement,
    lam: Complex64,
    x: XPoint,
    xi: f64,
    pole_tol: f64,
) -> Result<Complex64, SchurError> {
    let a = t.a.eval(x, xi)?;
    let b = t.b.eval(x, xi)?;
    let c = t.c.eval(x, xi)?;
    let d = t.d.eval(x, xi)?;
    schur_value(a, b, c, d, which, lam, pole_tol).map_err(SchurError::Pole)
}

/// Limiting Schur symbol evaluated at an arbitrary complex `s` standing in
/// for `i xi`.
pub fn limiting_schur_symbol<T: Real>(
    l: &LimitingMatrix<T>,
    which: Complement,
    lam: Cplx<T>,
    s: Cplx<T>,
    pole_tol: T,
) -> Result<Cplx<T>, T> {
    schur_value(l.a.eval(s), l.b.eval(s), l.c.eval(s), l.d.eval(s), which, lam, pole_tol)
}

/// Principal symbol of the first Schur complement; it does not depend on
/// `lambda`.
pub fn principal_schur_symbol(t: &OperatorMatrix, x: XPoint, xi: f64) -> Result<Complex64, SchurError> {
    let am = t.a.principal(x, xi)?;
    let case = t.orders().case();
    if case == OrderCase::Diag {
        return Ok(am);
    }
    let dq = t.d.principal(x, xi)?;
    if dq.norm() <= DEFAULT_POLE_TOL {
        return Err(SchurError::Pole(dq.norm()));
    }
    let coupling = t.b.principal(x, xi)? * t.c.principal(x, xi)? / dq;
    Ok(match case {
        OrderCase::Balanced => am - coupling,
        _ => -coupling,
    })
}

/// `P(lambda, xi) = lambda^2 + linear(i xi) lambda + constant(i xi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralPencil<T> {
    /// `-(a + d)`
    pub linear: Poly<T>,
    /// `a d - b c`
    pub constant: Poly<T>,
}

impl<T: Real> SpectralPencil<T> {
    pub fn eval(&self, lam: Cplx<T>, xi: T) -> Cplx<T> {
        self.eval_s(lam, i_times(xi))
    }

    pub fn eval_s(&self, lam: Cplx<T>, s: Cplx<T>) -> Cplx<T> {
        lam * lam + self.linear.eval(s) * lam + self.constant.eval(s)
    }

    /// `|lambda|^2 + |A| |lambda| + |B|`, the natural scale of `P`.
    pub fn scale(&self, lam: Cplx<T>, xi: T) -> T {
        let r = lam.norm();
        r * r + self.linear.eval_xi(xi).norm() * r + self.constant.eval_xi(xi).norm()
    }

    /// Both roots in `lambda` at frequency `xi`.
    pub fn roots_at(&self, xi: T) -> [Cplx<T>; 2] {
        let one = Complex::new(T::one(), T::zero());
        quadratic_roots(one, self.linear.eval_xi(xi), self.constant.eval_xi(xi))
    }

    /// `d lambda / d xi` along a root, or `None` at a branch point.
    pub fn root_speed(&self, lam: Cplx<T>, xi: T) -> Option<T> {
        let s = i_times(xi);
        let i = Complex::new(T::zero(), T::one());
        let dp_dxi = i * (self.linear.derivative().eval(s) * lam + self.constant.derivative().eval(s));
        let dp_dlam = lam * T::lit(2.0) + self.linear.eval(s);
        let speed = (dp_dxi / dp_dlam).norm();
        (dp_dlam.norm() > T::zero() && speed.is_finite()).then_some(speed)
    }
}

/// Pencil by polynomial arithmetic on the limiting entries.
pub fn build_pencil<T: Real>(l: &LimitingMatrix<T>) -> SpectralPencil<T> {
    SpectralPencil {
        linear: -&(&l.a + &l.d),
        constant: &(&l.a * &l.d) - &(&l.b * &l.c),
    }
}

/// Pencil recovered numerically from the limiting Schur symbol: sample
/// `(other - lambda) * S(lambda, s)` on three `lambda` values and on roots
/// of unity in `s`, then invert both discrete Fourier transforms.
///
/// Independent of [`build_pencil`]; used to cross-check it.
pub fn pencil_by_interpolation<T: Real>(l: &LimitingMatrix<T>, which: Complement) -> SpectralPencil<T> {
    let deg = |p: &Poly<T>| p.degree().unwrap_or(0);
    let bound = (deg(&l.a) + deg(&l.d)).max(deg(&l.b) + deg(&l.c)).max(deg(&l.a)).max(deg(&l.d));
    let n = bound + 1;
    let two_pi = T::PI() + T::PI();
    let nodes: Vec<Cplx<T>> = (0..n)
        .map(|k| Complex::from_polar(T::one(), two_pi * T::lit(k as f64) / T::lit(n as f64)))
        .collect();
    let radius = T::one()
        + T::lit(2.0)
            * nodes
                .iter()
                .map(|&s| l.a.eval(s).norm() + l.d.eval(s).norm())
                .fold(T::zero(), T::max);
    let lams: Vec<Cplx<T>> = (0..3)
        .map(|j| Complex::from_polar(radius, two_pi * T::lit(j as f64) / T::lit(3.0)))
        .collect();

    let mut lin_vals = Vec::with_capacity(n);
    let mut const_vals = Vec::with_capacity(n);
    for &s in &nodes {
        let other = match which {
            Complement::First => l.d.eval(s),
            Complement::Second => l.a.eval(s),
        };
        let cleared: Vec<Cplx<T>> = lams
            .iter()
            .map(|&lam| {
                let v = limiting_schur_symbol(l, which, lam, s, T::zero()).expect("probe radius avoids poles");
                (other - lam) * v
            })
            .collect();
        // cleared(lambda) = c0 + c1 lambda + c2 lambda^2; recover c_m
        let coeff = |m: usize| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (j, &v) in cleared.iter().enumerate() {
                acc += v * Complex::from_polar(T::one(), -two_pi * T::lit((j * m) as f64) / T::lit(3.0));
            }
            acc / (T::lit(3.0) * radius.powi(m as i32))
        };
        // (other - lambda) S = lambda^2 + A lambda + B up to the sign of
        // the clearing factor; the lambda^2 coefficient fixes it
        let c2 = coeff(2);
        lin_vals.push(coeff(1) / c2);
        const_vals.push(coeff(0) / c2);
    }
    let inverse_dft = |vals: &[Cplx<T>]| {
        let coeffs: Vec<Cplx<T>> = (0..n)
            .map(|m| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (k, &v) in vals.iter().enumerate() {
                    acc += v * Complex::from_polar(T::one(), -two_pi * T::lit((k * m) as f64) / T::lit(n as f64));
                }
                acc / T::lit(n as f64)
            })
            .collect();
        Poly::new(coeffs)
    };
    SpectralPencil { linear: inverse_dft(&lin_vals), constant: inverse_dft(&const_vals) }
}

/// Default stabilization probe: `1 + max(1, 2 max_{|xi| <= 1} |d_inf(xi)|)`
/// on the real axis.
pub fn default_probe(l: &LimitingMatrix<f64>) -> Complex64 {
    let dmax = (0..=200)
        .map(|k| l.d.eval_xi(-1.0 + k as f64 / 100.0).norm())
        .fold(0.0, f64::max);
    Complex64::new(1.0 + f64::max(1.0, 2.0 * dmax), 0.0)
}

/// `sup_xi <xi>^(q - kappa) |S_1(lambda; x, xi) - S_1(lambda; inf, xi)|`.
///
/// The difference is assembled from the perturbations directly rather than
/// by subtracting two nearly equal symbols, so tiny far-field perturbations
/// are resolved instead of being lost to rounding.
pub fn stabilization_metric(
    t: &OperatorMatrix,
    probe: Complex64,
    x: f64,
    xi_grid: &[f64],
    pole_guard: f64,
) -> Result<f64, SchurError> {
    let at = XPoint::At(x);
    let inf = XPoint::Infinity;
    let mut guard_dist = f64::INFINITY;
    for &xi in xi_grid {
        guard_dist = guard_dist
            .min((t.d.eval(inf, xi)? - probe).norm())
            .min((t.d.eval(at, xi)? - probe).norm());
    }
    if guard_dist < pole_guard {
        return Err(SchurError::PoleGuard { probe, distance: guard_dist, guard: pole_guard });
    }
    let o = t.orders();
    let weight_order = o.kappa() as i32 - o.q as i32;
    let mut sup: f64 = 0.0;
    for &xi in xi_grid {
        let da = t.a.eval_perturbation(at, xi)?;
        let db = t.b.eval_perturbation(at, xi)?;
        let dc = t.c.eval_perturbation(at, xi)?;
        let dd = t.d.eval_perturbation(at, xi)?;
        let b_inf = t.b.eval(inf, xi)?;
        let c_inf = t.c.eval(inf, xi)?;
        let d_inf = t.d.eval(inf, xi)?;
        let res_inf = d_inf - probe;
        let res_x = res_inf + dd;
        let dbc = b_inf * dc + db * c_inf + db * dc;
        // b c/(d - l) at x minus at infinity, over a common denominator
        let coupling = (dbc * res_inf - b_inf * c_inf * dd) / (res_x * res_inf);
        let diff = da - coupling;
        sup = sup.max(diff.norm() / japanese(xi).powi(weight_order));
    }
    Ok(sup)
}

/// A refined point of `sigma(T_a-bar) ∩ sigma(T_d-bar)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaPoint {
    pub lambda: Complex64,
    pub xi_a: f64,
    pub xi_d: f64,
    /// `|a_inf(xi_a) - d_inf(xi_d)|`
    pub residual: f64,
    /// The refinement Jacobian is numerically singular: the curves touch
    /// or one parametrisation is stationary at the meeting point.
    pub tangential: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExceptionalSet {
    pub curve_a: Vec<Complex64>,
    pub curve_d: Vec<Complex64>,
    pub lambda_set: Vec<LambdaPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionOptions {
    pub coarse_tol: f64,
    pub refine_tol: f64,
    pub max_iter: usize,
}

impl Default for IntersectionOptions {
    fn default() -> Self {
        IntersectionOptions { coarse_tol: 1e-2, refine_tol: 1e-10, max_iter: 200 }
    }
}

/// Hash of points into square cells of side `cell`.
pub(crate) struct CellIndex {
    cell: f64,
    map: HashMap<(i64, i64), Vec<usize>>,
}

impl CellIndex {
    pub(crate) fn new(points: &[Complex64], cell: f64) -> Self {
        let mut map: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (k, z) in points.iter().enumerate() {
            if z.re.is_finite() && z.im.is_finite() {
                map.entry(Self::key(cell, *z)).or_default().push(k);
            }
        }
        CellIndex { cell, map }
    }

    fn key(cell: f64, z: Complex64) -> (i64, i64) {
        ((z.re / cell).floor() as i64, (z.im / cell).floor() as i64)
    }

    /// Indices of stored points in the 3x3 block of cells around `z`;
    /// a superset of the points within distance `cell`.
    pub(crate) fn near(&self, z: Complex64) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = Self::key(self.cell, z);
        (-1..=1).flat_map(move |di| {
            (-1..=1).flat_map(move |dj| self.map.get(&(i + di, j + dj)).into_iter().flatten().copied())
        })
    }
}

fn refine_intersection(
    l: &LimitingMatrix<f64>,
    da: &Poly<f64>,
    dd: &Poly<f64>,
    mut u: f64,
    mut v: f64,
    opts: &IntersectionOptions,
) -> Option<LambdaPoint> {
    let i = Complex64::new(0.0, 1.0);
    let resid = |u: f64, v: f64| l.a.eval_xi(u) - l.d.eval_xi(v);
    let mut f = resid(u, v);
    let mut mu = 0.0;
    let mut jac = [[0.0; 2]; 2];
    for _ in 0..opts.max_iter {
        // columns: dF/du = i a'(iu), dF/dv = -i d'(iv), split into re/im rows
        let fu = i * da.eval_xi(u);
        let fv = -i * dd.eval_xi(v);
        jac = [[fu.re, fv.re], [fu.im, fv.im]];
        if f.norm() <= opts.refine_tol {
            break;
        }
        let jtj = [
            [jac[0][0] * jac[0][0] + jac[1][0] * jac[1][0], jac[0][0] * jac[0][1] + jac[1][0] * jac[1][1]],
            [jac[0][1] * jac[0][0] + jac[1][1] * jac[1][0], jac[0][1] * jac[0][1] + jac[1][1] * jac[1][1]],
        ];
        let jtr = [jac[0][0] * f.re + jac[1][0] * f.im, jac[0][1] * f.re + jac[1][1] * f.im];
        let scale = jtj[0][0].max(jtj[1][1]).max(f64::MIN_POSITIVE);
        let mut accepted = false;
        for _ in 0..40 {
            let m00 = jtj[0][0] + mu;
            let m11 = jtj[1][1] + mu;
            let det = m00 * m11 - jtj[0][1] * jtj[1][0];
            if det.abs() > 1e-300 {
                let du = -(m11 * jtr[0] - jtj[0][1] * jtr[1]) / det;
                let dv = -(m00 * jtr[1] - jtj[1][0] * jtr[0]) / det;
                let fnew = resid(u + du, v + dv);
                if fnew.norm() < f.norm() {
                    u += du;
                    v += dv;
                    f = fnew;
                    mu /= 3.0;
                    accepted = true;
                    break;
                }
            }
            mu = if mu == 0.0 { 1e-12 * scale } else { mu * 4.0 };
        }
        if !accepted {
            break;
        }
    }
    if f.norm() > opts.refine_tol || !u.is_finite() || !v.is_finite() {
        return None;
    }
    // singular values of the 2x2 Jacobian
    let det = (jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]).abs();
    let fro2 = jac.iter().flatten().map(|v| v * v).sum::<f64>();
    let sigma_max = ((fro2 + (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt();
    let sigma_min = if sigma_max > 0.0 { det / sigma_max } else { 0.0 };
    let lam_a = l.a.eval_xi(u);
    let lam_d = l.d.eval_xi(v);
    Some(LambdaPoint {
        lambda: (lam_a + lam_d) * 0.5,
        xi_a: u,
        xi_d: v,
        residual: f.norm(),
        tangential: sigma_min <= 10.0 * opts.refine_tol.sqrt() * sigma_max.max(1.0),
    })
}

/// Samples both diagonal curves and refines their intersections.
pub fn exceptional_sets(l: &LimitingMatrix<f64>, xi_grid: &[f64], opts: &IntersectionOptions) -> ExceptionalSet {
    let curve_a: Vec<Complex64> = xi_grid.iter().map(|&xi| l.a.eval_xi(xi)).collect();
    let curve_d: Vec<Complex64> = xi_grid.iter().map(|&xi| l.d.eval_xi(xi)).collect();
    let da = l.a.derivative();
    let dd = l.d.derivative();

    let index = CellIndex::new(&curve_d, opts.coarse_tol);
    let dedup_radius = opts.refine_tol * 10.0;
    let mut found: Vec<LambdaPoint> = Vec::new();
    let mut seen = HashMap::<(i64, i64), Vec<usize>>::new();
    for (j, &za) in curve_a.iter().enumerate() {
        for k in index.near(za) {
            if (za - curve_d[k]).norm() > opts.coarse_tol {
                continue;
            }
            let Some(pt) = refine_intersection(l, &da, &dd, xi_grid[j], xi_grid[k], opts) else {
                continue;
            };
            let key = CellIndex::key(dedup_radius, pt.lambda);
            let dup = (-1..=1).any(|di| {
                (-1..=1).any(|dj| {
                    seen.get(&(key.0 + di, key.1 + dj))
                        .is_some_and(|v| v.iter().any(|&m| (found[m].lambda - pt.lambda).norm() < dedup_radius))
                })
            });
            if !dup {
                seen.entry(key).or_default().push(found.len());
                found.push(pt);
            }
        }
    }
    ExceptionalSet { curve_a, curve_d, lambda_set: found }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaReport {
    pub omega1: f64,
    pub omega2: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Sufficient condition for an empty exceptional set when `T_a` has the
/// form `k2 D^2 + phi1 D + phi0` with constant real `k2 > 0`:
/// `omega1 = -sup Re phi0 > 0` and `omega2 = sup |phi1| < sqrt(2 k2 omega1)`.
pub fn omega_condition(t: &OperatorMatrix, xs: &[f64]) -> Result<OmegaReport, SchurError> {
    let coeffs = t.a.coeffs();
    if coeffs.len() != 3 {
        return Err(SchurError::Template(format!("T_a has order {}, expected 2", coeffs.len().saturating_sub(1))));
    }
    let lead = &coeffs[2];
    if lead.perturbation.is_some() || lead.limit.im != 0.0 || lead.limit.re <= 0.0 {
        return Err(SchurError::Template("leading coefficient of T_a must be a positive real constant".into()));
    }
    let k2 = lead.limit.re;
    let points = xs.iter().map(|&x| XPoint::At(x)).chain(std::iter::once(XPoint::Infinity));
    let mut sup_phi0 = f64::NEG_INFINITY;
    let mut sup_phi1: f64 = 0.0;
    for x in points {
        let phi0 = coeffs[0].eval(x)?;
        if phi0.im.abs() > 1e-12 * phi0.re.abs().max(1.0) {
            return Err(SchurError::Template(format!("phi0 is not real-valued ({phi0})")));
        }
        sup_phi0 = sup_phi0.max(phi0.re);
        sup_phi1 = sup_phi1.max(coeffs[1].eval(x)?.norm());
    }
    let omega1 = -sup_phi0;
    let omega2 = sup_phi1;
    // 9 eta / delta = 2 k2
    let bound = (2.0 * k2 * omega1).max(0.0).sqrt();
    Ok(OmegaReport { omega1, omega2, bound, holds: omega1 > 0.0 && omega2 < bound })
}
