//! Eigenvalues of dense complex matrices.
//!
//! Radix-2 balancing, Householder reduction to upper Hessenberg form, then
//! single-shift QR sweeps with Wilkinson shifts and deflation on small
//! subdiagonal entries. Only the active diagonal block is updated, since
//! eigenvectors are never formed.

use num_complex::Complex;
use serde::Serialize;

use super::matrix::Matrix;
use super::NumericsError;
use crate::scalar::{Cplx, Real};

#[derive(Debug, Clone, Copy)]
pub struct QrOptions<T> {
    /// Relative deflation tolerance.
    pub tol: T,
    /// Sweep budget per unit of dimension.
    pub sweeps_per_dim: usize,
    pub balance: bool,
}

impl<T: Real> Default for QrOptions<T> {
    fn default() -> Self {
        QrOptions { tol: T::lit(1e-12).max(T::epsilon() * T::lit(4.0)), sweeps_per_dim: 40, balance: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult<T> {
    pub eigenvalues: Vec<Cplx<T>>,
    /// Total QR sweeps.
    pub iterations: usize,
    pub converged: bool,
    /// Largest subdiagonal entry dropped at deflation.
    pub max_offdiag_residual: T,
    /// Entrywise 1-norm of the Hessenberg form; bounds every deflation
    /// threshold divided by `tol`.
    pub matrix_norm: T,
}

#[inline]
fn abs1<T: Real>(z: Cplx<T>) -> T {
    z.re.abs() + z.im.abs()
}

/// Diagonal similarity by powers of two equalising row and column norms.
/// Leaves eigenvalues exactly unchanged.
fn balance<T: Real>(a: &mut Matrix<T>) {
    let n = a.dim();
    let radix = T::lit(2.0);
    let sqrdx = radix * radix;
    for _ in 0..64 {
        let mut done = true;
        for i in 0..n {
            let mut c = T::zero();
            let mut r = T::zero();
            for j in 0..n {
                if j != i {
                    c += abs1(a[(j, i)]);
                    r += abs1(a[(i, j)]);
                }
            }
            if c == T::zero() || r == T::zero() {
                continue;
            }
            let s = c + r;
            let mut f = T::one();
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < T::lit(0.95) * s {
                done = false;
                let ginv = T::one() / f;
                for j in 0..n {
                    a[(i, j)] *= ginv;
                    a[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
pub fn hessenberg<T: Real>(h: &mut Matrix<T>) {
    let n = h.dim();
    if n < 3 {
        return;
    }
    let zero = Complex::new(T::zero(), T::zero());
    let two = T::lit(2.0);
    let mut v = vec![zero; n];
    for k in 0..n - 2 {
        let norm_x = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt();
        if norm_x == T::zero() {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == T::zero() { Complex::new(T::one(), T::zero()) } else { x0 / x0.norm() };
        let alpha = -phase * norm_x;
        for i in k + 1..n {
            v[i] = h[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm = (k + 1..n).map(|i| v[i].norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt();
        if vnorm == T::zero() {
            continue;
        }
        for vi in &mut v[k + 1..n] {
            *vi /= vnorm;
        }
        // H <- (I - 2 v v^H) H
        for j in k..n {
            let mut dot = zero;
            for i in k + 1..n {
                dot += v[i].conj() * h[(i, j)];
            }
            let dot = dot * two;
            for i in k + 1..n {
                let vi = v[i];
                h[(i, j)] -= vi * dot;
            }
        }
        // H <- H (I - 2 v v^H)
        for i in 0..n {
            let mut dot = zero;
            for j in k + 1..n {
                dot += h[(i, j)] * v[j];
            }
            let dot = dot * two;
            for j in k + 1..n {
                let vj = v[j].conj();
                h[(i, j)] -= dot * vj;
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = zero;
        }
    }
}

/// Rotation `[[c, s], [-conj(s), c]]` mapping `(a, b)` to `(r, 0)`.
fn givens<T: Real>(a: Cplx<T>, b: Cplx<T>) -> (T, Cplx<T>) {
    let nb = b.norm();
    if nb == T::zero() {
        return (T::one(), Complex::new(T::zero(), T::zero()));
    }
    let na = a.norm();
    if na == T::zero() {
        return (T::zero(), b.conj() / nb);
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

fn wilkinson_shift<T: Real>(a: Cplx<T>, b: Cplx<T>, c: Cplx<T>, d: Cplx<T>) -> Cplx<T> {
    let half = T::lit(0.5);
    let mean = (a + d) * half;
    let diff = (a - d) * half;
    let disc = (diff * diff + b * c).sqrt();
    let mu1 = mean + disc;
    let mu2 = mean - disc;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

/// Eigenvalues with default options.
pub fn eigenvalues<T: Real>(m: &Matrix<T>) -> Result<EigenResult<T>, NumericsError> {
    eigenvalues_with(m, QrOptions::default())
}

pub fn eigenvalues_with<T: Real>(m: &Matrix<T>, opts: QrOptions<T>) -> Result<EigenResult<T>, NumericsError> {
    let n = m.dim();
    if n == 0 {
        return Err(NumericsError::Empty);
    }
    if !m.is_finite() {
        return Err(NumericsError::NonFinite);
    }
    let mut h = m.clone();
    if opts.balance {
        balance(&mut h);
    }
    hessenberg(&mut h);

    let matrix_norm = h.as_slice().iter().map(|z| z.norm()).fold(T::zero(), |a, b| a + b);
    let zero = Complex::new(T::zero(), T::zero());
    let mut eig = vec![zero; n];
    let max_iter = opts.sweeps_per_dim * n;
    let mut iterations = 0usize;
    let mut since_deflation = 0usize;
    let mut converged = true;
    let mut max_res = T::zero();
    let mut rot: Vec<(T, Cplx<T>)> = Vec::with_capacity(n);
    let tiny = T::min_positive_value();

    let mut hi = n - 1;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let mut s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if s == T::zero() {
                s = matrix_norm;
            }
            if sub <= opts.tol * s || sub <= tiny {
                max_res = max_res.max(sub);
                h[(l, l - 1)] = zero;
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if iterations >= max_iter {
            converged = false;
            for (i, e) in eig.iter_mut().enumerate().take(hi + 1) {
                *e = h[(i, i)];
            }
            break;
        }
        iterations += 1;
        since_deflation += 1;

        let mu = if since_deflation.is_multiple_of(10) {
            h[(hi, hi)] + Complex::new(T::lit(0.75) * h[(hi, hi - 1)].norm(), T::zero())
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for k in l..=hi {
            h[(k, k)] -= mu;
        }
        rot.clear();
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rot.push((c, s));
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = y * c - s.conj() * x;
            }
            h[(k + 1, k)] = zero;
        }
        for (idx, &(c, s)) in rot.iter().enumerate() {
            let k = l + idx;
            let top = (k + 2).min(hi);
            for i in l..=top {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = y * c - x * s;
            }
        }
        for k in l..=hi {
            h[(k, k)] += mu;
        }
    }

    Ok(EigenResult { eigenvalues: eig, iterations, converged, max_offdiag_residual: max_res, matrix_norm })
}
