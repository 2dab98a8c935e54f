//! Dense univariate polynomials with complex coefficients.
//!
//! Used for constant-coefficient symbols, where the variable is `s = i*xi`.
//! Coefficients are stored low to high: `coeffs[k]` multiplies `s^k`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::{i_times, Cplx, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly<T> {
    coeffs: Vec<Cplx<T>>,
}

impl<T: Real> Poly<T> {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Cplx<T>) -> Self {
        Poly::new(vec![c])
    }

    /// Monomial `c * s^k`.
    pub fn monomial(c: Cplx<T>, k: usize) -> Self {
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); k + 1];
        coeffs[k] = c;
        Poly::new(coeffs)
    }

    /// Builds a polynomial from low-to-high coefficients, dropping exact
    /// trailing zeros.
    pub fn new(mut coeffs: Vec<Cplx<T>>) -> Self {
        while coeffs.last().is_some_and(|c| c.re == T::zero() && c.im == T::zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[Cplx<T>] {
        &self.coeffs
    }

    /// Coefficient of `s^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> Cplx<T> {
        self.coeffs.get(k).copied().unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Horner evaluation at `s`.
    pub fn eval(&self, s: Cplx<T>) -> Cplx<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * s + c)
    }

    /// Evaluation at `s = i*xi`.
    pub fn eval_xi(&self, xi: T) -> Cplx<T> {
        self.eval(i_times(xi))
    }

    /// Formal derivative with respect to `s`.
    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * T::lit(k as f64))
            .collect();
        Poly::new(coeffs)
    }

    pub fn scale(&self, factor: Cplx<T>) -> Self {
        Poly::new(self.coeffs.iter().map(|&c| c * factor).collect())
    }

    /// Largest coefficient magnitude, zero for the zero polynomial.
    pub fn max_abs_coeff(&self) -> T {
        self.coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max)
    }
}

impl<T: Real> Add for &Poly<T> {
    type Output = Poly<T>;

    fn add(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<T: Real> Sub for &Poly<T> {
    type Output = Poly<T>;

    fn sub(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<T: Real> Mul for &Poly<T> {
    type Output = Poly<T>;

    fn mul(self, rhs: &Poly<T>) -> Poly<T> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl<T: Real> Neg for &Poly<T> {
    type Output = Poly<T>;

    fn neg(self) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}
