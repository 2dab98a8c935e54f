use num_complex::Complex;

use super::matrix::Matrix;
use super::NumericsError;
use crate::scalar::{Cplx, Real};

/// LU factorisation with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    sign: T,
    singular: bool,
}

impl<T: Real> Lu<T> {
    pub fn new(a: &Matrix<T>) -> Result<Self, NumericsError> {
        if !a.is_finite() {
            return Err(NumericsError::NonFinite);
        }
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        let mut singular = false;
        for k in 0..n {
            let (piv, best) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -T::one()), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            if best == T::zero() {
                singular = true;
                continue;
            }
            if piv != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = tmp;
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f.re == T::zero() && f.im == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Lu { lu, perm, sign, singular })
    }

    pub fn det(&self) -> Cplx<T> {
        if self.singular {
            return Complex::new(T::zero(), T::zero());
        }
        (0..self.lu.dim()).fold(Complex::new(self.sign, T::zero()), |acc, i| acc * self.lu[(i, i)])
    }

    pub fn solve(&self, rhs: &[Cplx<T>]) -> Result<Vec<Cplx<T>>, NumericsError> {
        if self.singular {
            return Err(NumericsError::Singular);
        }
        let n = self.lu.dim();
        let mut y: Vec<Cplx<T>> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                y[i] = y[i] - l * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[(i, j)];
                y[i] = y[i] - u * y[j];
            }
            y[i] /= self.lu[(i, i)];
        }
        Ok(y)
    }

    pub fn inverse(&self) -> Result<Matrix<T>, NumericsError> {
        let n = self.lu.dim();
        let mut inv = Matrix::zeros(n);
        let mut e = vec![Complex::new(T::zero(), T::zero()); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = Complex::new(T::zero(), T::zero()));
            e[j] = Complex::new(T::one(), T::zero());
            let col = self.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }
}

/// Determinant by LU with partial pivoting.
pub fn determinant<T: Real>(a: &Matrix<T>) -> Result<Cplx<T>, NumericsError> {
    Ok(Lu::new(a)?.det())
}
