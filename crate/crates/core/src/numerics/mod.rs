//! Dense complex linear algebra and polynomial root finding.

mod eigen;
mod lu;
mod matrix;
mod roots;

use thiserror::Error;

pub use eigen::{eigenvalues, eigenvalues_with, hessenberg, EigenResult, QrOptions};
pub use lu::{determinant, Lu};
pub use matrix::Matrix;
pub use roots::{horner, poly_roots, poly_roots_companion, quadratic_roots, relative_residual};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericsError {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("empty matrix")]
    Empty,
    #[error("matrix is singular")]
    Singular,
    #[error("zero polynomial has no roots")]
    ZeroPolynomial,
    #[error("constant polynomial has no roots")]
    DegreeZero,
}

/// Pairs two equally sized point sets, closest pairs first, and returns
/// the largest distance among the pairs.
///
/// Used to compare eigenvalue multisets in tests and reports.
pub fn match_distance<T: crate::scalar::Real>(
    a: &[crate::scalar::Cplx<T>],
    b: &[crate::scalar::Cplx<T>],
) -> Option<T> {
    if a.len() != b.len() {
        return None;
    }
    let mut pairs: Vec<(T, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut worst = T::zero();
    let mut matched = 0;
    for (d, i, j) in pairs {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        worst = worst.max(d);
        matched += 1;
        if matched == a.len() {
            break;
        }
    }
    Some(worst)
}
