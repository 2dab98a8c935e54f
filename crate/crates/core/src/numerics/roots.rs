//! Polynomial roots.
//!
//! Degrees one and two are solved in closed form; the quadratic uses the
//! cancellation-free variant (larger root first, smaller from the product).
//! Higher degrees go through companion-matrix eigenvalues followed by one
//! Newton step on the original polynomial.

use num_complex::Complex;

use super::eigen::eigenvalues;
use super::matrix::Matrix;
use super::NumericsError;
use crate::scalar::{Cplx, Real};

fn is_zero<T: Real>(z: Cplx<T>) -> bool {
    z.re == T::zero() && z.im == T::zero()
}

/// Strips leading zeros; returns the trimmed coefficients (high to low)
/// and the number of roots at the origin split off from trailing zeros.
fn normalise<T: Real>(coeffs: &[Cplx<T>]) -> Result<(Vec<Cplx<T>>, usize), NumericsError> {
    let start = coeffs.iter().position(|&c| !is_zero(c)).ok_or(NumericsError::ZeroPolynomial)?;
    let trimmed = &coeffs[start..];
    if trimmed.len() < 2 {
        return Err(NumericsError::DegreeZero);
    }
    let zeros = trimmed.iter().rev().take_while(|&&c| is_zero(c)).count();
    Ok((trimmed[..trimmed.len() - zeros].to_vec(), zeros))
}

/// Horner evaluation of high-to-low coefficients; also returns the
/// derivative.
pub fn horner<T: Real>(coeffs: &[Cplx<T>], z: Cplx<T>) -> (Cplx<T>, Cplx<T>) {
    let zero = Complex::new(T::zero(), T::zero());
    coeffs.iter().fold((zero, zero), |(p, dp), &c| (p * z + c, dp * z + p))
}

/// `|p(z)| / sum_k |c_k| |z|^k`, the backward-error scale of a root.
pub fn relative_residual<T: Real>(coeffs: &[Cplx<T>], z: Cplx<T>) -> T {
    let (p, _) = horner(coeffs, z);
    let r = z.norm();
    let scale = coeffs.iter().fold(T::zero(), |acc, c| acc * r + c.norm());
    if scale == T::zero() {
        return p.norm();
    }
    p.norm() / scale
}

/// Roots of `a z^2 + b z + c`.
pub fn quadratic_roots<T: Real>(a: Cplx<T>, b: Cplx<T>, c: Cplx<T>) -> [Cplx<T>; 2] {
    let disc = (b * b - a * c * T::lit(4.0)).sqrt();
    // pick the sign that avoids cancellation in -b -+ disc
    let q = if (b.conj() * disc).re >= T::zero() {
        -(b + disc) * T::lit(0.5)
    } else {
        -(b - disc) * T::lit(0.5)
    };
    if is_zero(q) {
        let z = Complex::new(T::zero(), T::zero());
        return [z, z];
    }
    [q / a, c / q]
}

fn companion<T: Real>(coeffs: &[Cplx<T>]) -> Matrix<T> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[0];
    let mut m = Matrix::zeros(deg);
    for j in 0..deg {
        m[(0, j)] = -coeffs[j + 1] / lead;
    }
    for i in 1..deg {
        m[(i, i - 1)] = Complex::new(T::one(), T::zero());
    }
    m
}

fn companion_roots<T: Real>(coeffs: &[Cplx<T>]) -> Result<Vec<Cplx<T>>, NumericsError> {
    let res = eigenvalues(&companion(coeffs))?;
    let mut roots = res.eigenvalues;
    for r in &mut roots {
        let (p, dp) = horner(coeffs, *r);
        if is_zero(dp) {
            continue;
        }
        let polished = *r - p / dp;
        if polished.re.is_finite()
            && polished.im.is_finite()
            && relative_residual(coeffs, polished) < relative_residual(coeffs, *r)
        {
            *r = polished;
        }
    }
    Ok(roots)
}

/// All roots, with multiplicity, of the polynomial with coefficients given
/// highest degree first.
pub fn poly_roots<T: Real>(coeffs: &[Cplx<T>]) -> Result<Vec<Cplx<T>>, NumericsError> {
    let (core, zeros) = normalise(coeffs)?;
    let mut roots = vec![Complex::new(T::zero(), T::zero()); zeros];
    match core.len() {
        1 => {}
        2 => roots.push(-core[1] / core[0]),
        3 => roots.extend(quadratic_roots(core[0], core[1], core[2])),
        _ => roots.extend(companion_roots(&core)?),
    }
    Ok(roots)
}

/// Like [`poly_roots`] but always through the companion matrix, for any
/// degree.
pub fn poly_roots_companion<T: Real>(coeffs: &[Cplx<T>]) -> Result<Vec<Cplx<T>>, NumericsError> {
    let (core, zeros) = normalise(coeffs)?;
    let mut roots = vec![Complex::new(T::zero(), T::zero()); zeros];
    if core.len() > 1 {
        roots.extend(companion_roots(&core)?);
    }
    Ok(roots)
}
