//! Real scalar abstraction shared by the numerical kernels.
//!
//! The polynomial, pencil and eigenvalue code is written against [`Real`]
//! so it runs in `f32` or `f64`. Everything that touches parsed
//! expressions or configuration works in `f64` (see the aliases in the
//! crate root).

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, NumAssign};

/// A real floating-point scalar usable by the numerical kernels.
pub trait Real:
    Float + FloatConst + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Lossy for narrower types.
    fn lit(v: f64) -> Self;

    fn to_f64_lossy(self) -> f64;
}

impl Real for f64 {
    #[inline]
    fn lit(v: f64) -> Self {
        v
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Real for f32 {
    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

/// Complex number over a [`Real`] scalar.
pub type Cplx<T> = Complex<T>;

/// `i * xi`, the Fourier variable of a differential symbol.
#[inline]
pub fn i_times<T: Real>(xi: T) -> Cplx<T> {
    Complex::new(T::zero(), xi)
}

/// Japanese bracket `(1 + xi^2)^(1/2)`.
#[inline]
pub fn japanese<T: Real>(xi: T) -> T {
    (T::one() + xi * xi).sqrt()
}

/// Integer power of a complex number by repeated squaring.
///
/// Exact for the small powers of `i` that dominate symbol evaluation,
/// unlike `powf`.
pub fn cpowi<T: Real>(z: Cplx<T>, n: u32) -> Cplx<T> {
    let mut base = z;
    let mut acc = Complex::new(T::one(), T::zero());
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}
