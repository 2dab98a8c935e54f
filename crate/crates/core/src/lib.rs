pub mod cli;
pub mod config;
pub mod ellipticity;
pub mod expr;
pub mod numerics;
pub mod poly;
pub mod presets;
pub mod scalar;
pub mod schur;
pub mod spectrum;
pub mod svg;
pub mod symbols;
pub mod validate;

pub use num_complex::Complex64;

/// Double-precision instances of the generic numerical types.
pub type ComplexMatrix = numerics::Matrix<f64>;
pub type EigenResult = numerics::EigenResult<f64>;
pub type Polynomial = poly::Poly<f64>;
pub type LimitingMatrix = symbols::LimitingMatrix<f64>;
pub type SpectralPencil = schur::SpectralPencil<f64>;
