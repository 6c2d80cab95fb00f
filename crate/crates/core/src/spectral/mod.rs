//! Periodic grid, spectral transforms and Fourier-multiplier operators.

mod field;
mod grid;
mod ops;
pub mod random;

pub use field::{
    mat_det, mat_inverse, mat_mul, mat_transpose, Mat3, ScalarField, Spectrum, TensorField33, VectorField, IDENTITY,
};
pub use grid::Grid;
pub use ops::{TensorSpectrum, VectorSpectrum, MEAN_TOLERANCE};
