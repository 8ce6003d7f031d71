//! Scalar fields, dual numbers and small dense matrices.

mod dual;
mod field;
mod matrix;

pub use dual::{derivative_of, Dual, D1, D2};
pub use field::{central_difference, epsilon, set_epsilon, Field, RealField};
pub use matrix::{max_abs, max_abs_diff, Matrix};
pub use num_complex::Complex64 as C64;

/// Invert a square matrix, failing when its determinant is below the global epsilon.
pub fn mat_inverse<S: Field>(m: &Matrix<S>) -> crate::Result<Matrix<S>> {
    m.inverse()
}
