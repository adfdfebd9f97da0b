//! Dense kernels over small real and complex square matrices.

mod eigen;
mod expm;
pub mod lu;
mod lyapunov;
mod matrix;

use num_complex::Complex;

pub use eigen::{eig_general, eig_hermitian, eig_symmetric, inv_sqrtm_spd, sqrtm_spd, Spectrum};
pub use expm::expm;
pub use lyapunov::{lyapunov_residual, solve_lyapunov};
pub use matrix::{symplectic_form, symplectic_unit, Matrix};

use crate::error::Result;
use crate::scalar::Real;
use crate::tolerances::Tolerances;

pub fn frobenius_norm<T: Real>(x: &Matrix<T>) -> T {
    x.frobenius_norm()
}

/// Largest real part over the spectrum of `a`.
pub fn max_real_part<T: Real>(a: &Matrix<T>) -> Result<T> {
    Ok(eig_general(a)?.max_real_part())
}

/// True iff `max Re λ(A) < −1e−12`.
pub fn is_hurwitz<T: Real>(a: &Matrix<T>) -> Result<bool> {
    Ok(max_real_part(a)? < -T::lit(Tolerances::DEFAULT.hurwitz))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_hermitian_eigenvalue<T: Real>(x: &Matrix<Complex<T>>) -> Result<T> {
    let spec = eig_hermitian(x)?;
    Ok(spec.eigenvalues.last().map(|z| z.re).unwrap_or(T::zero()))
}

/// Positive semidefiniteness up to `λ_min ≥ −1e−8·(1 + ‖X‖_F)`.
pub fn psd_check<T: Real>(x: &Matrix<Complex<T>>) -> Result<bool> {
    let min = min_hermitian_eigenvalue(x)?;
    Ok(min >= -T::lit(Tolerances::DEFAULT.psd) * (T::one() + x.frobenius_norm()))
}

/// `P + iΘ` as a complex matrix.
pub fn quantum_covariance<T: Real>(p: &Matrix<T>, theta: &Matrix<T>) -> Matrix<Complex<T>> {
    Matrix::from_fn(p.rows(), p.cols(), |i, j| Complex::new(p[(i, j)], theta[(i, j)]))
}
