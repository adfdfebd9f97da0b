use crate::error::{Error, Result};
use crate::linalg::{eig_general, lu::Lu, Matrix};
use crate::scalar::Real;
use crate::tolerances::Tolerances;

/// Solves `A X + X Aᵀ + Q = 0` for Hurwitz `A` and symmetric `Q`.
///
/// Uses the Kronecker form `(I ⊗ A + A ⊗ I) vec(X) = −vec(Q)`, so the cost is
/// `O(n⁶)`; intended for `n ≤ 32`.
pub fn solve_lyapunov<T: Real>(a: &Matrix<T>, q: &Matrix<T>) -> Result<Matrix<T>> {
    if !a.is_square() || q.shape() != a.shape() {
        return Err(Error::Dimension(format!(
            "Lyapunov equation with A {}x{} and Q {}x{}",
            a.rows(),
            a.cols(),
            q.rows(),
            q.cols()
        )));
    }
    let skew = q.distance(&q.transpose());
    if skew > T::lit(Tolerances::DEFAULT.hermitian) * q.frobenius_norm() {
        return Err(Error::Validation(format!("Lyapunov right-hand side not symmetric ({:e})", skew.as_f64())));
    }
    let max_re = eig_general(a)?.max_real_part();
    if !(max_re < -T::lit(Tolerances::DEFAULT.hurwitz)) {
        return Err(Error::NotHurwitz { max_real_part: max_re.as_f64() });
    }
    solve_kronecker(a, &q.symmetric_part())
}

/// The Kronecker solve without the Hurwitz pre-check.
fn solve_kronecker<T: Real>(a: &Matrix<T>, q: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    let ident = Matrix::<T>::identity(n);
    let k = &ident.kron(a) + &a.kron(&ident);
    let rhs: Vec<T> = q.vec().into_iter().map(|x| -x).collect();
    let x = Lu::new(&k)?.solve_vec(&rhs);
    Ok(Matrix::unvec(n, n, &x).symmetric_part())
}

/// `‖A X + X Aᵀ + Q‖_F`.
pub fn lyapunov_residual<T: Real>(a: &Matrix<T>, x: &Matrix<T>, q: &Matrix<T>) -> T {
    let ax = a * x;
    let mut r = &ax + &ax.transpose();
    r += q;
    r.frobenius_norm()
}
