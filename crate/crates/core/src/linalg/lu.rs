use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// LU factorisation with partial pivoting, `PA = LU`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    sign: T,
}

impl<T: Real> Lu<T> {
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!("LU of non-square {}x{}", a.rows(), a.cols())));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        let scale = a.max_abs();
        let tiny = T::epsilon() * scale * T::lit(n as f64);

        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(pmax > tiny) {
                return Err(Error::Singular);
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= f * u;
                    }
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn det(&self) -> T {
        self.lu.diagonal().into_iter().fold(self.sign, |acc, d| acc * d)
    }

    pub fn solve_vec(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.rows();
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    /// Solves `A X = B` column by column.
    pub fn solve(&self, b: &Matrix<T>) -> Result<Matrix<T>> {
        if b.rows() != self.lu.rows() {
            return Err(Error::Dimension("right-hand side row count".into()));
        }
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            out.set_column(j, &self.solve_vec(&b.column(j)));
        }
        Ok(out)
    }
}

/// Determinant via LU; zero when the factorisation reports singularity.
pub fn det<T: Real>(a: &Matrix<T>) -> Result<T> {
    match Lu::new(a) {
        Ok(lu) => Ok(lu.det()),
        Err(Error::Singular) => Ok(T::zero()),
        Err(e) => Err(e),
    }
}

pub fn solve<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    Lu::new(a)?.solve(b)
}

pub fn inverse<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    solve(a, &Matrix::identity(a.rows()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_permuted_system() {
        let a = Matrix::from_rows(&[[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]]).unwrap();
        let x = Matrix::from_rows(&[[1.0], [-2.0], [0.5]]).unwrap();
        let b = &a * &x;
        let sol = solve(&a, &b).unwrap();
        assert!(sol.distance(&x) < 1e-14);
        assert!((det::<f64>(&a).unwrap() + 5.0).abs() < 1e-14);
    }

    #[test]
    fn singular_detected() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert_eq!(Lu::new(&a).unwrap_err(), Error::Singular);
        assert_eq!(det(&a).unwrap(), 0.0);
    }
}
