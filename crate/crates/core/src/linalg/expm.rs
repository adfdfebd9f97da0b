use crate::error::{Error, Result};
use crate::linalg::{lu, Matrix};
use crate::scalar::Real;

/// Coefficients of the degree-13 diagonal Padé approximant to `exp`.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm bound below which the degree-13 approximant is accurate to unit
/// roundoff in double precision.
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
///
/// The scaling exponent `s` is the smallest non-negative integer with
/// `‖A‖₁ / 2ˢ ≤ θ₁₃`.
pub fn expm<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("expm of non-square {}x{}", a.rows(), a.cols())));
    }
    if !a.is_finite() {
        return Err(Error::Validation("expm input has non-finite entries".into()));
    }
    let n = a.rows();
    let norm = a.norm_1().as_f64();
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil().max(0.0) as i32 } else { 0 };
    let a = a.scale(T::lit(2f64.powi(-s)));

    let b: Vec<T> = PADE13.iter().map(|&c| T::lit(c)).collect();
    let ident = Matrix::<T>::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let lincomb = |c6: T, c4: T, c2: T, c0: T| -> Matrix<T> {
        let mut m = a6.scale(c6);
        m += &a4.scale(c4);
        m += &a2.scale(c2);
        m += &ident.scale(c0);
        m
    };

    let mut u_inner = &a6 * &(&(&a6.scale(b[13]) + &a4.scale(b[11])) + &a2.scale(b[9]));
    u_inner += &lincomb(b[7], b[5], b[3], b[1]);
    let u = &a * &u_inner;

    let mut v = &a6 * &(&(&a6.scale(b[12]) + &a4.scale(b[10])) + &a2.scale(b[8]));
    v += &lincomb(b[6], b[4], b[2], b[0]);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = lu::solve(&q, &p)?;
    for _ in 0..s {
        r = &r * &r;
    }
    if !r.is_finite() {
        return Err(Error::NonFinite("matrix exponential overflowed".into()));
    }
    Ok(r)
}
