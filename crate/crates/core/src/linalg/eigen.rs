use std::cmp::Ordering;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;
use crate::tolerances::Tolerances;

/// Eigenvalues with optional eigenvectors (columns aligned with the values,
/// unit Euclidean norm).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub eigenvalues: Vec<Complex<T>>,
    pub eigenvectors: Option<Matrix<Complex<T>>>,
}

impl<T: Real> Spectrum<T> {
    pub fn max_real_part(&self) -> T {
        self.eigenvalues.iter().fold(T::neg_infinity(), |m, z| m.max(z.re))
    }

    /// Real parts of the eigenvalues, for spectra known to be real.
    pub fn real_values(&self) -> Vec<T> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }
}

fn descending<T: Real>(a: &Complex<T>, b: &Complex<T>) -> Ordering {
    b.re.partial_cmp(&a.re)
        .unwrap_or(Ordering::Equal)
        .then(b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal))
}

/// Full complex spectrum of a real square matrix.
///
/// The matrix is balanced, reduced to upper Hessenberg form by Householder
/// reflections and then deflated by Francis double-shift QR sweeps. Complex
/// eigenvalues come out in conjugate pairs. The result is sorted by
/// descending real part, ties broken by descending imaginary part.
pub fn eig_general<T: Real>(a: &Matrix<T>) -> Result<Spectrum<T>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("eigenvalues of non-square {}x{}", a.rows(), a.cols())));
    }
    if !a.is_finite() {
        return Err(Error::Validation("eigenvalue input has non-finite entries".into()));
    }
    let n = a.rows();
    // 1-based working copy keeps the deflation logic readable.
    let mut h = vec![vec![T::zero(); n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            h[i + 1][j + 1] = a[(i, j)];
        }
    }
    balance(&mut h, n);
    hessenberg(&mut h, n);
    let cap = Tolerances::DEFAULT.qr_iterations_per_dim * n;
    let mut eigenvalues = hqr(&mut h, n, cap)?;
    eigenvalues.sort_by(descending);
    Ok(Spectrum { eigenvalues, eigenvectors: None })
}

/// Parlett–Reinsch balancing by powers of two.
fn balance<T: Real>(a: &mut [Vec<T>], n: usize) {
    let radix = T::lit(2.0);
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let (mut c, mut r) = (T::zero(), T::zero());
            for j in 1..=n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != T::zero() && r != T::zero() {
                let mut g = r / radix;
                let mut f = T::one();
                let s = c + r;
                while c < g {
                    f *= radix;
                    c *= sqrdx;
                }
                g = r * radix;
                while c > g {
                    f /= radix;
                    c /= sqrdx;
                }
                if (c + r) / f < T::lit(0.95) * s {
                    done = false;
                    let g = T::one() / f;
                    for j in 1..=n {
                        a[i][j] *= g;
                    }
                    for j in 1..=n {
                        a[j][i] *= f;
                    }
                }
            }
        }
    }
}

/// Householder reduction to upper Hessenberg form, in place.
fn hessenberg<T: Real>(a: &mut [Vec<T>], n: usize) {
    if n < 3 {
        return;
    }
    for k in 1..=n - 2 {
        let alpha_norm = (k + 1..=n).map(|i| a[i][k] * a[i][k]).sum::<T>().sqrt();
        if alpha_norm == T::zero() {
            continue;
        }
        let alpha = if a[k + 1][k] > T::zero() { -alpha_norm } else { alpha_norm };
        let mut v: Vec<T> = vec![T::zero(); n + 1];
        for i in k + 1..=n {
            v[i] = a[i][k];
        }
        v[k + 1] -= alpha;
        let vnorm2 = (k + 1..=n).map(|i| v[i] * v[i]).sum::<T>();
        if vnorm2 == T::zero() {
            continue;
        }
        let two = T::lit(2.0);
        // Left: A ← (I − 2vvᵀ/vᵀv) A on rows k+1..n.
        for j in 1..=n {
            let dot = (k + 1..=n).map(|i| v[i] * a[i][j]).sum::<T>();
            let f = two * dot / vnorm2;
            for i in k + 1..=n {
                a[i][j] -= f * v[i];
            }
        }
        // Right: A ← A (I − 2vvᵀ/vᵀv) on columns k+1..n.
        for i in 1..=n {
            let dot = (k + 1..=n).map(|j| a[i][j] * v[j]).sum::<T>();
            let f = two * dot / vnorm2;
            for j in k + 1..=n {
                a[i][j] -= f * v[j];
            }
        }
        for i in k + 2..=n {
            a[i][k] = T::zero();
        }
    }
}

fn sign<T: Real>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR.
fn hqr<T: Real>(a: &mut [Vec<T>], n: usize, cap: usize) -> Result<Vec<Complex<T>>> {
    let mut wr = vec![T::zero(); n + 1];
    let mut wi = vec![T::zero(); n + 1];
    let mut anorm = T::zero();
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut total = 0usize;
    let mut nn = n;
    let mut t = T::zero();
    let half = T::lit(0.5);
    while nn >= 1 {
        let mut its = 0usize;
        let mut l;
        loop {
            // Look for a single small subdiagonal element.
            l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == T::zero() {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = T::zero();
                    break;
                }
                l -= 1;
            }
            let mut x = a[nn][nn];
            if l == nn {
                // One root found.
                wr[nn] = x + t;
                wi[nn] = T::zero();
                nn -= 1;
                break;
            }
            let mut y = a[nn - 1][nn - 1];
            let mut w = a[nn][nn - 1] * a[nn - 1][nn];
            if l == nn - 1 {
                // Two roots found.
                let p = half * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= T::zero() {
                    z = p + sign(z, p);
                    wr[nn - 1] = x + z;
                    wr[nn] = x + z;
                    if z != T::zero() {
                        wr[nn] = x - w / z;
                    }
                    wi[nn - 1] = T::zero();
                    wi[nn] = T::zero();
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn - 1] = -z;
                    wi[nn] = z;
                }
                nn = nn.saturating_sub(2);
                break;
            }
            if total >= cap {
                return Err(Error::NoConvergence { routine: "shifted QR", iterations: total });
            }
            if its == 10 || its == 20 {
                // Exceptional shift.
                t += x;
                for i in 1..=nn {
                    a[i][i] -= x;
                }
                let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            its += 1;
            total += 1;

            // Form the shift and look for two consecutive small subdiagonals.
            let (mut p, mut q, mut r);
            let mut m = nn - 2;
            loop {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                a[i][i - 2] = T::zero();
                if i != m + 2 {
                    a[i][i - 3] = T::zero();
                }
            }
            // Double QR step on rows l..nn and columns m..nn.
            let mut k = m;
            while k + 1 <= nn {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = T::zero();
                    if k != nn - 1 {
                        r = a[k + 2][k - 1];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != T::zero() {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != T::zero() {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        let mut pp = a[k][j] + q * a[k + 1][j];
                        if k != nn - 1 {
                            pp += r * a[k + 2][j];
                            a[k + 2][j] -= pp * z;
                        }
                        a[k + 1][j] -= pp * y;
                        a[k][j] -= pp * x;
                    }
                    let mmin = if nn < k + 3 { nn } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = x * a[i][k] + y * a[i][k + 1];
                        if k != nn - 1 {
                            pp += z * a[i][k + 2];
                            a[i][k + 2] -= pp * r;
                        }
                        a[i][k + 1] -= pp * q;
                        a[i][k] -= pp;
                    }
                }
                k += 1;
            }
            if l >= nn - 1 {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Complex::new(wr[i], wi[i])).collect())
}

/// Eigen-decomposition of a complex Hermitian matrix by cyclic Jacobi
/// rotations. Eigenvalues are real and sorted in descending order; the
/// eigenvector matrix is unitary.
pub fn eig_hermitian<T: Real>(h: &Matrix<Complex<T>>) -> Result<Spectrum<T>> {
    if !h.is_square() {
        return Err(Error::Dimension(format!("eigenvalues of non-square {}x{}", h.rows(), h.cols())));
    }
    if !h.is_finite() {
        return Err(Error::Validation("Hermitian eigensolver input has non-finite entries".into()));
    }
    let scale = h.frobenius_norm();
    let skew = h.distance(&h.adjoint());
    if skew > T::lit(Tolerances::DEFAULT.hermitian) * scale {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian (‖H − H*‖_F = {:e})",
            skew.as_f64()
        )));
    }
    let (values, vectors) = jacobi(h)?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap_or(Ordering::Equal));
    let n = values.len();
    let sorted_vectors = Matrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Ok(Spectrum {
        eigenvalues: order.iter().map(|&i| Complex::new(values[i], T::zero())).collect(),
        eigenvectors: Some(sorted_vectors),
    })
}

fn jacobi<T: Real>(h: &Matrix<Complex<T>>) -> Result<(Vec<T>, Matrix<Complex<T>>)> {
    let n = h.rows();
    let half = T::lit(0.5);
    let mut a = Matrix::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()).scale(half));
    let mut v = Matrix::<Complex<T>>::identity(n);
    let scale = a.frobenius_norm();
    if scale == T::zero() {
        return Ok((vec![T::zero(); n], v));
    }
    let target = T::epsilon() * scale;
    let sweeps = Tolerances::DEFAULT.jacobi_sweeps;
    for _ in 0..sweeps {
        let off = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<T>()
            .sqrt();
        if off <= target {
            return Ok(((0..n).map(|i| a[(i, i)].re).collect(), v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= T::min_positive_value() {
                    continue;
                }
                let phase = apq.unscale(mag);
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (mag + mag);
                let t = if theta == T::zero() {
                    T::one()
                } else {
                    sign(T::one(), theta) / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                let gpp = Complex::new(c, T::zero());
                let gpq = Complex::new(s, T::zero());
                let gqp = phase.conj().scale(-s);
                let gqq = phase.conj().scale(c);
                // A ← A G, V ← V G
                for k in 0..n {
                    let (xp, xq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = xp * gpp + xq * gqp;
                    a[(k, q)] = xp * gpq + xq * gqq;
                    let (vp, vq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vp * gpp + vq * gqp;
                    v[(k, q)] = vp * gpq + vq * gqq;
                }
                // A ← G* A
                for k in 0..n {
                    let (xp, xq) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = gpp.conj() * xp + gqp.conj() * xq;
                    a[(q, k)] = gpq.conj() * xp + gqq.conj() * xq;
                }
                a[(p, q)] = Complex::new(T::zero(), T::zero());
                a[(q, p)] = Complex::new(T::zero(), T::zero());
                a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
                a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
            }
        }
    }
    Err(Error::NoConvergence { routine: "Jacobi", iterations: sweeps })
}

/// Eigen-decomposition of a real symmetric matrix: eigenvalues descending,
/// orthogonal eigenvector matrix.
pub fn eig_symmetric<T: Real>(s: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>)> {
    let spec = eig_hermitian(&s.to_complex())?;
    let vectors = spec.eigenvectors.as_ref().expect("Hermitian solver returns vectors").re();
    Ok((spec.real_values(), vectors))
}

fn check_symmetric<T: Real>(r: &Matrix<T>, what: &str) -> Result<()> {
    if !r.is_square() {
        return Err(Error::Dimension(format!("{what} of non-square {}x{}", r.rows(), r.cols())));
    }
    let skew = r.distance(&r.transpose());
    if skew > T::lit(Tolerances::DEFAULT.hermitian) * r.frobenius_norm() {
        return Err(Error::Validation(format!("{what}: matrix is not symmetric (‖R − Rᵀ‖_F = {:e})", skew.as_f64())));
    }
    Ok(())
}

fn spectral_function<T: Real>(r: &Matrix<T>, what: &str, f: impl Fn(T) -> T) -> Result<Matrix<T>> {
    check_symmetric(r, what)?;
    let (values, q) = eig_symmetric(&r.symmetric_part())?;
    if let Some(&min) = values.last() {
        if !(min > T::zero()) {
            return Err(Error::NotPositiveDefinite { eigenvalue: min.as_f64() });
        }
    }
    let n = r.rows();
    let fv: Vec<T> = values.iter().map(|&l| f(l)).collect();
    let out = Matrix::from_fn(n, n, |i, j| (0..n).map(|k| q[(i, k)] * fv[k] * q[(j, k)]).sum());
    Ok(out.symmetric_part())
}

/// Symmetric square root of a symmetric positive definite matrix, by
/// spectral decomposition.
pub fn sqrtm_spd<T: Real>(r: &Matrix<T>) -> Result<Matrix<T>> {
    spectral_function(r, "sqrtm_spd", |l| l.sqrt())
}

/// `R^{-1/2}` for symmetric positive definite `R`.
pub fn inv_sqrtm_spd<T: Real>(r: &Matrix<T>) -> Result<Matrix<T>> {
    spectral_function(r, "inv_sqrtm_spd", |l| T::one() / l.sqrt())
}
