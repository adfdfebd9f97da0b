use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{Element, Real};

/// Dense row-major matrix over a real or complex element type.
#[derive(Clone, PartialEq)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Element> Matrix<E> {
    pub fn new(rows: usize, cols: usize, data: Vec<E>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("empty matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![E::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = E::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row slices; all rows must have equal length.
    pub fn from_rows<R: AsRef<[E]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::new(rows.len(), cols, data)
    }

    pub fn diag(entries: &[E]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    /// Assembles a matrix from a grid of blocks. Blocks in a block-row must
    /// share a row count and blocks in a block-column a column count.
    pub fn from_blocks(blocks: &[&[&Matrix<E>]]) -> Result<Self> {
        let row_heights: Vec<usize> = blocks
            .iter()
            .map(|br| br.first().map(|b| b.rows).unwrap_or(0))
            .collect();
        let col_widths: Vec<usize> = blocks
            .first()
            .map(|br| br.iter().map(|b| b.cols).collect())
            .unwrap_or_default();
        for (bi, br) in blocks.iter().enumerate() {
            if br.len() != col_widths.len() {
                return Err(Error::Dimension("block rows of unequal length".into()));
            }
            for (bj, b) in br.iter().enumerate() {
                if b.rows != row_heights[bi] || b.cols != col_widths[bj] {
                    return Err(Error::Dimension(format!(
                        "block ({bi},{bj}) is {}x{}, expected {}x{}",
                        b.rows, b.cols, row_heights[bi], col_widths[bj]
                    )));
                }
            }
        }
        let rows = row_heights.iter().sum();
        let cols = col_widths.iter().sum();
        let mut out = Self::zeros(rows, cols);
        let mut r0 = 0;
        for (bi, br) in blocks.iter().enumerate() {
            let mut c0 = 0;
            for (bj, b) in br.iter().enumerate() {
                out.set_block(r0, c0, b);
                c0 += col_widths[bj];
            }
            r0 += row_heights[bi];
        }
        Ok(out)
    }

    /// Block-diagonal matrix with the given diagonal blocks.
    pub fn block_diag(blocks: &[&Matrix<E>]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.set_block(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[E] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<E> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[E]) {
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn diagonal(&self) -> Vec<E> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> E {
        self.diagonal().into_iter().sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map<F: Element>(&self, f: impl Fn(E) -> F) -> Matrix<F> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn scale(&self, s: E) -> Self {
        self.map(|x| x * s)
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Matrix<E>) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Matrix<E>) -> Self {
        let (p, q) = other.shape();
        Self::from_fn(self.rows * p, self.cols * q, |i, j| {
            self[(i / p, j / q)] * other[(i % p, j % q)]
        })
    }

    /// Matrix product with a shape check.
    pub fn try_mul(&self, rhs: &Matrix<E>) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(&self, rhs: &Matrix<E>) -> Self {
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == E::zero() {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[E]) -> Vec<E> {
        assert_eq!(v.len(), self.cols, "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// Column-major vectorisation `vec(X)`.
    pub fn vec(&self) -> Vec<E> {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    /// Inverse of [`Matrix::vec`].
    pub fn unvec(rows: usize, cols: usize, v: &[E]) -> Self {
        Self::from_fn(rows, cols, |i, j| v[j * rows + i])
    }

    fn assert_same_shape(&self, other: &Self, op: &str) {
        assert!(
            self.shape() == other.shape(),
            "{op}: shape mismatch {:?} vs {:?}",
            self.shape(),
            other.shape()
        );
    }
}

impl<T: Real> Matrix<T> {
    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Frobenius inner product `⟨X, Y⟩_F = Tr(XᵀY)`.
    pub fn frobenius_inner(&self, other: &Self) -> T {
        self.assert_same_shape(other, "frobenius_inner");
        self.data.iter().zip(&other.data).map(|(&a, &b)| a * b).sum()
    }

    /// `(X + Xᵀ)/2`.
    pub fn symmetric_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)]) * half)
    }

    /// Frobenius distance to another matrix of the same shape.
    pub fn distance(&self, other: &Self) -> T {
        (self - other).frobenius_norm()
    }

    pub fn to_complex(&self) -> Matrix<Complex<T>> {
        self.map(|x| Complex::new(x, T::zero()))
    }
}

impl<T: Real> Matrix<Complex<T>> {
    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn re(&self) -> Matrix<T> {
        self.map(|z| z.re)
    }

    pub fn im(&self) -> Matrix<T> {
        self.map(|z| z.im)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn distance(&self, other: &Self) -> T {
        (self - other).frobenius_norm()
    }
}

impl<E> Index<(usize, usize)> for Matrix<E> {
    type Output = E;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &E {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<E> IndexMut<(usize, usize)> for Matrix<E> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut E {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<E: Element> Mul for &Matrix<E> {
    type Output = Matrix<E>;
    fn mul(self, rhs: &Matrix<E>) -> Matrix<E> {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        self.mul_unchecked(rhs)
    }
}

impl<E: Element> Add for &Matrix<E> {
    type Output = Matrix<E>;
    fn add(self, rhs: &Matrix<E>) -> Matrix<E> {
        self.assert_same_shape(rhs, "add");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<E: Element> Sub for &Matrix<E> {
    type Output = Matrix<E>;
    fn sub(self, rhs: &Matrix<E>) -> Matrix<E> {
        self.assert_same_shape(rhs, "sub");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<E: Element> AddAssign<&Matrix<E>> for Matrix<E> {
    fn add_assign(&mut self, rhs: &Matrix<E>) {
        self.assert_same_shape(rhs, "add_assign");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl<E: Element> SubAssign<&Matrix<E>> for Matrix<E> {
    fn sub_assign(&mut self, rhs: &Matrix<E>) {
        self.assert_same_shape(rhs, "sub_assign");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl<E: Element + Neg<Output = E>> Neg for &Matrix<E> {
    type Output = Matrix<E>;
    fn neg(self) -> Matrix<E> {
        self.map(|x| -x)
    }
}

impl<E: fmt::Debug> fmt::Debug for Matrix<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<E: Serialize> Serialize for Matrix<E> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[E]> = self.data.chunks(self.cols).collect();
        rows.serialize(serializer)
    }
}

impl<'de, E: Element + Deserialize<'de>> Deserialize<'de> for Matrix<E> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<E>> = Vec::deserialize(deserializer)?;
        Matrix::from_rows(&rows).map_err(D::Error::custom)
    }
}

/// The 2×2 symplectic unit `[[0, 1], [−1, 0]]`.
pub fn symplectic_unit<T: Real>() -> Matrix<T> {
    Matrix { rows: 2, cols: 2, data: vec![T::zero(), T::one(), -T::one(), T::zero()] }
}

/// `bJ ⊗ I_{m/2}` for even `m`.
pub fn symplectic_form<T: Real>(m: usize) -> Result<Matrix<T>> {
    if m == 0 || m % 2 != 0 {
        return Err(Error::Dimension(format!("symplectic form needs positive even order, got {m}")));
    }
    Ok(symplectic_unit::<T>().kron(&Matrix::identity(m / 2)))
}
