//! Dense matrices over a [`Scalar`] field with Gaussian elimination.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::scalar::{Rational, Scalar};

#[derive(Clone, PartialEq)]
pub struct Mat<F: Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

pub type QMat = Mat<Rational>;
pub type FMat = Mat<f64>;

impl<F: Scalar> Mat<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn scalar(n: usize, value: F) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = value.clone();
        }
        m
    }

    pub fn diag(values: &[F]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        m
    }

    /// Builds a matrix from row-major data.
    ///
    /// Panics when `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<F>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let data: Vec<F> = rows.into_iter().flatten().collect();
        Self::from_row_major(r, c, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row_major(&self) -> &[F] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn scale(&self, s: &F) -> Self {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.clone() * s.clone()).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Largest absolute entry, as a double.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    pub fn pow(&self, exp: i64) -> Option<Self> {
        assert!(self.is_square());
        let base = if exp < 0 { self.inverse()? } else { self.clone() };
        let mut result = Self::identity(self.rows);
        for _ in 0..exp.unsigned_abs() {
            result = &result * &base;
        }
        Some(result)
    }

    /// Writes `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)].clone();
            }
        }
    }

    pub fn add_block(&mut self, r0: usize, c0: usize, block: &Self, coeff: &F) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                let v = self[(r0 + i, c0 + j)].clone() + coeff.clone() * block[(i, j)].clone();
                self[(r0 + i, c0 + j)] = v;
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    pub fn to_f64(&self) -> FMat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(Scalar::to_f64).collect() }
    }

    pub fn to_rational(&self) -> Option<QMat> {
        let data = self.data.iter().map(Scalar::to_rational).collect::<Option<Vec<_>>>()?;
        Some(Mat { rows: self.rows, cols: self.cols, data })
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.to_f64().data)
    }

    /// Row echelon reduction; returns pivot columns. Entries below `tol`
    /// (relative to the largest entry) count as zero in floating mode.
    fn echelon(&mut self, tol: f64) -> (Vec<usize>, bool) {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut pivots = Vec::new();
        let mut odd_swaps = false;
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let mut best = row;
            let mut best_mag = self[(row, col)].magnitude();
            for r in row + 1..self.rows {
                let m = self[(r, col)].magnitude();
                if m > best_mag {
                    best = r;
                    best_mag = m;
                }
            }
            let negligible = if F::EXACT { self[(best, col)].is_zero() } else { best_mag <= tol * scale };
            if negligible {
                continue;
            }
            if best != row {
                self.swap_rows(best, row);
                odd_swaps = !odd_swaps;
            }
            let pivot = self[(row, col)].clone();
            for r in row + 1..self.rows {
                if self[(r, col)].is_zero() {
                    continue;
                }
                let factor = self[(r, col)].clone() / pivot.clone();
                for c in col..self.cols {
                    let v = self[(r, c)].clone() - factor.clone() * self[(row, c)].clone();
                    self[(r, c)] = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (pivots, odd_swaps)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn det(&self) -> F {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let mut m = self.clone();
        let (pivots, odd) = m.echelon(0.0);
        if pivots.len() < self.rows {
            return F::zero();
        }
        let mut d = F::one();
        for i in 0..self.rows {
            d = d * m[(i, i)].clone();
        }
        if odd {
            -d
        } else {
            d
        }
    }

    /// Rank with relative tolerance `tol` in floating mode (ignored when exact).
    pub fn rank(&self, tol: f64) -> usize {
        self.clone().echelon(tol).0.len()
    }

    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        aug.set_block(0, 0, self);
        aug.set_block(0, n, &Self::identity(n));
        let (pivots, _) = aug.echelon(if F::EXACT { 0.0 } else { 1e-14 });
        if pivots.len() < n || pivots.iter().any(|&p| p >= n) {
            return None;
        }
        for col in (0..n).rev() {
            let p = aug[(col, col)].clone();
            for c in 0..2 * n {
                let v = aug[(col, c)].clone() / p.clone();
                aug[(col, c)] = v;
            }
            for r in 0..col {
                let f = aug[(r, col)].clone();
                if f.is_zero() {
                    continue;
                }
                for c in 0..2 * n {
                    let v = aug[(r, c)].clone() - f.clone() * aug[(col, c)].clone();
                    aug[(r, c)] = v;
                }
            }
        }
        Some(aug.block(0, n, n, n))
    }

    /// Rows spanning the row space (echelon form rows).
    pub fn row_space_basis(&self, tol: f64) -> Self {
        let mut m = self.clone();
        let (pivots, _) = m.echelon(tol);
        m.block(0, 0, pivots.len(), self.cols)
    }
}

impl<F: Scalar> Index<(usize, usize)> for Mat<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<F: Scalar> IndexMut<(usize, usize)> for Mat<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<F: Scalar> Mul for &Mat<F> {
    type Output = Mat<F>;
    fn mul(self, rhs: &Mat<F>) -> Mat<F> {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        F::matmul(self, rhs)
    }
}

pub(crate) fn schoolbook<F: Scalar>(a: &Mat<F>, b: &Mat<F>) -> Mat<F> {
    let mut out: Mat<F> = Mat::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let x = &a[(i, k)];
            if x.is_zero() {
                continue;
            }
            for j in 0..b.cols {
                let v = out[(i, j)].clone() + x.clone() * b[(k, j)].clone();
                out[(i, j)] = v;
            }
        }
    }
    out
}

/// Integer numerators over a common denominator, when they fit in `i64`.
fn common_denominator(m: &QMat) -> Option<(Vec<i64>, BigInt)> {
    let den = m.data.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let nums = m.data.iter().map(|x| (x.numer() * (&den / x.denom())).to_i64()).collect::<Option<Vec<_>>>()?;
    Some((nums, den))
}

/// Product over `Q` with one normalization per entry instead of per
/// multiply-add: numerators accumulate in `i128`. `None` when entries are
/// too large for that to be safe.
pub(crate) fn rational_matmul(a: &QMat, b: &QMat) -> Option<QMat> {
    const LIMIT: i64 = 1 << 40;
    let (x, dx) = common_denominator(a)?;
    let (y, dy) = common_denominator(b)?;
    if a.cols > 1 << 20 || x.iter().chain(&y).any(|v| v.abs() >= LIMIT) {
        return None;
    }
    let den = dx * dy;
    let mut data = Vec::with_capacity(a.rows * b.cols);
    for i in 0..a.rows {
        for j in 0..b.cols {
            let s: i128 = (0..a.cols).map(|k| x[i * a.cols + k] as i128 * y[k * b.cols + j] as i128).sum();
            data.push(if s == 0 { Rational::zero() } else { Rational::new(BigInt::from(s), den.clone()) });
        }
    }
    Some(Mat { rows: a.rows, cols: b.cols, data })
}

impl<F: Scalar> Add for &Mat<F> {
    type Output = Mat<F>;
    fn add(self, rhs: &Mat<F>) -> Mat<F> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }
}

impl<F: Scalar> Sub for &Mat<F> {
    type Output = Mat<F>;
    fn sub(self, rhs: &Mat<F>) -> Mat<F> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }
}

impl<F: Scalar> Neg for &Mat<F> {
    type Output = Mat<F>;
    fn neg(self) -> Mat<F> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| -a.clone()).collect() }
    }
}

impl<F: Scalar + fmt::Display> fmt::Debug for Mat<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

impl FMat {
    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl QMat {
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        QMat::from_rows(rows.iter().map(|r| r.iter().map(|&v| Rational::from_i64(v)).collect()).collect())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..self.cols).all(|j| {
                let v = &self[(i, j)];
                if i == j { v.is_one() } else { v.is_zero() }
            }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    #[test]
    fn fast_rational_product_matches_schoolbook() {
        let a = QMat::from_row_major(2, 3, vec![rational(1, 2), rational(-3, 7), rational(0, 1), rational(5, 3), rational(2, 1), rational(-1, 6)]);
        let b = QMat::from_row_major(3, 2, vec![rational(4, 9), rational(1, 1), rational(0, 1), rational(-7, 2), rational(3, 5), rational(1, 3)]);
        assert_eq!(rational_matmul(&a, &b).unwrap(), schoolbook(&a, &b));
        let huge = QMat::from_row_major(1, 1, vec![rational(i64::MAX, 1)]);
        assert!(rational_matmul(&huge, &huge).is_none());
        assert_eq!(&huge * &huge, schoolbook(&huge, &huge));
    }

    #[test]
    fn exact_determinant_and_inverse() {
        let m = QMat::from_i64_rows(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(m.det(), rational(18, 1));
        let inv = m.inverse().unwrap();
        assert!((&m * &inv).is_identity());
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let m = QMat::from_i64_rows(&[&[1, 2], &[2, 4]]);
        assert!(m.inverse().is_none());
        assert_eq!(m.det(), rational(0, 1));
        assert_eq!(m.rank(0.0), 1);
    }

    #[test]
    fn determinant_sign_tracks_row_swaps() {
        let m = QMat::from_i64_rows(&[&[0, 1], &[1, 0]]);
        assert_eq!(m.det(), rational(-1, 1));
        let f = FMat::from_rows(vec![vec![0.0, 2.0], vec![3.0, 0.0]]);
        assert!((f.det() + 6.0).abs() < 1e-12);
    }

    #[test]
    fn negative_power_uses_inverse() {
        let m = QMat::from_i64_rows(&[&[1, 1], &[0, 1]]);
        let p = m.pow(-3).unwrap();
        assert_eq!(p, QMat::from_i64_rows(&[&[1, -3], &[0, 1]]));
    }
}
