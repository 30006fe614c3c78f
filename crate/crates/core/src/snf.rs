//! Smith normal form of integer matrices, with unimodular transforms.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<i128>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i128>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c);
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i128) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<i128> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn mul(&self, rhs: &IntMat) -> Result<IntMat> {
        assert_eq!(self.cols, rhs.rows);
        let mut out = IntMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = a.checked_mul(rhs.get(k, j)).and_then(|p| p.checked_add(out.get(i, j))).ok_or(Error::Overflow)?;
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[i128]) -> Result<Vec<i128>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols).try_fold(0i128, |acc, j| {
                    self.get(i, j).checked_mul(v[j]).and_then(|p| p.checked_add(acc)).ok_or(Error::Overflow)
                })
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// Rows `r0..r1`.
    pub fn row_range(&self, r0: usize, r1: usize) -> IntMat {
        let mut m = IntMat::zeros(r1 - r0, self.cols);
        for i in r0..r1 {
            for j in 0..self.cols {
                m.set(i - r0, j, self.get(i, j));
            }
        }
        m
    }

    /// Columns `c0..c1`.
    pub fn col_range(&self, c0: usize, c1: usize) -> IntMat {
        let mut m = IntMat::zeros(self.rows, c1 - c0);
        for i in 0..self.rows {
            for j in c0..c1 {
                m.set(i, j - c0, self.get(i, j));
            }
        }
        m
    }

    fn row_axpy(&mut self, dst: usize, src: usize, c: i128) -> Result<()> {
        for j in 0..self.cols {
            let v = self.get(src, j).checked_mul(c).and_then(|p| p.checked_add(self.get(dst, j))).ok_or(Error::Overflow)?;
            self.set(dst, j, v);
        }
        Ok(())
    }

    fn col_axpy(&mut self, dst: usize, src: usize, c: i128) -> Result<()> {
        for i in 0..self.rows {
            let v = self.get(i, src).checked_mul(c).and_then(|p| p.checked_add(self.get(i, dst))).ok_or(Error::Overflow)?;
            self.set(i, dst, v);
        }
        Ok(())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -self.get(r, j);
            self.set(r, j, v);
        }
    }

    fn negate_col(&mut self, c: usize) {
        for i in 0..self.rows {
            let v = -self.get(i, c);
            self.set(i, c, v);
        }
    }
}

/// `p * a * q = d` with `p`, `q` unimodular and `d` diagonal with
/// nonnegative entries, each dividing the next.
#[derive(Clone, Debug)]
pub struct Snf {
    pub diag: Vec<i128>,
    pub rank: usize,
    pub p: IntMat,
    pub p_inv: IntMat,
    pub q: IntMat,
    pub q_inv: IntMat,
}

struct Work {
    a: IntMat,
    p: IntMat,
    p_inv: IntMat,
    q: IntMat,
    q_inv: IntMat,
}

impl Work {
    // row_dst += c * row_src
    fn row_op(&mut self, dst: usize, src: usize, c: i128) -> Result<()> {
        self.a.row_axpy(dst, src, c)?;
        self.p.row_axpy(dst, src, c)?;
        self.p_inv.col_axpy(src, dst, -c)
    }

    // col_dst += c * col_src
    fn col_op(&mut self, dst: usize, src: usize, c: i128) -> Result<()> {
        self.a.col_axpy(dst, src, c)?;
        self.q.col_axpy(dst, src, c)?;
        self.q_inv.row_axpy(src, dst, -c)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            self.a.swap_rows(i, j);
            self.p.swap_rows(i, j);
            self.p_inv.swap_cols(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i != j {
            self.a.swap_cols(i, j);
            self.q.swap_cols(i, j);
            self.q_inv.swap_rows(i, j);
        }
    }

    fn negate_row(&mut self, r: usize) {
        self.a.negate_row(r);
        self.p.negate_row(r);
        self.p_inv.negate_col(r);
    }
}

pub fn smith_normal_form(a: &IntMat) -> Result<Snf> {
    let (m, n) = (a.rows, a.cols);
    let mut w = Work { a: a.clone(), p: IntMat::identity(m), p_inv: IntMat::identity(m), q: IntMat::identity(n), q_inv: IntMat::identity(n) };
    let mut t = 0;
    while t < m.min(n) {
        // smallest nonzero entry of the trailing block becomes the pivot
        let mut best: Option<(usize, usize, i128)> = None;
        for i in t..m {
            for j in t..n {
                let v = w.a.get(i, j).abs();
                if v != 0 && best.is_none_or(|(_, _, b)| v < b) {
                    best = Some((i, j, v));
                }
            }
        }
        let Some((bi, bj, _)) = best else { break };
        w.swap_rows(t, bi);
        w.swap_cols(t, bj);
        loop {
            let piv = w.a.get(t, t);
            let mut dirty = false;
            for i in t + 1..m {
                let q = w.a.get(i, t).div_euclid(piv);
                if q != 0 {
                    w.row_op(i, t, -q)?;
                }
                if w.a.get(i, t) != 0 {
                    dirty = true;
                }
            }
            for j in t + 1..n {
                let q = w.a.get(t, j).div_euclid(piv);
                if q != 0 {
                    w.col_op(j, t, -q)?;
                }
                if w.a.get(t, j) != 0 {
                    dirty = true;
                }
            }
            if dirty {
                // a remainder is smaller than the pivot; move it into place
                let mut best = (t, t, w.a.get(t, t).abs());
                for i in t + 1..m {
                    let v = w.a.get(i, t).abs();
                    if v != 0 && v < best.2 {
                        best = (i, t, v);
                    }
                }
                for j in t + 1..n {
                    let v = w.a.get(t, j).abs();
                    if v != 0 && v < best.2 {
                        best = (t, j, v);
                    }
                }
                w.swap_rows(t, best.0);
                w.swap_cols(t, best.1);
                continue;
            }
            // divisibility of the trailing block
            let piv = w.a.get(t, t);
            let offender = (t + 1..m).flat_map(|i| (t + 1..n).map(move |j| (i, j))).find(|&(i, j)| w.a.get(i, j) % piv != 0);
            match offender {
                Some((i, _)) => w.row_op(t, i, 1)?,
                None => break,
            }
        }
        if w.a.get(t, t) < 0 {
            w.negate_row(t);
        }
        t += 1;
    }
    let diag: Vec<i128> = (0..m.min(n)).map(|i| w.a.get(i, i)).collect();
    let rank = diag.iter().filter(|&&d| d != 0).count();
    Ok(Snf { diag, rank, p: w.p, p_inv: w.p_inv, q: w.q, q_inv: w.q_inv })
}
