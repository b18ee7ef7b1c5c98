//! Small dense matrices over a [`Ring`].

use std::fmt;

use crate::ring::Ring;
use crate::scalar::Scalar;
use crate::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct Mat<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Ring> Mat<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![R::rzero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = R::rone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<R>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Ok(Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> R) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(R::ris_zero)
    }

    pub fn row(&self, i: usize) -> &[R] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<R>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<S: Ring>(&self, f: impl Fn(&R) -> S) -> Mat<S> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix shape mismatch");
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.radd(b)).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix shape mismatch");
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.rsub(b)).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn add_assign(&mut self, o: &Self) {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&o.data) {
            a.radd_assign(b);
        }
    }

    pub fn neg(&self) -> Self {
        self.map(R::rneg)
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        self.map(|a| a.scale(s))
    }

    pub fn scale_ring(&self, s: &R) -> Self {
        self.map(|a| a.rmul(s))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zeros(self.rows, o.cols);
        out.add_mul(self, o);
        out
    }

    /// `self += a·b` with zero-skipping (pencils and cumulant matrices are sparse).
    pub fn add_mul(&mut self, a: &Self, b: &Self) {
        assert_eq!(a.cols, b.rows, "matrix shape mismatch");
        assert_eq!((self.rows, self.cols), (a.rows, b.cols), "matrix shape mismatch");
        for i in 0..a.rows {
            for k in 0..a.cols {
                let x = &a.data[i * a.cols + k];
                if x.ris_zero() {
                    continue;
                }
                for j in 0..b.cols {
                    let y = &b.data[k * b.cols + j];
                    if !y.ris_zero() {
                        self.data[i * self.cols + j].add_mul(x, y);
                    }
                }
            }
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul_vec(&self, v: &[R]) -> Vec<R> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = R::rzero();
                for (a, b) in self.row(i).iter().zip(v) {
                    acc.add_mul(a, b);
                }
                acc
            })
            .collect()
    }

    pub fn vec_mul(&self, u: &[R]) -> Vec<R> {
        assert_eq!(self.rows, u.len());
        let mut out = vec![R::rzero(); self.cols];
        for (i, ui) in u.iter().enumerate() {
            if ui.ris_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                o.add_mul(ui, a);
            }
        }
        out
    }

    /// Gauss–Jordan inverse; pivots must be units of the ring.
    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let (p, pinv) = (col..n).find_map(|r| a[(r, col)].try_inv().map(|x| (r, x)))?;
            a.swap_rows(p, col);
            inv.swap_rows(p, col);
            for j in 0..n {
                a[(col, j)] = a[(col, j)].rmul(&pinv);
                inv[(col, j)] = inv[(col, j)].rmul(&pinv);
            }
            for r in 0..n {
                if r == col || a[(r, col)].ris_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for j in 0..n {
                    let t = f.rmul(&a[(col, j)]);
                    a[(r, j)] = a[(r, j)].rsub(&t);
                    let t = f.rmul(&inv[(col, j)]);
                    inv[(r, j)] = inv[(r, j)].rsub(&t);
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }
}

impl Mat<Scalar> {
    /// Reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !Ring::ris_zero(&self[(i, c)])) else {
                continue;
            };
            self.swap_rows(p, r);
            let inv = self[(r, c)].inv().unwrap();
            for j in 0..self.cols {
                self[(r, j)] = &self[(r, j)] * &inv;
            }
            for i in 0..self.rows {
                if i != r && !Ring::ris_zero(&self[(i, c)]) {
                    let f = self[(i, c)].clone();
                    for j in 0..self.cols {
                        let t = &f * &self[(r, j)];
                        self[(i, j)] -= &t;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }
}

impl<R> std::ops::Index<(usize, usize)> for Mat<R> {
    type Output = R;
    fn index(&self, (i, j): (usize, usize)) -> &R {
        &self.data[i * self.cols + j]
    }
}

impl<R> std::ops::IndexMut<(usize, usize)> for Mat<R> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut R {
        &mut self.data[i * self.cols + j]
    }
}

impl<R: fmt::Debug> fmt::Debug for Mat<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[R]> = (0..self.rows)
            .map(|i| &self.data[i * self.cols..(i + 1) * self.cols])
            .collect();
        f.debug_list().entries(rows).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Mat<Scalar> {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&x| Scalar::int(x)).collect()).collect())
            .unwrap()
    }

    #[test]
    fn inverse_round_trip() {
        let a = m(&[&[2, 1, 0], &[0, 1, 3], &[1, 0, 1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Mat::identity(3));
        assert!(m(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn rref_rank() {
        assert_eq!(m(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]).rank(), 2);
    }
}
