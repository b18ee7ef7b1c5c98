//! Truncated power series with matrix or scalar coefficients.
//!
//! A series of order `K` stores the coefficients of `t^0..=t^K`; results of
//! binary operations carry the smaller of the two orders.

use num_traits::{One, Zero};

use crate::cumulants::Dist;
use crate::matrix::Mat;
use crate::ncpoly::EvalAlgebra;
use crate::ring::Ring;
use crate::scalar::Scalar;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct MatSeries<R> {
    rows: usize,
    cols: usize,
    c: Vec<Mat<R>>,
}

impl<R: Ring> MatSeries<R> {
    pub fn zero(rows: usize, cols: usize, order: usize) -> Self {
        MatSeries { rows, cols, c: vec![Mat::zeros(rows, cols); order + 1] }
    }

    pub fn identity(n: usize, order: usize) -> Self {
        Self::constant(Mat::identity(n), order)
    }

    pub fn constant(m: Mat<R>, order: usize) -> Self {
        let mut s = Self::zero(m.rows(), m.cols(), order);
        s.c[0] = m;
        s
    }

    /// `m·t^k`.
    pub fn monomial(m: Mat<R>, k: usize, order: usize) -> Self {
        let mut s = Self::zero(m.rows(), m.cols(), order);
        if k <= order {
            s.c[k] = m;
        }
        s
    }

    pub fn from_coeffs(c: Vec<Mat<R>>) -> Result<Self> {
        let first = c.first().ok_or_else(|| Error::Dimension("empty series".into()))?;
        let (rows, cols) = (first.rows(), first.cols());
        if c.iter().any(|m| (m.rows(), m.cols()) != (rows, cols)) {
            return Err(Error::Dimension("series coefficients of different shapes".into()));
        }
        Ok(MatSeries { rows, cols, c })
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn coeff(&self, k: usize) -> &Mat<R> {
        &self.c[k]
    }

    pub fn coeff_mut(&mut self, k: usize) -> &mut Mat<R> {
        &mut self.c[k]
    }

    pub fn coeffs(&self) -> &[Mat<R>] {
        &self.c
    }

    /// Lowest order with a nonzero coefficient (`order + 1` for the zero series).
    pub fn valuation(&self) -> usize {
        self.c.iter().position(|m| !m.is_zero()).unwrap_or(self.c.len())
    }

    pub fn truncate(&self, order: usize) -> Self {
        MatSeries { rows: self.rows, cols: self.cols, c: self.c[..=order.min(self.order())].to_vec() }
    }

    fn check_shape(&self, o: &Self) -> Result<()> {
        if (self.rows, self.cols) != (o.rows, o.cols) {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{} series",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_shape(o)?;
        let k = self.order().min(o.order());
        Ok(MatSeries { rows: self.rows, cols: self.cols, c: (0..=k).map(|i| self.c[i].add(&o.c[i])).collect() })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check_shape(o)?;
        let k = self.order().min(o.order());
        Ok(MatSeries { rows: self.rows, cols: self.cols, c: (0..=k).map(|i| self.c[i].sub(&o.c[i])).collect() })
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        MatSeries { rows: self.rows, cols: self.cols, c: self.c.iter().map(|m| m.scale(s)).collect() }
    }

    /// Multiplication by `t^k`, keeping the order.
    pub fn shift(&self, k: usize) -> Self {
        let mut s = Self::zero(self.rows, self.cols, self.order());
        for i in k..=self.order() {
            s.c[i] = self.c[i - k].clone();
        }
        s
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(Error::Dimension(format!("{}x{} times {}x{}", self.rows, self.cols, o.rows, o.cols)));
        }
        let k = self.order().min(o.order());
        let mut out = Self::zero(self.rows, o.cols, k);
        let (va, vb) = (self.valuation(), o.valuation());
        for n in 0..=k {
            for i in va..=n.saturating_sub(vb) {
                let j = n - i;
                out.c[n].add_mul(&self.c[i], &o.c[j]);
            }
        }
        Ok(out)
    }

    pub fn mul_mat_right(&self, m: &Mat<R>) -> Self {
        MatSeries { rows: self.rows, cols: m.cols(), c: self.c.iter().map(|a| a.mul(m)).collect() }
    }

    pub fn mul_mat_left(&self, m: &Mat<R>) -> Self {
        MatSeries { rows: m.rows(), cols: self.cols, c: self.c.iter().map(|a| m.mul(a)).collect() }
    }

    /// `B_0 = A_0⁻¹`, `B_k = −A_0⁻¹ Σ_{j=1..k} A_j B_{k−j}`.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Dimension("inverse of a non-square series".into()));
        }
        let a0inv = self.c[0].inverse().ok_or_else(|| Error::Singular("constant term is not invertible".into()))?;
        let k = self.order();
        let mut b = Self::zero(self.rows, self.cols, k);
        b.c[0] = a0inv.clone();
        for n in 1..=k {
            let mut acc = Mat::zeros(self.rows, self.cols);
            for j in 1..=n {
                acc.add_mul(&self.c[j], &b.c[n - j]);
            }
            b.c[n] = a0inv.mul(&acc).neg();
        }
        Ok(b)
    }

    /// `Σ_{k≥1} β_k(d)·S^{k−1}`; `S` must vanish at `t = 0` so the sum is finite.
    pub fn eta_apply(&self, d: &Dist) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Dimension("η̃ of a non-square series".into()));
        }
        let k = self.order();
        let v = self.valuation();
        if v == 0 {
            return Err(Error::Precondition("argument of η̃ must carry a factor t".into()));
        }
        let beta = d.eta_tilde(k / v + 1)?;
        let mut out = Self::zero(self.rows, self.cols, k);
        let mut pw = Self::identity(self.rows, k);
        for b in &beta {
            if pw.valuation() > k {
                break;
            }
            if !Zero::is_zero(b) {
                out = out.add(&pw.scale(b))?;
            }
            pw = pw.mul(self)?;
        }
        Ok(out)
    }

    /// `uᵗ S v` coefficientwise.
    pub fn sandwich(&self, u: &[R], v: &[R]) -> Result<Vec<R>> {
        if u.len() != self.rows || v.len() != self.cols {
            return Err(Error::Dimension("sandwich vector lengths".into()));
        }
        Ok(self
            .c
            .iter()
            .map(|m| {
                let mv = m.mul_vec(v);
                let mut acc = R::rzero();
                for (a, b) in u.iter().zip(&mv) {
                    acc.add_mul(a, b);
                }
                acc
            })
            .collect())
    }
}

/// Scalar power series `Σ_{k≤K} c_k t^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarSeries {
    c: Vec<Scalar>,
}

impl ScalarSeries {
    pub fn zero(order: usize) -> Self {
        ScalarSeries { c: vec![Scalar::zero(); order + 1] }
    }

    pub fn constant(x: Scalar, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.c[0] = x;
        s
    }

    /// The series variable itself.
    pub fn var(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.c[1] = Scalar::one();
        }
        s
    }

    /// Pads with zeros or truncates to `order`.
    pub fn from_coeffs(mut c: Vec<Scalar>, order: usize) -> Self {
        c.resize(order + 1, Scalar::zero());
        ScalarSeries { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> Scalar {
        self.c.get(k).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    /// Lowest order with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        let k = self.order().min(o.order());
        ScalarSeries { c: (0..=k).map(|i| &self.c[i] + &o.c[i]).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let k = self.order().min(o.order());
        ScalarSeries { c: (0..=k).map(|i| &self.c[i] - &o.c[i]).collect() }
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        ScalarSeries { c: self.c.iter().map(|x| x * s).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let k = self.order().min(o.order());
        let mut c = vec![Scalar::zero(); k + 1];
        for (i, a) in self.c.iter().enumerate().take(k + 1) {
            if a.is_zero() {
                continue;
            }
            for j in 0..=k - i {
                if !o.c[j].is_zero() {
                    c[i + j] += &(a * &o.c[j]);
                }
            }
        }
        ScalarSeries { c }
    }

    pub fn pow(&self, e: usize) -> Self {
        (0..e).fold(Self::constant(Scalar::one(), self.order()), |a, _| a.mul(self))
    }

    pub fn inverse(&self) -> Result<Self> {
        let a0 = self.c[0].inv().ok_or_else(|| Error::Singular("series with zero constant term".into()))?;
        let k = self.order();
        let mut b = vec![a0.clone()];
        for n in 1..=k {
            let mut acc = Scalar::zero();
            for j in 1..=n {
                acc += &(&self.c[j] * &b[n - j]);
            }
            b.push(-(&a0 * &acc));
        }
        Ok(ScalarSeries { c: b })
    }

    /// Square root with constant term `r`, where `r² = c_0`.
    pub fn sqrt_with(&self, r: Scalar) -> Result<Self> {
        if &r * &r != self.c[0] || r.is_zero() {
            return Err(Error::Precondition("sqrt needs a nonzero square root of the constant term".into()));
        }
        let two_r_inv = (&r + &r).inv().unwrap();
        let k = self.order();
        let mut s = vec![r];
        for n in 1..=k {
            let mut acc = self.c[n].clone();
            for j in 1..n {
                acc -= &(&s[j] * &s[n - j]);
            }
            s.push(&acc * &two_r_inv);
        }
        Ok(ScalarSeries { c: s })
    }

    /// Substitutes `t ↦ t^m` (order grows by the factor `m`).
    pub fn stretch(&self, m: usize) -> Self {
        let mut out = Self::zero(self.order() * m);
        for (k, x) in self.c.iter().enumerate() {
            out.c[k * m] = x.clone();
        }
        out
    }

    /// `self(inner(t))`; `inner` must have no constant term.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !Zero::is_zero(&inner.coeff(0)) {
            return Err(Error::Precondition("composition needs an inner series without constant term".into()));
        }
        let k = self.order().min(inner.order());
        let inner = ScalarSeries::from_coeffs(inner.c.clone(), k);
        let mut acc = Self::zero(k);
        for c in self.c.iter().take(k + 1).rev() {
            acc = acc.mul(&inner).add(&Self::constant(c.clone(), k));
        }
        Ok(acc)
    }

    /// Keeps every `m`-th coefficient: `Σ c_{mk} t^k`.
    pub fn decimate(&self, m: usize) -> Self {
        ScalarSeries { c: self.c.iter().step_by(m).cloned().collect() }
    }
}

impl EvalAlgebra for ScalarSeries {
    fn dim(&self) -> usize {
        self.order()
    }
    fn one_like(&self) -> Self {
        Self::constant(Scalar::one(), self.order())
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn scaled(&self, c: &Scalar) -> Self {
        self.scale(c)
    }
    fn inverse_of(&self) -> Option<Self> {
        self.inverse().ok()
    }
}
