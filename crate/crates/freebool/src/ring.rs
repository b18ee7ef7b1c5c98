//! Coefficient rings for matrices and series.
//!
//! Two instances matter: [`Scalar`] (Gaussian rationals) and [`ZPoly`]
//! (exact polynomials in an auxiliary variable `z`, used when a pencil has
//! no grading and the series variable is a separate parameter `s`).

use std::fmt;

use num_traits::{One, Zero};

use crate::scalar::Scalar;

pub trait Ring: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn rzero() -> Self;
    fn rone() -> Self;
    fn ris_zero(&self) -> bool;
    fn radd(&self, o: &Self) -> Self;
    fn rsub(&self, o: &Self) -> Self;
    fn rmul(&self, o: &Self) -> Self;
    fn rneg(&self) -> Self;
    fn from_scalar(s: &Scalar) -> Self;
    fn scale(&self, s: &Scalar) -> Self;
    /// Multiplicative inverse when `self` is a unit.
    fn try_inv(&self) -> Option<Self>;

    /// Drops auxiliary-variable terms above `max_degree` (no-op for plain scalars).
    fn truncated(&self, _max_degree: usize) -> Self {
        self.clone()
    }

    fn radd_assign(&mut self, o: &Self) {
        if !o.ris_zero() {
            *self = self.radd(o);
        }
    }

    /// `self += a·b`, skipping zero factors.
    fn add_mul(&mut self, a: &Self, b: &Self) {
        if !a.ris_zero() && !b.ris_zero() {
            let p = a.rmul(b);
            self.radd_assign(&p);
        }
    }
}

impl Ring for Scalar {
    fn rzero() -> Self {
        <Scalar as Zero>::zero()
    }
    fn rone() -> Self {
        <Scalar as One>::one()
    }
    fn ris_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn radd(&self, o: &Self) -> Self {
        self + o
    }
    fn rsub(&self, o: &Self) -> Self {
        self - o
    }
    fn rmul(&self, o: &Self) -> Self {
        self * o
    }
    fn rneg(&self) -> Self {
        -self
    }
    fn from_scalar(s: &Scalar) -> Self {
        s.clone()
    }
    fn scale(&self, s: &Scalar) -> Self {
        self * s
    }
    fn try_inv(&self) -> Option<Self> {
        self.inv()
    }
    fn radd_assign(&mut self, o: &Self) {
        *self += o;
    }
}

/// Exact polynomial `Σ c_k z^k` without trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ZPoly {
    c: Vec<Scalar>,
}

impl ZPoly {
    pub fn from_coeffs(mut c: Vec<Scalar>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        ZPoly { c }
    }

    pub fn monomial(k: usize, s: Scalar) -> Self {
        let mut c = vec![<Scalar as Zero>::zero(); k + 1];
        c[k] = s;
        Self::from_coeffs(c)
    }

    /// Coefficient of `z^k`.
    pub fn coeff(&self, k: usize) -> Scalar {
        self.c.get(k).cloned().unwrap_or_else(<Scalar as Zero>::zero)
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.c
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn eval(&self, z: &Scalar) -> Scalar {
        let mut acc = <Scalar as Zero>::zero();
        for c in self.c.iter().rev() {
            acc = &(&acc * z) + c;
        }
        acc
    }
}

impl fmt::Debug for ZPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .filter(|(_, c)| !Zero::is_zero(*c))
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                _ => format!("({c})z^{k}"),
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl Ring for ZPoly {
    fn rzero() -> Self {
        ZPoly { c: Vec::new() }
    }
    fn rone() -> Self {
        ZPoly { c: vec![<Scalar as One>::one()] }
    }
    fn ris_zero(&self) -> bool {
        self.c.is_empty()
    }
    fn radd(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let c = (0..n)
            .map(|k| match (self.c.get(k), o.c.get(k)) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) | (None, Some(a)) => a.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        Self::from_coeffs(c)
    }
    fn rsub(&self, o: &Self) -> Self {
        self.radd(&o.rneg())
    }
    fn rmul(&self, o: &Self) -> Self {
        if self.c.is_empty() || o.c.is_empty() {
            return Self::rzero();
        }
        let mut c = vec![<Scalar as Zero>::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if Zero::is_zero(a) {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if !Zero::is_zero(b) {
                    c[i + j] += &(a * b);
                }
            }
        }
        Self::from_coeffs(c)
    }
    fn rneg(&self) -> Self {
        ZPoly { c: self.c.iter().map(|a| -a).collect() }
    }
    fn from_scalar(s: &Scalar) -> Self {
        Self::from_coeffs(vec![s.clone()])
    }
    fn scale(&self, s: &Scalar) -> Self {
        Self::from_coeffs(self.c.iter().map(|a| a * s).collect())
    }
    fn truncated(&self, max_degree: usize) -> Self {
        if self.c.len() <= max_degree + 1 {
            return self.clone();
        }
        Self::from_coeffs(self.c[..=max_degree].to_vec())
    }
    fn try_inv(&self) -> Option<Self> {
        match self.c.len() {
            1 => self.c[0].inv().map(|x| ZPoly { c: vec![x] }),
            _ => None,
        }
    }
}
