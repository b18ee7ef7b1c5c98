//! Marginal distributions, Boolean cumulants and the freeness oracle.

mod oracle;

pub use oracle::*;

use std::sync::RwLock;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::Scalar;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum DistKind {
    Semicircle { variance: Scalar },
    /// Symmetric Bernoulli on ±1.
    Bernoulli,
    /// Arcsine law on [−2, 2], the law of `g + g⁻¹` for a Haar unitary `g`.
    Arcsine,
    Point { c: Scalar },
    /// Explicit moments `m_0 = 1, m_1, …`; orders beyond the list are unavailable.
    Moments(Vec<Scalar>),
}

/// `η̃ = c0 + c1·w + c2·w·η̃²`, the algebraic form of the shifted Boolean
/// cumulant series shared by all builtin laws.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadEta {
    pub c0: Scalar,
    pub c1: Scalar,
    pub c2: Scalar,
}

/// A univariate law with lazily grown moment and cumulant tables.
#[derive(Debug)]
pub struct Dist {
    kind: DistKind,
    cache: RwLock<Tables>,
}

#[derive(Debug, Default, Clone)]
struct Tables {
    m: Vec<Scalar>,
    /// `b[n]` holds β_n; `b[0]` is an unused zero.
    b: Vec<Scalar>,
}

impl Clone for Dist {
    fn clone(&self) -> Self {
        Dist { kind: self.kind.clone(), cache: RwLock::new(self.cache.read().unwrap().clone()) }
    }
}

impl PartialEq for Dist {
    fn eq(&self, o: &Self) -> bool {
        self.kind == o.kind
    }
}

impl Dist {
    fn from_kind(kind: DistKind) -> Self {
        Dist { kind, cache: RwLock::new(Tables::default()) }
    }

    pub fn semicircle(variance: Scalar) -> Self {
        Self::from_kind(DistKind::Semicircle { variance })
    }

    pub fn standard_semicircle() -> Self {
        Self::semicircle(Scalar::one())
    }

    pub fn bernoulli() -> Self {
        Self::from_kind(DistKind::Bernoulli)
    }

    pub fn arcsine() -> Self {
        Self::from_kind(DistKind::Arcsine)
    }

    pub fn point(c: Scalar) -> Self {
        Self::from_kind(DistKind::Point { c })
    }

    pub fn from_moments(m: Vec<Scalar>) -> Result<Self> {
        if m.first() != Some(&Scalar::one()) {
            return Err(Error::Precondition("moment sequence must start with m_0 = 1".into()));
        }
        Ok(Self::from_kind(DistKind::Moments(m)))
    }

    pub fn kind(&self) -> &DistKind {
        &self.kind
    }

    /// Highest available moment order, `None` if unbounded.
    pub fn max_order(&self) -> Option<usize> {
        match &self.kind {
            DistKind::Moments(m) => Some(m.len() - 1),
            _ => None,
        }
    }

    fn formula(&self, n: usize) -> Result<Scalar> {
        let even = |f: &dyn Fn(usize) -> Scalar| if n % 2 == 1 { Scalar::zero() } else { f(n / 2) };
        Ok(match &self.kind {
            DistKind::Semicircle { variance } => even(&|k| {
                let cat = binomial(BigInt::from(2 * k), BigInt::from(k)) / BigInt::from(k + 1);
                &Scalar::real(BigRational::from_integer(cat)) * &variance.pow(k as u32)
            }),
            DistKind::Bernoulli => even(&|_| Scalar::one()),
            DistKind::Arcsine => {
                even(&|k| Scalar::real(BigRational::from_integer(binomial(BigInt::from(2 * k), BigInt::from(k)))))
            }
            DistKind::Point { c } => c.pow(n as u32),
            DistKind::Moments(m) => m
                .get(n)
                .cloned()
                .ok_or_else(|| Error::Precondition(format!("moment of order {n} not supplied (have {})", m.len() - 1)))?,
        })
    }

    fn grow(&self, n: usize) -> Result<()> {
        if self.cache.read().unwrap().m.len() > n {
            return Ok(());
        }
        let mut t = self.cache.write().unwrap();
        while t.m.len() <= n {
            let k = t.m.len();
            let mk = self.formula(k)?;
            t.m.push(mk);
            if k == 0 {
                t.b.push(Scalar::zero());
                continue;
            }
            let mut bk = t.m[k].clone();
            for j in 1..k {
                if !t.b[j].is_zero() {
                    bk -= &(&t.b[j] * &t.m[k - j]);
                }
            }
            t.b.push(bk);
        }
        Ok(())
    }

    pub fn try_moment(&self, n: usize) -> Result<Scalar> {
        self.grow(n)?;
        Ok(self.cache.read().unwrap().m[n].clone())
    }

    /// `m_n`. Panics beyond the supplied order of an explicit moment list.
    pub fn moment(&self, n: usize) -> Scalar {
        self.try_moment(n).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn moments(&self, n: usize) -> Result<Vec<Scalar>> {
        self.grow(n)?;
        Ok(self.cache.read().unwrap().m[..=n].to_vec())
    }

    pub fn try_boolean(&self, n: usize) -> Result<Scalar> {
        self.grow(n)?;
        Ok(self.cache.read().unwrap().b[n].clone())
    }

    /// `β_n` for `n >= 1`.
    pub fn boolean(&self, n: usize) -> Scalar {
        assert!(n >= 1, "Boolean cumulants start at order 1");
        self.try_boolean(n).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Coefficients of `η̃(w) = Σ_{n≥1} β_n w^{n−1}` up to `w^{k−1}`.
    pub fn eta_tilde(&self, k: usize) -> Result<Vec<Scalar>> {
        self.grow(k)?;
        Ok(self.cache.read().unwrap().b[1..=k].to_vec())
    }

    /// Quadratic form of `η̃`, available for every builtin law.
    pub fn eta_form(&self) -> Option<QuadEta> {
        let (c0, c1, c2) = match &self.kind {
            DistKind::Semicircle { variance } => (Scalar::zero(), variance.clone(), Scalar::one()),
            DistKind::Bernoulli => (Scalar::zero(), Scalar::one(), Scalar::zero()),
            DistKind::Arcsine => (Scalar::zero(), Scalar::int(2), Scalar::ratio(1, 2)),
            DistKind::Point { c } => (c.clone(), Scalar::zero(), Scalar::zero()),
            DistKind::Moments(_) => return None,
        };
        Some(QuadEta { c0, c1, c2 })
    }
}

/// `β_n = m_n − Σ_{k<n} β_k m_{n−k}`; returns `β_1..β_n`.
pub fn moments_to_boolean(m: &[Scalar], n: usize) -> Result<Vec<Scalar>> {
    if m.first() != Some(&Scalar::one()) {
        return Err(Error::Precondition("m_0 must be 1".into()));
    }
    if m.len() <= n {
        return Err(Error::Precondition(format!("need {} moments, have {}", n + 1, m.len())));
    }
    let mut b: Vec<Scalar> = Vec::with_capacity(n);
    for k in 1..=n {
        let mut v = m[k].clone();
        for j in 1..k {
            v -= &(&b[j - 1] * &m[k - j]);
        }
        b.push(v);
    }
    Ok(b)
}

/// Inverse of [`moments_to_boolean`]: `b[k−1] = β_k`, returns `m_0..m_n`.
pub fn boolean_to_moments(b: &[Scalar], n: usize) -> Vec<Scalar> {
    let beta = |k: usize| b.get(k - 1).cloned().unwrap_or_else(Scalar::zero);
    let mut m = vec![Scalar::one()];
    for k in 1..=n {
        let mut v = Scalar::zero();
        for j in 1..=k {
            let bj = beta(j);
            if !bj.is_zero() {
                v += &(&bj * &m[k - j]);
            }
        }
        m.push(v);
    }
    m
}

/// All interval partitions of `{1..n}` as block-size compositions (`2^{n−1}` of them).
pub fn interval_partitions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    (0..1u64 << (n - 1))
        .map(|mask| {
            let mut blocks = Vec::new();
            let mut len = 1;
            for i in 0..n - 1 {
                if mask >> i & 1 == 1 {
                    blocks.push(len);
                    len = 1;
                } else {
                    len += 1;
                }
            }
            blocks.push(len);
            blocks
        })
        .collect()
}
