//! Random-matrix models for free variables and Monte-Carlo trace moments.
//!
//! A semicircular variable is modelled by a GUE matrix; any other marginal by
//! `U D U*` with `D` an i.i.d. diagonal and `U` Haar unitary. Independent
//! draws of size `N` are asymptotically free, so normalized traces of a
//! polynomial in them approach the moments computed exactly by `freebool`.
//!
//! Complex matrices are stored as a pair of real matrices so that products go
//! through the fast real kernel (three real products per complex one).

use std::collections::BTreeMap;

use freebool::cumulants::{Dist, DistKind, Embedding};
use freebool::ncpoly::{evaluate, EvalAlgebra, RatExpr, Var};
use freebool::{Error, Result, Scalar};
use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub use rand::SeedableRng;

pub type C64 = Complex<f64>;

/// Square complex matrix `re + i·im`.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat { re: DMatrix::zeros(n, n), im: DMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        CMat { re: DMatrix::identity(n, n), im: DMatrix::zeros(n, n) }
    }

    pub fn real(re: DMatrix<f64>) -> Self {
        let n = re.nrows();
        CMat { re, im: DMatrix::zeros(n, n) }
    }

    pub fn from_complex(m: &DMatrix<C64>) -> Self {
        CMat { re: m.map(|c| c.re), im: m.map(|c| c.im) }
    }

    pub fn to_complex(&self) -> DMatrix<C64> {
        self.re.zip_map(&self.im, C64::new)
    }

    pub fn n(&self) -> usize {
        self.re.nrows()
    }

    pub fn add(&self, o: &Self) -> Self {
        CMat { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn sub(&self, o: &Self) -> Self {
        CMat { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    pub fn scale(&self, c: C64) -> Self {
        CMat { re: &self.re * c.re - &self.im * c.im, im: &self.re * c.im + &self.im * c.re }
    }

    /// Gauss's three-multiplication product.
    pub fn mul(&self, o: &Self) -> Self {
        let ac = &self.re * &o.re;
        let bd = &self.im * &o.im;
        let cross = (&self.re + &self.im) * (&o.re + &o.im);
        CMat { im: cross - &ac - &bd, re: ac - bd }
    }

    pub fn adjoint(&self) -> Self {
        CMat { re: self.re.transpose(), im: -self.im.transpose() }
    }

    pub fn trace(&self) -> C64 {
        C64::new(self.re.trace(), self.im.trace())
    }

    /// `Tr(A·B)` without forming the product.
    pub fn trace_of_product(&self, o: &Self) -> C64 {
        let (ort, oit) = (o.re.transpose(), o.im.transpose());
        C64::new(
            self.re.dot(&ort) - self.im.dot(&oit),
            self.re.dot(&oit) + self.im.dot(&ort),
        )
    }

    /// `max |A − A*|` entrywise.
    pub fn hermitian_defect(&self) -> f64 {
        let d = self.sub(&self.adjoint());
        d.re.zip_map(&d.im, |a, b| a.hypot(b)).max()
    }

    /// Inverse through the real representation `[[A, −B], [B, A]]`.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n();
        let mut big = DMatrix::zeros(2 * n, 2 * n);
        big.view_mut((0, 0), (n, n)).copy_from(&self.re);
        big.view_mut((n, n), (n, n)).copy_from(&self.re);
        big.view_mut((n, 0), (n, n)).copy_from(&self.im);
        big.view_mut((0, n), (n, n)).copy_from(&(-&self.im));
        let inv = big.try_inverse()?;
        Some(CMat { re: inv.view((0, 0), (n, n)).into_owned(), im: inv.view((n, 0), (n, n)).into_owned() })
    }
}

pub fn cabs(c: C64) -> f64 {
    c.re.hypot(c.im)
}

fn to_c64(s: &Scalar) -> C64 {
    let (re, im) = s.to_f64();
    C64::new(re, im)
}

impl EvalAlgebra for CMat {
    fn dim(&self) -> usize {
        self.n()
    }
    fn one_like(&self) -> Self {
        CMat::identity(self.n())
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn scaled(&self, c: &Scalar) -> Self {
        self.scale(to_c64(c))
    }
    fn inverse_of(&self) -> Option<Self> {
        self.inverse()
    }
}

/// Diagonal marginal conjugated by a Haar unitary.
#[derive(Clone, Debug, PartialEq)]
pub enum Diagonal {
    /// Symmetric ±1.
    Bernoulli,
    /// `2cos(πU)`, `U` uniform on [0, 1].
    Arcsine,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Sampler {
    Gue { variance: f64 },
    ConjugatedDiagonal(Diagonal),
    /// `c·I`.
    Constant(f64),
}

impl Sampler {
    pub fn for_dist(d: &Dist) -> Result<Self> {
        let real = |s: &Scalar, what: &str| -> Result<f64> {
            if s.is_real() {
                Ok(s.to_f64().0)
            } else {
                Err(Error::Precondition(format!("{what} must be real for a Hermitian model")))
            }
        };
        match d.kind() {
            DistKind::Semicircle { variance } => {
                let v = real(variance, "semicircle variance")?;
                if v < 0.0 {
                    return Err(Error::Precondition("semicircle variance must be nonnegative".into()));
                }
                Ok(Sampler::Gue { variance: v })
            }
            DistKind::Bernoulli => Ok(Sampler::ConjugatedDiagonal(Diagonal::Bernoulli)),
            DistKind::Arcsine => Ok(Sampler::ConjugatedDiagonal(Diagonal::Arcsine)),
            DistKind::Point { c } => Ok(Sampler::Constant(real(c, "point mass")?)),
            DistKind::Moments(_) => {
                Err(Error::Precondition("no matrix model for a law given only by moments".into()))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixModel {
    pub n: usize,
    pub samplers: BTreeMap<Var, Sampler>,
    pub seed: u64,
}

impl MatrixModel {
    pub fn from_embedding(emb: &Embedding, n: usize, seed: u64) -> Result<Self> {
        let samplers = emb.vars().map(|v| Ok((v, Sampler::for_dist(emb.dist(v))?))).collect::<Result<_>>()?;
        Ok(MatrixModel { n, samplers, seed })
    }

    /// Independent matrices for all variables of one trial.
    pub fn sample(&self, trial: u64) -> Result<BTreeMap<Var, CMat>> {
        if self.n < 2 {
            return Err(Error::Precondition("matrix size must be at least 2".into()));
        }
        Ok(self
            .samplers
            .iter()
            .map(|(&v, s)| {
                let mut rng = derived_rng(self.seed, v, trial);
                (v, draw(s, self.n, &mut rng))
            })
            .collect())
    }
}

/// One ChaCha stream per (variable, trial), all keyed by the same seed.
pub fn derived_rng(seed: u64, v: Var, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((trial << 16) | v as u64);
    rng
}

pub fn draw(s: &Sampler, n: usize, rng: &mut ChaCha8Rng) -> CMat {
    match s {
        Sampler::Gue { variance } => gue(n, *variance, rng),
        Sampler::ConjugatedDiagonal(d) => {
            let diag = diagonal(d, n, rng);
            conjugate(&diag, &haar_unitary(n, rng))
        }
        Sampler::Constant(c) => CMat::identity(n).scale(C64::new(*c, 0.0)),
    }
}

/// Hermitian with `E|H_ij|² = variance/N`, so `tr_N(H²) → variance`.
pub fn gue(n: usize, variance: f64, rng: &mut ChaCha8Rng) -> CMat {
    let sd = (variance / n as f64).sqrt();
    let off = sd / std::f64::consts::SQRT_2;
    let mut h = CMat::zeros(n);
    for i in 0..n {
        let g: f64 = StandardNormal.sample(rng);
        h.re[(i, i)] = sd * g;
        for j in i + 1..n {
            let (a, b): (f64, f64) = (StandardNormal.sample(rng), StandardNormal.sample(rng));
            h.re[(i, j)] = off * a;
            h.re[(j, i)] = off * a;
            h.im[(i, j)] = off * b;
            h.im[(j, i)] = -off * b;
        }
    }
    h
}

pub fn diagonal(d: &Diagonal, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n)
        .map(|_| match d {
            Diagonal::Bernoulli => {
                if rng.gen_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
            Diagonal::Arcsine => 2.0 * (std::f64::consts::PI * rng.gen::<f64>()).cos(),
        })
        .collect()
}

/// Haar unitary from the QR factorization of a complex Ginibre matrix, with
/// the phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let z = DMatrix::<C64>::from_fn(n, n, |_, _| {
        let (a, b): (f64, f64) = (StandardNormal.sample(rng), StandardNormal.sample(rng));
        C64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if cabs(d) > 0.0 { d / cabs(d) } else { C64::new(1.0, 0.0) };
        q.column_mut(j).scale_mut_complex(phase);
    }
    CMat::from_complex(&q)
}

trait ScaleComplex {
    fn scale_mut_complex(&mut self, c: C64);
}

impl<S: nalgebra::StorageMut<C64, nalgebra::Dyn, nalgebra::U1>> ScaleComplex for nalgebra::Matrix<C64, nalgebra::Dyn, nalgebra::U1, S> {
    fn scale_mut_complex(&mut self, c: C64) {
        for x in self.iter_mut() {
            *x *= c;
        }
    }
}

/// `U·diag(d)·U*`.
pub fn conjugate(d: &[f64], u: &CMat) -> CMat {
    let mut ud = u.clone();
    for (j, &x) in d.iter().enumerate() {
        ud.re.column_mut(j).scale_mut(x);
        ud.im.column_mut(j).scale_mut(x);
    }
    ud.mul(&u.adjoint())
}

/// Formal adjoint: reversed products, conjugated constants.
pub fn adjoint_expr(e: &RatExpr) -> RatExpr {
    match e {
        RatExpr::Var(v) => RatExpr::Var(*v),
        RatExpr::Const(c) => RatExpr::Const(c.conj()),
        RatExpr::Sum(xs) => RatExpr::Sum(xs.iter().map(adjoint_expr).collect()),
        RatExpr::Prod(xs) => RatExpr::Prod(xs.iter().rev().map(adjoint_expr).collect()),
        RatExpr::Inv(x) => RatExpr::Inv(Box::new(adjoint_expr(x))),
    }
}

fn expandable(e: &RatExpr) -> bool {
    match e {
        RatExpr::Var(_) | RatExpr::Const(_) => true,
        RatExpr::Sum(xs) | RatExpr::Prod(xs) => xs.iter().all(expandable),
        RatExpr::Inv(x) => expandable(x) && x.eps() != Scalar::int(0),
    }
}

/// Self-adjointness of `e` for self-adjoint arguments, decided on the series
/// expansion to length `max_len`; `None` when an inverse has no expansion at 0.
pub fn formally_selfadjoint(e: &RatExpr, max_len: usize) -> Option<bool> {
    if !expandable(e) {
        return None;
    }
    Some(e.expand(max_len) == adjoint_expr(e).expand(max_len))
}

/// Normalized trace moments of `T = e(X_1, …)` at sampled matrices.
#[derive(Clone, Debug)]
pub struct TraceMoments {
    /// `(1/N)·Tr(T^k)` for `k = 0..=k_max`.
    pub moments: Vec<C64>,
    pub hermitian_defect: f64,
    /// Whether `T` should be Hermitian (when decidable).
    pub expect_hermitian: Option<bool>,
}

impl TraceMoments {
    pub const HERMITIAN_TOL: f64 = 1e-10;

    /// Hermitian-ness was expected but failed beyond tolerance.
    pub fn hermitian_warning(&self) -> bool {
        self.expect_hermitian == Some(true) && self.hermitian_defect > Self::HERMITIAN_TOL
    }
}

pub fn trace_moments(e: &RatExpr, mats: &BTreeMap<Var, CMat>, k_max: usize) -> Result<TraceMoments> {
    let t = evaluate(e, mats)?;
    let n = t.n() as f64;
    // powers up to ⌈k_max/2⌉; Tr(T^k) = Tr(T^a T^b) with a + b = k
    let half = k_max.div_ceil(2).max(1);
    let mut pw = vec![CMat::identity(t.n()), t.clone()];
    while pw.len() <= half {
        pw.push(pw.last().unwrap().mul(&t));
    }
    let moments = (0..=k_max)
        .map(|k| {
            let a = k / 2;
            pw[a].trace_of_product(&pw[k - a]) / n
        })
        .collect();
    Ok(TraceMoments {
        moments,
        hermitian_defect: t.hermitian_defect(),
        expect_hermitian: formally_selfadjoint(e, 8),
    })
}

/// Comparison of one Monte-Carlo moment with its exact value.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentCheck {
    pub k: usize,
    pub estimate: C64,
    pub target: Scalar,
    /// Relative error for `|target| ≥ 1`, absolute error otherwise.
    pub rel_err: f64,
    pub pass: bool,
}

pub const REL_TOL: f64 = 0.05;
pub const ABS_TOL: f64 = 0.1;

pub fn compare(estimates: &[C64], targets: &[Scalar], from: usize) -> Vec<MomentCheck> {
    estimates
        .iter()
        .zip(targets)
        .enumerate()
        .skip(from)
        .map(|(k, (est, tgt))| {
            let t = to_c64(tgt);
            let diff = cabs(est - t);
            let (rel_err, pass) = if cabs(t) >= 1.0 {
                let r = diff / cabs(t);
                (r, r <= REL_TOL)
            } else {
                (diff, diff <= ABS_TOL)
            };
            MomentCheck { k, estimate: *est, target: tgt.clone(), rel_err, pass }
        })
        .collect()
}

/// Like [`compare`], but a zero target at `k` is judged against the size of
/// its neighbours: `|estimate| ≤ 5%·√|m_{k−1}·m_{k+1}|`. Single-trial
/// fluctuations of a vanishing moment scale like the neighbouring moments
/// over `N`, so a fixed absolute bound is too strict for large polynomials.
/// `targets` must extend one order beyond `estimates`.
pub fn compare_scaled(estimates: &[C64], targets: &[Scalar], from: usize) -> Vec<MomentCheck> {
    let mut out = compare(estimates, targets, from);
    for c in &mut out {
        if c.target != Scalar::int(0) || c.k == 0 || c.k + 1 >= targets.len() {
            continue;
        }
        let scale = (cabs(to_c64(&targets[c.k - 1])) * cabs(to_c64(&targets[c.k + 1]))).sqrt();
        if scale > 0.0 {
            c.rel_err = cabs(c.estimate) / scale;
            c.pass = c.rel_err <= REL_TOL;
        }
    }
    out
}

/// Density histogram of `values` on `bins` equal bins spanning their range:
/// `(bin center, density)` rows.
pub fn histogram(values: &[f64], bins: usize) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() || bins == 0 {
        return Err(Error::Precondition("histogram needs values and at least one bin".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let total = values.len() as f64 * width;
    Ok(counts.iter().enumerate().map(|(b, &c)| (lo + (b as f64 + 0.5) * width, c as f64 / total)).collect())
}

/// Eigenvalues of a Hermitian matrix `A + iB`, from the real symmetric
/// `[[A, −B], [B, A]]` whose spectrum is that of `A + iB` with doubled
/// multiplicities.
#[cfg(feature = "histogram")]
pub fn eigenvalues(h: &CMat) -> Vec<f64> {
    let n = h.n();
    let mut big = DMatrix::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(&h.re);
    big.view_mut((n, n), (n, n)).copy_from(&h.re);
    big.view_mut((n, 0), (n, n)).copy_from(&h.im);
    big.view_mut((0, n), (n, n)).copy_from(&(-&h.im));
    let mut ev: Vec<f64> = big.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.into_iter().step_by(2).collect()
}

#[cfg(not(feature = "histogram"))]
pub fn eigenvalues(_h: &CMat) -> Vec<f64> {
    Vec::new()
}

pub const HAS_EIGENSOLVER: bool = cfg!(feature = "histogram");

/// Spectrum of `e` at sampled matrices; needs the `histogram` feature.
pub fn spectrum(e: &RatExpr, mats: &BTreeMap<Var, CMat>) -> Result<Vec<f64>> {
    if !HAS_EIGENSOLVER {
        return Err(Error::Precondition("built without the `histogram` feature".into()));
    }
    let t = evaluate(e, mats)?;
    Ok(eigenvalues(&t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(5)
    }

    #[test]
    fn complex_arithmetic() {
        let mut r = rng();
        let a = gue(6, 1.0, &mut r);
        let b = haar_unitary(6, &mut r);
        let want = a.to_complex() * b.to_complex();
        let got = a.mul(&b).to_complex();
        assert!((want - got).norm() < 1e-12);
        let p = a.trace_of_product(&b);
        assert!(cabs(p - a.mul(&b).trace()) < 1e-12);
        let u = b.mul(&b.adjoint());
        assert!(u.sub(&CMat::identity(6)).re.norm() < 1e-12);
        let m = a.add(&CMat::identity(6).scale(C64::new(3.0, 1.0)));
        assert!(m.mul(&m.inverse().unwrap()).sub(&CMat::identity(6)).to_complex().norm() < 1e-10);
    }

    #[test]
    fn histogram_normalizes_to_density() {
        let h = histogram(&[-1.0, -1.0, 1.0, 1.0], 2).unwrap();
        assert_eq!(h, vec![(-0.5, 0.5), (0.5, 0.5)]);
        assert!(histogram(&[], 3).is_err());
    }
}
