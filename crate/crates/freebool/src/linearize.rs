//! Linear representations of rational series and graded pencils for resolvents.
//!
//! A [`LinRep`] `(u, M, v)` represents `S = uᵗ(I − Σ M_x x)⁻¹v`, i.e.
//! `⟨S, x₁⋯x_k⟩ = uᵗ M_{x₁}⋯M_{x_k} v`. A [`GradedPencil`] represents
//! `uᵗ(I − z Σ C_x(z) x)⁻¹v` with `C_x` polynomial in `z`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::matrix::Mat;
use crate::ncpoly::{NCPoly, RatExpr, Var, VarSet, Word};
use crate::ring::{Ring, ZPoly};
use crate::scalar::Scalar;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LinRep {
    pub u: Vec<Scalar>,
    pub v: Vec<Scalar>,
    pub m: BTreeMap<Var, Mat<Scalar>>,
}

impl LinRep {
    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn constant(c: Scalar) -> Self {
        LinRep { u: vec![c], v: vec![Scalar::one()], m: BTreeMap::new() }
    }

    pub fn var(x: Var) -> Self {
        let mut mx = Mat::zeros(2, 2);
        mx[(0, 1)] = Scalar::one();
        LinRep { u: vec![Scalar::one(), Scalar::zero()], v: vec![Scalar::zero(), Scalar::one()], m: [(x, mx)].into() }
    }

    pub fn vars(&self) -> VarSet {
        self.m.keys().copied().collect()
    }

    fn mat(&self, x: Var) -> Mat<Scalar> {
        self.m.get(&x).cloned().unwrap_or_else(|| Mat::zeros(self.dim(), self.dim()))
    }

    /// `⟨S, 1⟩ = uᵗv`.
    pub fn constant_term(&self) -> Scalar {
        dot(&self.u, &self.v)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        LinRep { u: self.u.iter().map(|x| x * c).collect(), ..self.clone() }
    }

    pub fn sum(&self, o: &Self) -> Self {
        let (na, nb) = (self.dim(), o.dim());
        let vars: BTreeSet<Var> = self.vars().union(&o.vars()).copied().collect();
        let m = vars
            .into_iter()
            .map(|x| {
                let (a, b) = (self.mat(x), o.mat(x));
                (x, block(&a, &Mat::zeros(na, nb), &Mat::zeros(nb, na), &b))
            })
            .collect();
        LinRep { u: cat(&self.u, &o.u), v: cat(&self.v, &o.v), m }
    }

    pub fn prod(&self, o: &Self) -> Self {
        let (na, nb) = (self.dim(), o.dim());
        let vars: BTreeSet<Var> = self.vars().union(&o.vars()).copied().collect();
        let tb = o.constant_term();
        // v_a u_bᵗ
        let vu = Mat::from_fn(na, nb, |i, j| &self.v[i] * &o.u[j]);
        let m = vars
            .into_iter()
            .map(|x| {
                let (a, b) = (self.mat(x), o.mat(x));
                (x, block(&a, &vu.mul(&b), &Mat::zeros(nb, na), &b))
            })
            .collect();
        let u = cat(&self.u, &vec![Scalar::zero(); nb]);
        let v = cat(&self.v.iter().map(|x| x * &tb).collect::<Vec<_>>(), &o.v);
        LinRep { u, v, m }
    }

    /// `S⁺ = S + S² + ⋯` for a proper series (`uᵗv = 0`).
    pub fn quasi_inverse(&self) -> Result<Self> {
        if !self.constant_term().is_zero() {
            return Err(Error::Precondition("quasi-inverse of a series with nonzero constant term".into()));
        }
        let n = self.dim();
        let vu = Mat::from_fn(n, n, |i, j| &self.v[i] * &self.u[j]);
        let m = self.m.iter().map(|(&x, a)| (x, a.add(&vu.mul(a)))).collect();
        Ok(LinRep { m, ..self.clone() })
    }

    /// `inv(S) = c⁻¹(1 + (1 − S/c)⁺)` with `c = ⟨S, 1⟩ ≠ 0`.
    pub fn inverse(&self) -> Result<Self> {
        let c = self.constant_term();
        let cinv = c.inv().ok_or_else(|| Error::Precondition("inverse of a series with zero constant term".into()))?;
        let q = LinRep::constant(Scalar::one()).sum(&self.scale(&-cinv.clone()));
        let q = q.minimize();
        Ok(LinRep::constant(Scalar::one()).sum(&q.quasi_inverse()?).scale(&cinv).minimize())
    }

    /// Removes states that are unreachable from `u` or cannot reach `v`.
    pub fn trim(&self) -> Self {
        let n = self.dim();
        let nz = |i: usize, j: usize| self.m.values().any(|a| !a[(i, j)].is_zero());
        let closure = |start: Vec<usize>, fwd: bool| {
            let mut seen = vec![false; n];
            let mut stack = start;
            while let Some(i) = stack.pop() {
                if std::mem::replace(&mut seen[i], true) {
                    continue;
                }
                stack.extend((0..n).filter(|&j| !seen[j] && (if fwd { nz(i, j) } else { nz(j, i) })));
            }
            seen
        };
        let fwd = closure((0..n).filter(|&i| !self.u[i].is_zero()).collect(), true);
        let bwd = closure((0..n).filter(|&i| !self.v[i].is_zero()).collect(), false);
        let keep: Vec<usize> = (0..n).filter(|&i| fwd[i] && bwd[i]).collect();
        self.restrict(&keep)
    }

    fn restrict(&self, keep: &[usize]) -> Self {
        let k = keep.len();
        LinRep {
            u: keep.iter().map(|&i| self.u[i].clone()).collect(),
            v: keep.iter().map(|&i| self.v[i].clone()).collect(),
            m: self.m.iter().map(|(&x, a)| (x, Mat::from_fn(k, k, |i, j| a[(keep[i], keep[j])].clone()))).collect(),
        }
    }

    /// Merges states with identical futures (equal rows and `v`) or identical
    /// pasts (equal columns and `u`).
    fn merge_once(&self) -> Option<Self> {
        let n = self.dim();
        for i in 0..n {
            for j in i + 1..n {
                let same_row = self.v[i] == self.v[j] && self.m.values().all(|a| a.row(i) == a.row(j));
                if same_row {
                    let mut r = self.clone();
                    r.u[i] = &r.u[i] + &r.u[j];
                    for a in r.m.values_mut() {
                        for k in 0..n {
                            let t = a[(k, j)].clone();
                            a[(k, i)] += &t;
                        }
                    }
                    let keep: Vec<usize> = (0..n).filter(|&k| k != j).collect();
                    return Some(r.restrict(&keep));
                }
                let same_col = self.u[i] == self.u[j] && self.m.values().all(|a| (0..n).all(|k| a[(k, i)] == a[(k, j)]));
                if same_col {
                    let mut r = self.clone();
                    r.v[i] = &r.v[i] + &r.v[j];
                    for a in r.m.values_mut() {
                        for k in 0..n {
                            let t = a[(j, k)].clone();
                            a[(i, k)] += &t;
                        }
                    }
                    let keep: Vec<usize> = (0..n).filter(|&k| k != j).collect();
                    return Some(r.restrict(&keep));
                }
            }
        }
        None
    }

    /// Trimming plus state merging; not a full minimization.
    pub fn minimize(&self) -> Self {
        let mut r = self.trim();
        while let Some(s) = r.merge_once() {
            r = s.trim();
        }
        r
    }

    /// The represented series up to word length `max_len`.
    pub fn expand(&self, max_len: usize) -> NCPoly {
        let mut row: Vec<NCPoly> = self.u.iter().map(|c| NCPoly::constant(c.clone())).collect();
        let mut out = NCPoly::zero();
        for len in 0..=max_len {
            out = out.add(&dot_poly(&row, &self.v));
            if len == max_len {
                break;
            }
            row = step(&row, self.m.iter().map(|(&x, a)| (x, a)));
        }
        out
    }

    /// `⟨S, w⟩`.
    pub fn coefficient(&self, w: &Word) -> Scalar {
        let mut r = self.u.clone();
        for &x in w.letters() {
            match self.m.get(&x) {
                Some(a) => r = a.vec_mul(&r),
                None => return Scalar::zero(),
            }
        }
        dot(&r, &self.v)
    }
}

fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).fold(Scalar::zero(), |acc, (x, y)| acc + x * y)
}

fn dot_poly(a: &[NCPoly], b: &[Scalar]) -> NCPoly {
    a.iter().zip(b).fold(NCPoly::zero(), |acc, (p, c)| acc.add(&p.scale(c)))
}

/// `row ↦ Σ_x (row · A_x)·x`, appending `x` on the right.
fn step<'a>(row: &[NCPoly], mats: impl Iterator<Item = (Var, &'a Mat<Scalar>)>) -> Vec<NCPoly> {
    let n = row.len();
    let mut out = vec![NCPoly::zero(); n];
    for (x, a) in mats {
        let xp = NCPoly::var(x);
        for i in 0..n {
            if row[i].is_zero() {
                continue;
            }
            let rx = row[i].mul(&xp);
            for (j, o) in out.iter_mut().enumerate() {
                let c = &a[(i, j)];
                if !c.is_zero() {
                    *o = o.add(&rx.scale(c));
                }
            }
        }
    }
    out
}

fn cat(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    a.iter().chain(b).cloned().collect()
}

fn block<R: Ring>(a: &Mat<R>, b: &Mat<R>, c: &Mat<R>, d: &Mat<R>) -> Mat<R> {
    let (na, nb) = (a.rows(), d.rows());
    Mat::from_fn(na + nb, na + nb, |i, j| match (i < na, j < na) {
        (true, true) => a[(i, j)].clone(),
        (true, false) => b[(i, j - na)].clone(),
        (false, true) => c[(i - na, j)].clone(),
        (false, false) => d[(i - na, j - na)].clone(),
    })
}

/// Compositional representation of a rational expression.
pub fn rationalize(e: &RatExpr) -> Result<LinRep> {
    Ok(match e {
        RatExpr::Var(x) => LinRep::var(*x),
        RatExpr::Const(c) => LinRep::constant(c.clone()),
        RatExpr::Sum(xs) => {
            let mut acc = rationalize(&xs[0])?;
            for x in &xs[1..] {
                acc = acc.sum(&rationalize(x)?).minimize();
            }
            acc
        }
        RatExpr::Prod(xs) => {
            let mut acc = rationalize(&xs[0])?;
            for x in &xs[1..] {
                acc = acc.prod(&rationalize(x)?).minimize();
            }
            acc
        }
        RatExpr::Inv(x) => rationalize(x)?.inverse()?,
    }
    .minimize())
}

/// `uᵗ(I − z Σ_x C_x(z)·x)⁻¹v`. For `m > 0` this is a linearization of
/// `(1 − z^m P)⁻¹` with `deg_z C_x < m`; `m = 0` marks a resolvent pencil of a
/// rational expression, where `z` is an ordinary parameter inside the entries
/// and the expansion variable scales every letter.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedPencil {
    pub m: usize,
    pub u: Vec<Scalar>,
    pub v: Vec<Scalar>,
    pub c: BTreeMap<Var, Mat<ZPoly>>,
}

impl GradedPencil {
    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn vars(&self) -> VarSet {
        self.c.keys().copied().collect()
    }

    pub fn z_degree(&self) -> usize {
        self.c
            .values()
            .flat_map(|a| (0..a.rows()).flat_map(move |i| (0..a.cols()).map(move |j| a[(i, j)].degree().unwrap_or(0))))
            .max()
            .unwrap_or(0)
    }

    /// `C_x = Σ_d C_x^{(d)} z^d` split by `z`-degree.
    pub fn coeff_mats(&self, x: Var) -> Vec<Mat<Scalar>> {
        let n = self.dim();
        let Some(a) = self.c.get(&x) else { return vec![Mat::zeros(n, n)] };
        (0..=self.z_degree()).map(|d| Mat::from_fn(n, n, |i, j| a[(i, j)].coeff(d))).collect()
    }

    /// Substitutes a value for `z`, folding the outer `z` into the matrices.
    pub fn at_z(&self, z: &Scalar) -> LinRep {
        let outer = if self.m == 0 { Scalar::one() } else { z.clone() };
        LinRep {
            u: self.u.clone(),
            v: self.v.clone(),
            m: self.c.iter().map(|(&x, a)| (x, a.map(|p| &p.eval(z) * &outer))).collect(),
        }
    }

    /// Coefficients of `z^0..=z^order` (graded pencils only).
    pub fn expand(&self, order: usize) -> Vec<NCPoly> {
        let vars: Vec<Var> = self.c.keys().copied().collect();
        let mats: Vec<Vec<Mat<Scalar>>> = vars.iter().map(|&x| self.coeff_mats(x)).collect();
        let mut rows: Vec<Vec<NCPoly>> = vec![self.u.iter().map(|c| NCPoly::constant(c.clone())).collect()];
        let mut out = vec![dot_poly(&rows[0], &self.v)];
        for n in 1..=order {
            let n_dim = self.dim();
            let mut r = vec![NCPoly::zero(); n_dim];
            for (vi, &x) in vars.iter().enumerate() {
                for (d, cd) in mats[vi].iter().enumerate() {
                    if d + 1 > n || cd.is_zero() {
                        continue;
                    }
                    let s = step(&rows[n - 1 - d], std::iter::once((x, cd)));
                    for (a, b) in r.iter_mut().zip(s) {
                        *a = a.add(&b);
                    }
                }
            }
            out.push(dot_poly(&r, &self.v));
            rows.push(r);
        }
        out
    }
}

/// Outcome of comparing a representation against a direct expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verification {
    Ok,
    /// First order (z-power or word length) at which the two sides differ.
    Mismatch { order: usize },
}

impl Verification {
    pub fn is_ok(&self) -> bool {
        *self == Verification::Ok
    }
}

/// Checks `uᵗ(I − zL)⁻¹v = Σ_k z^{mk} P^k` through `z^order`.
pub fn verify_pencil(p: &GradedPencil, poly: &NCPoly, order: usize) -> Verification {
    let got = p.expand(order);
    let mut pk = NCPoly::one();
    for (n, g) in got.iter().enumerate() {
        let want = if n % p.m == 0 {
            if n > 0 {
                pk = pk.mul(poly);
            }
            pk.clone()
        } else {
            NCPoly::zero()
        };
        if *g != want {
            return Verification::Mismatch { order: n };
        }
    }
    Verification::Ok
}

/// Compares a representation with the series expansion of `e` up to word length `max_len`.
pub fn verify_rep(rep: &LinRep, e: &RatExpr, max_len: usize) -> Verification {
    let a = rep.expand(max_len);
    let b = e.expand(max_len);
    let diff = a.sub(&b);
    match diff.terms().map(|(w, _)| w.len()).min() {
        None => Verification::Ok,
        Some(order) => Verification::Mismatch { order },
    }
}

fn pencil_from(m: usize, n: usize, entries: Vec<(Var, usize, usize, ZPoly)>) -> GradedPencil {
    let mut c: BTreeMap<Var, Mat<ZPoly>> = BTreeMap::new();
    for (x, i, j, p) in entries {
        let a = c.entry(x).or_insert_with(|| Mat::zeros(n, n));
        a[(i, j)] = a[(i, j)].radd(&p);
    }
    let e1 = |n: usize| (0..n).map(|i| if i == 0 { Scalar::one() } else { Scalar::zero() }).collect::<Vec<_>>();
    GradedPencil { m, u: e1(n), v: e1(n), c }
}

/// Left annihilation `L_x`: `x w ↦ w`.
fn annihilate(p: &NCPoly, x: Var) -> NCPoly {
    NCPoly::from_terms(
        p.terms().filter(|(w, _)| w.first() == Some(x)).map(|(w, c)| (w.slice(1..w.len()), c.clone())),
    )
}

fn homogeneous_part(p: &NCPoly, d: usize) -> NCPoly {
    NCPoly::from_terms(p.terms().filter(|(w, _)| w.len() == d).map(|(w, c)| (w.clone(), c.clone())))
}

/// Row-reduced basis of the span of homogeneous polynomials of one degree.
struct Span {
    words: Vec<Word>,
    rows: Vec<NCPoly>,
    pivots: Vec<Word>,
}

impl Span {
    fn new(gens: &[NCPoly]) -> Self {
        let words: Vec<Word> = gens
            .iter()
            .flat_map(|p| p.terms().map(|(w, _)| w.clone()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let gens: Vec<&NCPoly> = gens.iter().filter(|p| !p.is_zero()).collect();
        let mut a = Mat::from_fn(gens.len(), words.len(), |i, j| gens[i].coeff(&words[j]));
        let piv = a.rref();
        let rows = (0..piv.len())
            .map(|i| NCPoly::from_terms(words.iter().enumerate().map(|(j, w)| (w.clone(), a[(i, j)].clone()))))
            .collect();
        Span { pivots: piv.iter().map(|&j| words[j].clone()).collect(), words, rows }
    }

    fn len(&self) -> usize {
        self.rows.len()
    }

    /// Coordinates of `q`, which must lie in the span.
    fn coords(&self, q: &NCPoly) -> Vec<Scalar> {
        let c: Vec<Scalar> = self.pivots.iter().map(|w| q.coeff(w)).collect();
        debug_assert!(
            self.rows.iter().zip(&c).fold(NCPoly::zero(), |a, (r, k)| a.add(&r.scale(k))) == *q,
            "vector outside the stable subspace"
        );
        let _ = &self.words;
        c
    }
}

/// Linearization of `(1 − z^m P)⁻¹` from the stable subspace spanned by `Ψ`
/// and `z^ℓ SΨ`, where `S` runs through a reduced basis of the homogeneous
/// degree-`ℓ` parts of iterated left annihilations of `P`.
pub fn suffix_linearize(p: &NCPoly) -> Result<GradedPencil> {
    if p.is_zero() {
        return Err(Error::Precondition("cannot linearize the zero polynomial".into()));
    }
    if !p.eps().is_zero() {
        return Err(Error::Precondition("polynomial must have zero constant term".into()));
    }
    let m = p.degree();
    let vars: Vec<Var> = p.vars().into_iter().collect();
    let lp: Vec<(Var, NCPoly)> = vars.iter().map(|&x| (x, annihilate(p, x))).collect();
    // spans[ℓ] for ℓ = 1..m−1, built top-down
    let mut spans: Vec<Option<Span>> = (0..m).map(|_| None).collect();
    for l in (1..m).rev() {
        let mut gens: Vec<NCPoly> = lp.iter().map(|(_, q)| homogeneous_part(q, l)).collect();
        if let Some(up) = &spans.get(l + 1).and_then(|s| s.as_ref()) {
            for r in &up.rows {
                gens.extend(vars.iter().map(|&y| annihilate(r, y)));
            }
        }
        spans[l] = Some(Span::new(&gens));
    }
    // index 0 is Ψ; then degree m−1 down to 1
    let mut offset = vec![0; m.max(1)];
    let mut n = 1;
    for l in (1..m).rev() {
        offset[l] = n;
        n += spans[l].as_ref().map_or(0, Span::len);
    }
    let mut entries = Vec::new();
    for (x, q) in &lp {
        let c0 = q.eps();
        if !c0.is_zero() {
            entries.push((*x, 0, 0, ZPoly::monomial(m - 1, c0)));
        }
        for l in 1..m {
            let part = homogeneous_part(q, l);
            if part.is_zero() {
                continue;
            }
            let sp = spans[l].as_ref().unwrap();
            for (k, c) in sp.coords(&part).into_iter().enumerate() {
                if !c.is_zero() {
                    entries.push((*x, 0, offset[l] + k, ZPoly::monomial(m - l - 1, c)));
                }
            }
        }
    }
    for l in 1..m {
        let sp = spans[l].as_ref().unwrap();
        for (k, r) in sp.rows.iter().enumerate() {
            let row = offset[l] + k;
            for &x in &vars {
                let q = annihilate(r, x);
                if q.is_zero() {
                    continue;
                }
                if l == 1 {
                    entries.push((x, row, 0, ZPoly::from_scalar(&q.eps())));
                } else {
                    let lower = spans[l - 1].as_ref().unwrap();
                    for (kk, c) in lower.coords(&q).into_iter().enumerate() {
                        if !c.is_zero() {
                            entries.push((x, row, offset[l - 1] + kk, ZPoly::from_scalar(&c)));
                        }
                    }
                }
            }
        }
    }
    Ok(pencil_from(m, n, entries))
}

/// One state per letter occurrence; edges follow the multiplication structure
/// of powers of a homogeneous `P`, with monomial coefficients on the edges
/// entering first letters.
pub fn automaton_linearize(p: &NCPoly) -> Result<GradedPencil> {
    let m = p
        .homogeneous_degree()
        .filter(|&d| d > 0 && !p.is_zero())
        .ok_or_else(|| Error::Precondition("automaton linearization needs a nonzero homogeneous polynomial".into()))?;
    let monos: Vec<(&Word, &Scalar)> = p.terms().collect();
    let n = monos.len() * m;
    let first = |k: usize| k * m;
    let last = |k: usize| k * m + m - 1;
    let mut entries = Vec::new();
    for (k, (w, _)) in monos.iter().enumerate() {
        for pos in 1..m {
            entries.push((w.letters()[pos], first(k) + pos - 1, first(k) + pos, ZPoly::rone()));
        }
    }
    for from in 0..monos.len() {
        for (k, (w, c)) in monos.iter().enumerate() {
            entries.push((w.letters()[0], last(from), first(k), ZPoly::from_scalar(c)));
        }
    }
    let mut pen = pencil_from(m, n, entries);
    pen.u = (0..n).map(|i| if i == last(0) { Scalar::one() } else { Scalar::zero() }).collect();
    pen.v = (0..n).map(|i| if i % m == m - 1 { Scalar::one() } else { Scalar::zero() }).collect();
    Ok(pen)
}

/// Pencil for `(1 − z·r)⁻¹` of a proper rational expression `r`, with `z`
/// kept symbolic inside the entries (`m = 0`).
pub fn resolvent_pencil(e: &RatExpr) -> Result<GradedPencil> {
    let rep = rationalize(e)?;
    if !rep.constant_term().is_zero() {
        return Err(Error::Precondition("resolvent pencil needs an expression with zero constant term".into()));
    }
    // fresh start state 0 without in-edges
    let n = rep.dim() + 1;
    let lift = |a: &Mat<Scalar>| {
        let urow = a.vec_mul(&rep.u);
        Mat::from_fn(n, n, |i, j| match (i, j) {
            (_, 0) => Scalar::zero(),
            (0, j) => urow[j - 1].clone(),
            (i, j) => a[(i - 1, j - 1)].clone(),
        })
    };
    let v: Vec<Scalar> = std::iter::once(Scalar::zero()).chain(rep.v.iter().cloned()).collect();
    let z = ZPoly::monomial(1, Scalar::one());
    let mut c = BTreeMap::new();
    for (&x, a) in &rep.m {
        let a = lift(a);
        // row 0 carries the factor z; then quasi-inverse M + v·e₀ᵗM
        let az = Mat::from_fn(n, n, |i, j| {
            let s = ZPoly::from_scalar(&a[(i, j)]);
            if i == 0 {
                s.rmul(&z)
            } else {
                s
            }
        });
        let full = Mat::from_fn(n, n, |i, j| az[(i, j)].radd(&ZPoly::from_scalar(&v[i]).rmul(&az[(0, j)])));
        c.insert(x, full);
    }
    let u: Vec<Scalar> = (0..n).map(|i| if i == 0 { Scalar::one() } else { Scalar::zero() }).collect();
    let mut v1 = v;
    v1[0] = Scalar::one();
    Ok(merge_pencil(GradedPencil { m: 0, u, v: v1, c }))
}

/// Trimming and state merging for pencils with polynomial entries (same rules
/// as [`LinRep::minimize`], rows only).
fn merge_pencil(mut p: GradedPencil) -> GradedPencil {
    loop {
        p = trim_pencil(&p);
        let n = p.dim();
        let pair = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .find(|&(i, j)| p.v[i] == p.v[j] && p.c.values().all(|a| a.row(i) == a.row(j)));
        let Some((i, j)) = pair else { return p };
        p.u[i] = &p.u[i] + &p.u[j];
        for a in p.c.values_mut() {
            for k in 0..n {
                let t = a[(k, j)].clone();
                a[(k, i)] = a[(k, i)].radd(&t);
            }
        }
        let keep: Vec<usize> = (0..n).filter(|&k| k != j).collect();
        p = restrict_pencil(&p, &keep);
    }
}

fn trim_pencil(p: &GradedPencil) -> GradedPencil {
    let n = p.dim();
    let nz = |i: usize, j: usize| p.c.values().any(|a| !a[(i, j)].ris_zero());
    let reach = |start: Vec<usize>, fwd: bool| {
        let mut seen = vec![false; n];
        let mut stack = start;
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut seen[i], true) {
                continue;
            }
            stack.extend((0..n).filter(|&j| !seen[j] && if fwd { nz(i, j) } else { nz(j, i) }));
        }
        seen
    };
    let f = reach((0..n).filter(|&i| !p.u[i].is_zero()).collect(), true);
    let b = reach((0..n).filter(|&i| !p.v[i].is_zero()).collect(), false);
    let keep: Vec<usize> = (0..n).filter(|&i| f[i] && b[i]).collect();
    restrict_pencil(p, &keep)
}

fn restrict_pencil(p: &GradedPencil, keep: &[usize]) -> GradedPencil {
    let k = keep.len();
    GradedPencil {
        m: p.m,
        u: keep.iter().map(|&i| p.u[i].clone()).collect(),
        v: keep.iter().map(|&i| p.v[i].clone()).collect(),
        c: p.c.iter().map(|(&x, a)| (x, Mat::from_fn(k, k, |r, s| a[(keep[r], keep[s])].clone()))).collect(),
    }
}
