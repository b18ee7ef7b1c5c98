//! The matrix fixed-point system for a linearized resolvent
//! `uᵗ(I − t Σ_i C_i(t) X_i)⁻¹v` in free variables:
//!
//! ```text
//! F_i = η̃_i( t (I − t Σ_{j≠i} C_j F_j)⁻¹ C_i )
//! ```
//!
//! Every coefficient of `F_i` at order `n` depends only on lower orders of
//! the other unknowns, so the system is solved order by order: each `t^n`
//! coefficient is final once computed. [`iterate`] runs the plain fixed-point
//! iteration instead, for comparison.
//!
//! Graded mode works over [`Scalar`] with `t = z`; s-mode works over
//! [`ZPoly`] for resolvent pencils whose entries depend on a parameter `z`,
//! expanding in the letter weight `t = s`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use num_traits::Zero;

use crate::cumulants::{Dist, Embedding};
use crate::linearize::GradedPencil;
use crate::matrix::Mat;
use crate::mps::MatSeries;
use crate::ncpoly::{Var, VarSet};
use crate::ring::{Ring, ZPoly};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// A pencil together with the marginals of its (mutually free) variables.
#[derive(Clone, Debug)]
pub struct FixedPointProblem<R> {
    pub u: Vec<R>,
    pub v: Vec<R>,
    /// `C_x = Σ_d C_x^{(d)} t^d`.
    pub c: BTreeMap<Var, Vec<Mat<R>>>,
    /// Coefficient-matrix split used for the cokernel projections.
    pub split: BTreeMap<Var, Vec<Mat<Scalar>>>,
    pub dists: BTreeMap<Var, Dist>,
    /// Truncation order in `t`.
    pub order: usize,
    /// Degree bound applied to ring entries (the `z`-degree in s-mode).
    pub entry_degree: Option<usize>,
    /// `m` of the pencil; 0 in s-mode.
    pub grading: usize,
}

fn dists_for(p: &GradedPencil, emb: &Embedding) -> Result<BTreeMap<Var, Dist>> {
    p.vars()
        .into_iter()
        .map(|x| {
            if emb.has_dist(x) {
                Ok((x, emb.dist(x).clone()))
            } else {
                Err(Error::Precondition(format!("no distribution for pencil variable #{x}")))
            }
        })
        .collect()
}

impl FixedPointProblem<Scalar> {
    /// Graded pencil of `(1 − z^m P)⁻¹`; `order` counts powers of `z`.
    pub fn graded(p: &GradedPencil, emb: &Embedding, order: usize) -> Result<Self> {
        if p.m == 0 {
            return Err(Error::Precondition("graded solve needs a pencil with m > 0".into()));
        }
        let split: BTreeMap<Var, Vec<Mat<Scalar>>> = p.vars().into_iter().map(|x| (x, p.coeff_mats(x))).collect();
        Ok(FixedPointProblem {
            u: p.u.clone(),
            v: p.v.clone(),
            c: split.clone(),
            split,
            dists: dists_for(p, emb)?,
            order,
            entry_degree: None,
            grading: p.m,
        })
    }
}

impl FixedPointProblem<ZPoly> {
    /// Resolvent pencil with parametric `z`, expanded in `s` to `order` and
    /// truncated at `z^{z_degree}`.
    pub fn s_mode(p: &GradedPencil, emb: &Embedding, order: usize, z_degree: usize) -> Result<Self> {
        let lift = |x: &[Scalar]| x.iter().map(ZPoly::from_scalar).collect::<Vec<_>>();
        Ok(FixedPointProblem {
            u: lift(&p.u),
            v: lift(&p.v),
            c: p.c.iter().map(|(&x, a)| (x, vec![a.map(|e| e.truncated(z_degree))])).collect(),
            split: p.vars().into_iter().map(|x| (x, p.coeff_mats(x))).collect(),
            dists: dists_for(p, emb)?,
            order,
            entry_degree: Some(z_degree),
            grading: 0,
        })
    }
}

impl<R: Ring> FixedPointProblem<R> {
    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn vars(&self) -> VarSet {
        self.c.keys().copied().collect()
    }

    fn trunc(&self, m: Mat<R>) -> Mat<R> {
        match self.entry_degree {
            Some(d) => m.map(|e| e.truncated(d)),
            None => m,
        }
    }

    fn trunc_series(&self, s: MatSeries<R>) -> MatSeries<R> {
        match self.entry_degree {
            Some(_) => MatSeries::from_coeffs(s.coeffs().iter().map(|m| self.trunc(m.clone())).collect())
                .expect("non-empty series"),
            None => s,
        }
    }

    /// `C_x(t)` as a series.
    pub fn c_series(&self, x: Var) -> MatSeries<R> {
        let n = self.dim();
        let mut s = MatSeries::zero(n, n, self.order);
        for (d, m) in self.c[&x].iter().enumerate() {
            if d <= self.order {
                *s.coeff_mut(d) = m.clone();
            }
        }
        s
    }

    pub fn projector(&self, x: Var) -> Mat<R> {
        cokernel_projection(&self.split[&x]).map(R::from_scalar)
    }

    /// `η̃_x(t(I − tG)⁻¹C_x)` computed with series arithmetic.
    fn eta_map(&self, x: Var, g: &MatSeries<R>) -> Result<MatSeries<R>> {
        let n = self.dim();
        let h = self.trunc_series(MatSeries::identity(n, self.order).sub(&g.shift(1))?.inverse()?);
        let arg = self.trunc_series(h.mul(&self.c_series(x))?.shift(1));
        if arg.valuation() > self.order {
            let b1 = self.dists[&x].try_boolean(1)?;
            return Ok(MatSeries::identity(n, self.order).scale(&b1));
        }
        let mut out = arg.eta_apply(&self.dists[&x])?;
        if self.entry_degree.is_some() {
            // eta_apply multiplies without truncating entries; only the final result is cut
            out = self.trunc_series(out);
        }
        Ok(out)
    }

    fn sum_cf(&self, f: &BTreeMap<Var, MatSeries<R>>, skip: Option<Var>) -> Result<MatSeries<R>> {
        let n = self.dim();
        let mut g = MatSeries::zero(n, n, self.order);
        for (&j, fj) in f {
            if Some(j) != skip {
                g = g.add(&self.c_series(j).mul(fj)?)?;
            }
        }
        Ok(self.trunc_series(g))
    }
}

/// Orthogonal projection `Q` onto the span of the row spaces of all `mats`,
/// so that `C·Q = C` for each of them.
pub fn cokernel_projection(mats: &[Mat<Scalar>]) -> Mat<Scalar> {
    let Some(first) = mats.first() else { return Mat::zeros(0, 0) };
    let n = first.cols();
    let rows: Vec<Vec<Scalar>> = mats.iter().flat_map(|m| m.to_rows()).collect();
    if rows.is_empty() {
        return Mat::zeros(n, n);
    }
    let mut stacked = Mat::from_rows(rows).expect("rows of equal length");
    let rank = stacked.rref().len();
    if rank == 0 {
        return Mat::zeros(n, n);
    }
    let b = Mat::from_fn(rank, n, |i, j| stacked[(i, j)].clone());
    let bh = b.conj_transpose();
    let gram = b.mul(&bh).inverse().expect("Gram matrix of independent rows is invertible");
    bh.mul(&gram).mul(&b)
}

/// Running state of `η̃` applied to the series `A`.
#[allow(clippy::large_enum_variant)]
enum EtaState<R> {
    /// `F = c0 + c1 A + c2 A F²`, keeping `F²` up to date.
    Quad { c0: Scalar, c1: Scalar, c2: Scalar, sq: Vec<Mat<R>> },
    /// `F = Σ β_k A^{k−1}` with a table of powers `pw[k−1][n] = (A^k)_n`.
    Powers { beta: Vec<Scalar>, pw: Vec<Vec<Mat<R>>> },
}

/// Solution of the fixed-point system.
#[derive(Debug)]
pub struct FSolution<R> {
    pub problem: FixedPointProblem<R>,
    pub f: BTreeMap<Var, MatSeries<R>>,
    /// Compressed unknowns `Q_i F_i`.
    pub ftilde: BTreeMap<Var, MatSeries<R>>,
    pub q: BTreeMap<Var, Mat<Scalar>>,
    h_cache: Mutex<HashMap<Vec<Var>, MatSeries<R>>>,
}

/// Solves the system order by order up to `prob.order`.
pub fn solve<R: Ring>(prob: &FixedPointProblem<R>) -> Result<FSolution<R>> {
    let n = prob.dim();
    let k = prob.order;
    let vars: Vec<Var> = prob.c.keys().copied().collect();
    let nv = vars.len();
    let id = Mat::<R>::identity(n);
    let zero = Mat::<R>::zeros(n, n);

    let mut f: Vec<Vec<Mat<R>>> = vec![Vec::with_capacity(k + 1); nv];
    let mut cf: Vec<Vec<Mat<R>>> = vec![Vec::with_capacity(k + 1); nv];
    let mut h: Vec<Vec<Mat<R>>> = vec![Vec::with_capacity(k + 1); nv];
    let mut g: Vec<Vec<Mat<R>>> = vec![Vec::with_capacity(k + 1); nv];
    let mut a: Vec<Vec<Mat<R>>> = vec![Vec::with_capacity(k + 1); nv];
    let mut eta: Vec<EtaState<R>> = Vec::with_capacity(nv);
    for x in &vars {
        let d = &prob.dists[x];
        eta.push(match d.eta_form() {
            Some(q) => EtaState::Quad { c0: q.c0, c1: q.c1, c2: q.c2, sq: Vec::new() },
            None => EtaState::Powers { beta: d.eta_tilde(k + 1)?, pw: Vec::new() },
        });
    }

    for ord in 0..=k {
        if ord > 0 {
            // G_i = Σ_{j≠i} C_j F_j at order ord−1
            let mut total = zero.clone();
            for c in &cf {
                total.add_assign(&c[ord - 1]);
            }
            for i in 0..nv {
                g[i].push(total.sub(&cf[i][ord - 1]));
            }
        }
        for i in 0..nv {
            let mut hn = if ord == 0 { id.clone() } else { zero.clone() };
            for s in 0..ord {
                hn.add_mul(&g[i][s], &h[i][ord - 1 - s]);
            }
            h[i].push(prob.trunc(hn));
            let cs = &prob.c[&vars[i]];
            let mut an = zero.clone();
            for (d, cd) in cs.iter().enumerate().take(ord) {
                an.add_mul(&h[i][ord - 1 - d], cd);
            }
            a[i].push(prob.trunc(an));

            let fin = match &mut eta[i] {
                EtaState::Quad { c0, c1, c2, sq } => {
                    let mut fn_ = if ord == 0 { id.scale(c0) } else { a[i][ord].scale(c1) };
                    if !c2.is_zero() {
                        let mut acc = zero.clone();
                        for s in 1..=ord {
                            acc.add_mul(&a[i][s], &sq[ord - s]);
                        }
                        fn_.add_assign(&acc.scale(c2));
                    }
                    fn_
                }
                EtaState::Powers { beta, pw } => {
                    let mut fn_ = if ord == 0 { id.scale(&beta[0]) } else { zero.clone() };
                    // row p−1 holds A^p; A_0 = 0 so (A^p)_ord vanishes for p > ord
                    for p in 1..=ord {
                        if pw.len() < p {
                            pw.push(vec![zero.clone(); ord]);
                        }
                        let val = if p == 1 {
                            a[i][ord].clone()
                        } else {
                            let mut acc = zero.clone();
                            for s in 1..=ord + 1 - p {
                                acc.add_mul(&a[i][s], &pw[p - 2][ord - s]);
                            }
                            prob.trunc(acc)
                        };
                        pw[p - 1].push(val);
                        if let Some(b) = beta.get(p) {
                            if !b.is_zero() {
                                fn_.add_assign(&pw[p - 1][ord].scale(b));
                            }
                        }
                    }
                    for row in pw.iter_mut().skip(ord) {
                        row.push(zero.clone());
                    }
                    fn_
                }
            };
            f[i].push(prob.trunc(fin));
            if let EtaState::Quad { c2, sq, .. } = &mut eta[i] {
                if !c2.is_zero() {
                    let mut s2 = zero.clone();
                    for s in 0..=ord {
                        s2.add_mul(&f[i][s], &f[i][ord - s]);
                    }
                    sq.push(prob.trunc(s2));
                }
            }
            let mut c_f = zero.clone();
            for (d, cd) in cs.iter().enumerate().take(ord + 1) {
                c_f.add_mul(cd, &f[i][ord - d]);
            }
            cf[i].push(prob.trunc(c_f));
        }
    }

    let mut fs = BTreeMap::new();
    let mut fts = BTreeMap::new();
    let mut qs = BTreeMap::new();
    for (i, x) in vars.iter().enumerate() {
        let fi = MatSeries::from_coeffs(std::mem::take(&mut f[i]))?;
        let q = cokernel_projection(&prob.split[x]);
        fts.insert(*x, fi.mul_mat_left(&q.map(R::from_scalar)));
        fs.insert(*x, fi);
        qs.insert(*x, q);
    }
    Ok(FSolution { problem: prob.clone(), f: fs, ftilde: fts, q: qs, h_cache: Mutex::new(HashMap::new()) })
}

/// The compressed fixed-point iteration started at `F̃⁽⁰⁾_i = β_1(X_i) Q_i`;
/// returns `F̃⁽⁰⁾, …, F̃⁽ʳ⁾`. Iterate `r` agrees with the solution through `t^r`.
pub fn iterate<R: Ring>(prob: &FixedPointProblem<R>, r: usize) -> Result<Vec<BTreeMap<Var, MatSeries<R>>>> {
    let mut cur = BTreeMap::new();
    for (&x, d) in &prob.dists {
        let q = prob.projector(x);
        cur.insert(x, MatSeries::constant(q.scale(&d.try_boolean(1)?), prob.order));
    }
    let mut out = vec![cur.clone()];
    for _ in 0..r {
        let mut next = BTreeMap::new();
        for &x in prob.c.keys() {
            let g = prob.sum_cf(&cur, Some(x))?;
            let fx = prob.eta_map(x, &g)?.mul_mat_left(&prob.projector(x));
            next.insert(x, prob.trunc_series(fx));
        }
        cur = next;
        out.push(cur.clone());
    }
    Ok(out)
}

/// First order in `t` at which two families of series differ (`order + 1` if none).
pub fn agreement_order<R: Ring>(a: &BTreeMap<Var, MatSeries<R>>, b: &BTreeMap<Var, MatSeries<R>>) -> usize {
    let k = a.values().chain(b.values()).map(MatSeries::order).min().unwrap_or(0);
    for ord in 0..=k {
        if a.iter().any(|(x, s)| b.get(x).is_none_or(|t| s.coeff(ord) != t.coeff(ord))) {
            return ord;
        }
    }
    k + 1
}

/// Agreement order of each iterate `r = 0..=r_max` with the order-by-order solution.
pub fn iteration_trace<R: Ring>(prob: &FixedPointProblem<R>, r_max: usize) -> Result<Vec<usize>> {
    let sol = solve(prob)?;
    Ok(iterate(prob, r_max)?.iter().map(|it| agreement_order(it, &sol.ftilde)).collect())
}

impl<R: Ring> FSolution<R> {
    pub fn order(&self) -> usize {
        self.problem.order
    }

    /// `Σ_{j∈J} C_j F_j`.
    pub fn absorbed(&self, js: &VarSet) -> Result<MatSeries<R>> {
        for j in js {
            if !self.f.contains_key(j) {
                return Err(Error::UnknownVar(format!("#{j}")));
            }
        }
        let sel: BTreeMap<Var, MatSeries<R>> =
            self.f.iter().filter(|(x, _)| js.contains(x)).map(|(&x, s)| (x, s.clone())).collect();
        self.problem.sum_cf(&sel, None)
    }

    /// `H_J = (I − t Σ_{j∈J} C_j F_j)⁻¹`, cached per subset.
    pub fn h(&self, js: &VarSet) -> Result<MatSeries<R>> {
        let key: Vec<Var> = js.iter().copied().collect();
        if let Some(s) = self.h_cache.lock().unwrap().get(&key) {
            return Ok(s.clone());
        }
        let n = self.problem.dim();
        let s = MatSeries::identity(n, self.order()).sub(&self.absorbed(js)?.shift(1))?.inverse()?;
        let s = self.problem.trunc_series(s);
        self.h_cache.lock().unwrap().insert(key, s.clone());
        Ok(s)
    }

    /// `uᵗ(I − t Σ_j C_j F_j)⁻¹v`, coefficients of `t^0..=t^K`.
    pub fn resolvent_series(&self) -> Result<Vec<R>> {
        self.h(&self.problem.vars())?.sandwich(&self.problem.u, &self.problem.v)
    }

    /// First order at which some `F_i − η̃_i(t(I − tΣ_{j≠i}C_jF_j)⁻¹C_i)` is nonzero,
    /// recomputed with plain series arithmetic; `None` if the residual vanishes to order `K`.
    pub fn residual_order(&self) -> Result<Option<usize>> {
        let mut worst: Option<usize> = None;
        for &x in self.f.keys() {
            let g = self.problem.sum_cf(&self.f, Some(x))?;
            let r = self.f[&x].sub(&self.problem.eta_map(x, &g)?)?;
            let v = r.valuation();
            if v <= self.order() {
                worst = Some(worst.map_or(v, |w| w.min(v)));
            }
        }
        Ok(worst)
    }

    /// `C_i F_i = C_i F̃_i` for every variable.
    pub fn compression_consistent(&self) -> Result<bool> {
        for (&x, fx) in &self.f {
            let c = self.problem.c_series(x);
            if c.mul(fx)? != c.mul(&self.ftilde[&x])? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl FSolution<Scalar> {
    /// Moments `φ(P^k)` for `k = 0..=K/m`, read off the graded series.
    pub fn moments(&self) -> Result<Vec<Scalar>> {
        let m = self.problem.grading.max(1);
        let s = self.resolvent_series()?;
        Ok(s.iter().step_by(m).cloned().collect())
    }
}

impl FSolution<ZPoly> {
    /// Lowest `s`-order at which the fixed-point residual is nonzero, or
    /// `order + 1` when all computed coefficients are stable.
    pub fn stabilization_order(&self) -> Result<usize> {
        Ok(self.residual_order()?.unwrap_or(self.order() + 1))
    }
}
