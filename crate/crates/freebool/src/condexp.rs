//! Conditional expectations onto subalgebras generated by some of the free
//! variables, both for polynomials (exact, through Boolean cumulants) and for
//! resolvents (through a solved pencil), plus checks of algebraic equations
//! satisfied by the resulting series.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::cumulants::{Dist, Embedding};
use crate::linearize::GradedPencil;
use crate::matrix::Mat;
use crate::mps::{MatSeries, ScalarSeries};
use crate::ncpoly::{block_delta_right, blocks_by_set, evaluate, parse, Alphabet, NCPoly, RatExpr, Var, VarSet, Word};
use crate::ring::Ring;
use crate::scalar::Scalar;
use crate::solver::{solve, FSolution, FixedPointProblem};
use crate::{Error, Result};

fn complement(p: &NCPoly, retained: &VarSet) -> VarSet {
    p.vars().difference(retained).copied().collect()
}

/// Splits `w = b·core·b'` with `b`, `b'` maximal runs of retained letters.
fn strip_retained(w: &Word, retained: &VarSet) -> (Word, Word, Word) {
    let l = w.letters();
    let s = l.iter().position(|v| !retained.contains(v)).unwrap_or(l.len());
    let e = l.iter().rposition(|v| !retained.contains(v)).map_or(s, |i| i + 1);
    (w.slice(0..s), w.slice(s..e), w.slice(e..w.len()))
}

/// `E_B[P]` onto the algebra of the `retained` variables, by the recurrence
/// `E_B[w] = β̇_A(w) + (β̇_A ⊗ E_B)[Δ̂_B w]` on words that start outside `B`,
/// and the bimodule property on retained prefixes.
pub fn cond_exp_poly(p: &NCPoly, retained: &VarSet, e: &Embedding) -> NCPoly {
    let a = complement(p, retained);
    let mut memo: BTreeMap<Word, NCPoly> = BTreeMap::new();
    let mut out = NCPoly::zero();
    for (w, c) in p.terms() {
        out = out.add(&ce_word(w, retained, &a, e, &mut memo).scale(c));
    }
    out
}

fn ce_word(w: &Word, retained: &VarSet, a: &VarSet, e: &Embedding, memo: &mut BTreeMap<Word, NCPoly>) -> NCPoly {
    if let Some(r) = memo.get(w) {
        return r.clone();
    }
    let (pre, core, post) = strip_retained(w, retained);
    let res = if core.is_empty() {
        NCPoly::monomial(w.clone(), Scalar::one())
    } else if !pre.is_empty() || !post.is_empty() {
        let inner = ce_word(&core, retained, a, e, memo);
        NCPoly::monomial(pre, Scalar::one()).mul(&inner).mul(&NCPoly::monomial(post, Scalar::one()))
    } else {
        let mut acc = NCPoly::constant(e.bbeta_word(&core, a));
        let t = block_delta_right(&NCPoly::monomial(core.clone(), Scalar::one()), retained);
        for (l, r, c) in t.terms() {
            let b = e.bbeta_word(l, a);
            if !b.is_zero() {
                acc = acc.add(&ce_word(r, retained, a, e, memo).scale(&(&b * c)));
            }
        }
        acc
    };
    memo.insert(w.clone(), res.clone());
    res
}

/// The same conditional expectation by the explicit sum over subsets of the
/// retained blocks of an alternating word `a_1 b_1 ⋯ b_{n−1} a_n`:
/// `Σ b_{i_1}⋯b_{i_k} Π_j β(a_{i_j+1}, b_{i_j+1}, …, a_{i_{j+1}})`.
pub fn cond_exp_closed(p: &NCPoly, retained: &VarSet, e: &Embedding) -> NCPoly {
    let mut out = NCPoly::zero();
    for (w, c) in p.terms() {
        let (pre, core, post) = strip_retained(w, retained);
        let inner = if core.is_empty() { NCPoly::one() } else { alternating_closed(&core, retained, e) };
        let full = NCPoly::monomial(pre, Scalar::one()).mul(&inner).mul(&NCPoly::monomial(post, Scalar::one()));
        out = out.add(&full.scale(c));
    }
    out
}

fn alternating_closed(core: &Word, retained: &VarSet, e: &Embedding) -> NCPoly {
    let blocks: Vec<Word> = blocks_by_set(core, retained).into_iter().map(|(b, _)| b).collect();
    // blocks alternate a_1, b_1, a_2, …, a_n
    let n = blocks.len().div_ceil(2);
    let mut out = NCPoly::zero();
    for mask in 0..1u64 << (n - 1) {
        let cuts: Vec<usize> = (1..n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
        let mut bounds = vec![0];
        bounds.extend(&cuts);
        bounds.push(n);
        let mut coeff = Scalar::one();
        for win in bounds.windows(2) {
            // a_{lo+1}, b_{lo+1}, …, a_{hi} in 0-based block indices 2lo ..= 2hi−2
            let args = &blocks[2 * win[0]..2 * win[1] - 1];
            coeff *= &e.mixed_boolean_cumulant(args);
            if coeff.is_zero() {
                break;
            }
        }
        if coeff.is_zero() {
            continue;
        }
        let word = cuts.iter().fold(Word::unit(), |acc, &i| acc.concat(&blocks[2 * i - 1]));
        out.add_term(word, coeff);
    }
    out
}

/// `E_B` onto the variables carrying one of the given algebra tags.
pub fn cond_exp_onto_tags(p: &NCPoly, tags: &std::collections::BTreeSet<u32>, alpha: &Alphabet, e: &Embedding) -> NCPoly {
    cond_exp_poly(p, &alpha.vars_in_algebras(tags), e)
}

/// `E_I[(1 − z^m P)⁻¹] = uᵗ(I − t(Σ_{i∈I} C_i X_i + Σ_{j∉I} C_j F_j))⁻¹v`.
#[derive(Clone, Debug)]
pub struct SubordinatedPencil<R> {
    pub u: Vec<R>,
    pub v: Vec<R>,
    pub retained: BTreeMap<Var, MatSeries<R>>,
    pub absorbed: MatSeries<R>,
    pub grading: usize,
}

impl<R: Ring> SubordinatedPencil<R> {
    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn order(&self) -> usize {
        self.absorbed.order()
    }
}

/// Replaces the non-retained variables of a solved pencil by their `F_j`.
pub fn integrate_out<R: Ring>(sol: &FSolution<R>, retained: &VarSet) -> Result<SubordinatedPencil<R>> {
    let vars = sol.problem.vars();
    if let Some(x) = retained.iter().find(|x| !vars.contains(x)) {
        return Err(Error::UnknownVar(format!("#{x}")));
    }
    let js: VarSet = vars.difference(retained).copied().collect();
    Ok(SubordinatedPencil {
        u: sol.problem.u.clone(),
        v: sol.problem.v.clone(),
        retained: retained.iter().map(|&x| (x, sol.problem.c_series(x))).collect(),
        absorbed: sol.absorbed(&js)?,
        grading: sol.problem.grading,
    })
}

/// Coefficients of `E_I[Ψ]` as a series in the retained letters, for all
/// words up to length `max_len`; each coefficient is a series in `t`.
pub fn expand_in_retained<R: Ring>(sp: &SubordinatedPencil<R>, max_len: usize) -> Result<BTreeMap<Word, Vec<R>>> {
    let n = sp.dim();
    let k = sp.order();
    let ginv = MatSeries::identity(n, k).sub(&sp.absorbed.shift(1))?.inverse()?;
    let u_row = MatSeries::constant(Mat::from_rows(vec![sp.u.clone()])?, k);
    let v_col = Mat::from_rows(sp.v.iter().map(|x| vec![x.clone()]).collect())?;
    let steps: BTreeMap<Var, MatSeries<R>> =
        sp.retained.iter().map(|(&x, c)| Ok((x, c.shift(1).mul(&ginv)?))).collect::<Result<_>>()?;
    let mut out = BTreeMap::new();
    let mut frontier = vec![(Word::unit(), u_row.mul(&ginv)?)];
    for len in 0..=max_len {
        let mut next = Vec::new();
        for (w, row) in frontier {
            let coeffs: Vec<R> = row.mul_mat_right(&v_col).coeffs().iter().map(|m| m[(0, 0)].clone()).collect();
            if len < max_len {
                for (&x, st) in &steps {
                    next.push((w.concat(&Word::letter(x)), row.mul(st)?));
                }
            }
            if coeffs.iter().any(|c| !c.ris_zero()) {
                out.insert(w, coeffs);
            }
        }
        frontier = next;
    }
    Ok(out)
}

/// [`expand_in_retained`] with coefficients as scalar series in the natural
/// variable (`t^{mk}` ↦ `z^k`).
pub fn expand_natural(sp: &SubordinatedPencil<Scalar>, max_len: usize) -> Result<BTreeMap<Word, ScalarSeries>> {
    let m = sp.grading.max(1);
    Ok(expand_in_retained(sp, max_len)?
        .into_iter()
        .map(|(w, c)| {
            let k = c.len() - 1;
            (w, ScalarSeries::from_coeffs(c, k).decimate(m))
        })
        .collect())
}

/// Moment generating function `Σ φ(P^k) z^k` from a graded solution.
pub fn moment_series(sol: &FSolution<Scalar>) -> Result<ScalarSeries> {
    let m = sol.moments()?;
    let k = m.len() - 1;
    Ok(ScalarSeries::from_coeffs(m, k))
}

/// Solves a graded pencil and returns `φ(P^k)` for `k = 0..=order`.
pub fn moments_of_pencil(p: &GradedPencil, e: &Embedding, order: usize) -> Result<ScalarSeries> {
    let sol = solve(&FixedPointProblem::graded(p, e, order * p.m)?)?;
    moment_series(&sol)
}

/// A polynomial relation among named commuting series, e.g.
/// `2*M^2*(M+2)^2*z^2 - 3*(M-1)`.
#[derive(Clone, Debug)]
pub struct EquationSpec {
    pub text: String,
    expr: RatExpr,
    names: Alphabet,
}

impl EquationSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut names = Alphabet::new();
        let expr = parse(text, &mut names)?;
        if !expr.is_polynomial() {
            return Err(Error::Precondition("equations must be polynomial".into()));
        }
        Ok(EquationSpec { text: text.to_string(), expr, names })
    }

    pub fn names(&self) -> Vec<String> {
        self.names.vars().map(|v| self.names.name(v).to_string()).collect()
    }

    /// Evaluates the left-hand side; an unbound `z` is the series variable.
    pub fn residual(&self, bindings: &BTreeMap<String, ScalarSeries>) -> Result<ScalarSeries> {
        let order = bindings.values().map(ScalarSeries::order).min().unwrap_or(0);
        let mut assign = BTreeMap::new();
        for v in self.names.vars() {
            let name = self.names.name(v);
            let s = match bindings.get(name) {
                Some(s) => ScalarSeries::from_coeffs(s.coeffs().to_vec(), order),
                None if name == "z" => ScalarSeries::var(order),
                None => return Err(Error::UnknownVar(name.to_string())),
            };
            assign.insert(v, s);
        }
        if assign.is_empty() {
            let c = self.expr.to_poly().map(|p| p.eps()).unwrap_or_else(Scalar::zero);
            return Ok(ScalarSeries::constant(c, order));
        }
        evaluate(&self.expr, &assign)
    }
}

/// Order of the first nonzero coefficient of the residual; `None` means it
/// vanishes through the common order `K` of the bindings.
pub fn check_equation(eq: &EquationSpec, bindings: &BTreeMap<String, ScalarSeries>) -> Result<Option<usize>> {
    Ok(eq.residual(bindings)?.valuation())
}

/// Scalar subordination data for `X + Y` with `Ψ = (1 − z(X+Y))⁻¹`:
/// `E_X[Ψ] = (1 − zF_Y − zX)⁻¹ = (1 − zF_Y)⁻¹ (1 − ω_X X)⁻¹` with
/// `ω_X = z/(1 − zF_Y)`, hence `M(z) = M_X(ω_X(z)) / (1 − zF_Y(z))`.
#[derive(Clone, Debug, PartialEq)]
pub struct Subordination {
    pub f_x: ScalarSeries,
    pub f_y: ScalarSeries,
    pub omega_x: ScalarSeries,
    pub omega_y: ScalarSeries,
    pub m: ScalarSeries,
}

pub fn subordination_additive(dx: &Dist, dy: &Dist, order: usize) -> Result<Subordination> {
    let (x, y): (Var, Var) = (0, 1);
    let one = Mat::<Scalar>::identity(1);
    let prob = FixedPointProblem {
        u: vec![Scalar::one()],
        v: vec![Scalar::one()],
        c: [(x, vec![one.clone()]), (y, vec![one.clone()])].into(),
        split: [(x, vec![one.clone()]), (y, vec![one])].into(),
        dists: [(x, dx.clone()), (y, dy.clone())].into(),
        order,
        entry_degree: None,
        grading: 1,
    };
    let sol = solve(&prob)?;
    let scalar = |s: &MatSeries<Scalar>| ScalarSeries::from_coeffs(s.coeffs().iter().map(|m| m[(0, 0)].clone()).collect(), order);
    let (f_x, f_y) = (scalar(&sol.f[&x]), scalar(&sol.f[&y]));
    let z = ScalarSeries::var(order);
    let omega = |f: &ScalarSeries| -> Result<ScalarSeries> {
        Ok(z.mul(&ScalarSeries::constant(Scalar::one(), order).sub(&z.mul(f)).inverse()?))
    };
    Ok(Subordination {
        omega_x: omega(&f_y)?,
        omega_y: omega(&f_x)?,
        m: moment_series(&sol)?,
        f_x,
        f_y,
    })
}

impl Subordination {
    /// `M_X(ω_X)/(1 − zF_Y)`, which must reproduce `m`.
    pub fn via_x(&self, dx: &Dist) -> Result<ScalarSeries> {
        let k = self.m.order();
        let mx = ScalarSeries::from_coeffs(dx.moments(k)?, k);
        let z = ScalarSeries::var(k);
        let lead = ScalarSeries::constant(Scalar::one(), k).sub(&z.mul(&self.f_y)).inverse()?;
        Ok(mx.compose(&self.omega_x)?.mul(&lead))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncpoly::parse_poly;

    fn setup(text: &str) -> (NCPoly, Alphabet) {
        let mut al = Alphabet::new();
        let p = parse_poly(text, &mut al).unwrap();
        (p, al)
    }

    #[test]
    fn polynomial_examples() {
        let (p, al) = setup("X*Y*X");
        let (x, y) = (al.lookup("X").unwrap(), al.lookup("Y").unwrap());
        let e = Embedding::new().with(x, Dist::standard_semicircle()).with(y, Dist::point(Scalar::int(5)));
        let ey: VarSet = [y].into();
        assert_eq!(cond_exp_poly(&p, &ey, &e), NCPoly::constant(Scalar::int(5)));
        assert_eq!(cond_exp_closed(&p, &ey, &e), NCPoly::constant(Scalar::int(5)));
        let ex: VarSet = [x].into();
        assert_eq!(cond_exp_poly(&NCPoly::var(x), &ex, &e), NCPoly::var(x));
        assert_eq!(cond_exp_poly(&NCPoly::var(y), &ex, &e), NCPoly::constant(Scalar::int(5)));
        // E_X[XYX] = X·φ(Y)·X by the module property
        assert_eq!(cond_exp_poly(&p, &ex, &e), setup("5*X*X").0);
    }

    #[test]
    fn additive_subordination() {
        let (d1, d2) = (Dist::standard_semicircle(), Dist::standard_semicircle());
        let s = subordination_additive(&d1, &d2, 12).unwrap();
        assert_eq!(s.f_x, s.f_y);
        assert_eq!(s.m, ScalarSeries::from_coeffs(Dist::semicircle(Scalar::int(2)).moments(12).unwrap(), 12));
        assert_eq!(s.via_x(&d1).unwrap(), s.m);
        let pt = Dist::point(Scalar::int(3));
        let s = subordination_additive(&pt, &Dist::arcsine(), 10).unwrap();
        assert_eq!(s.f_x, ScalarSeries::constant(Scalar::int(3), 10));
        assert_eq!(s.via_x(&pt).unwrap(), s.m);
    }

    #[test]
    fn equations() {
        let eq = EquationSpec::parse("M - 1").unwrap();
        let b = BTreeMap::from([("M".to_string(), ScalarSeries::constant(Scalar::one(), 8))]);
        assert_eq!(check_equation(&eq, &b).unwrap(), None);
        let eq = EquationSpec::parse("z*M^2 - M + 1").unwrap();
        let cat: Vec<Scalar> = Dist::standard_semicircle().moments(20).unwrap().into_iter().step_by(2).collect();
        let b = BTreeMap::from([("M".to_string(), ScalarSeries::from_coeffs(cat, 10))]);
        assert_eq!(check_equation(&eq, &b).unwrap(), None);
        let b = BTreeMap::from([("M".to_string(), ScalarSeries::constant(Scalar::one(), 10))]);
        assert_eq!(check_equation(&eq, &b).unwrap(), Some(1));
        assert!(EquationSpec::parse("inv(1+M)").is_err());
    }
}
