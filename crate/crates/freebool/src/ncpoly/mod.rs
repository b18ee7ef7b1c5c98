//! Words, non-commutative polynomials, tensors and the derivations acting on them.

mod deriv;
mod expr;

pub use deriv::*;
pub use expr::*;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::scalar::Scalar;

/// Index of a variable in an [`Alphabet`].
pub type Var = u16;
pub type VarSet = BTreeSet<Var>;

/// Variable names plus the algebra tag of each variable. Variables with
/// distinct tags are treated as free; a tag may group several variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    algebra: Vec<u32>,
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    /// One variable per name, each in its own algebra.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Self {
        let mut a = Self::new();
        for n in names {
            a.var(n.as_ref());
        }
        a
    }

    /// Interns `name`; a new variable gets a fresh algebra tag.
    pub fn var(&mut self, name: &str) -> Var {
        if let Some(v) = self.lookup(name) {
            return v;
        }
        let tag = self.algebra.iter().max().map_or(0, |t| t + 1);
        self.names.push(name.to_string());
        self.algebra.push(tag);
        (self.names.len() - 1) as Var
    }

    pub fn lookup(&self, name: &str) -> Option<Var> {
        self.names.iter().position(|n| n == name).map(|i| i as Var)
    }

    pub fn name(&self, v: Var) -> &str {
        &self.names[v as usize]
    }

    pub fn algebra(&self, v: Var) -> u32 {
        self.algebra[v as usize]
    }

    pub fn set_algebra(&mut self, v: Var, tag: u32) {
        self.algebra[v as usize] = tag;
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (0..self.names.len()).map(|i| i as Var)
    }

    /// All variables whose algebra tag is in `tags`.
    pub fn vars_in_algebras(&self, tags: &BTreeSet<u32>) -> VarSet {
        self.vars().filter(|&v| tags.contains(&self.algebra(v))).collect()
    }
}

/// A monomial; the empty word is the unit. Ordered by length, then lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<Var>);

impl Ord for Word {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.len().cmp(&o.0.len()).then_with(|| self.0.cmp(&o.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl Word {
    pub fn unit() -> Self {
        Word(Vec::new())
    }

    pub fn letter(v: Var) -> Self {
        Word(vec![v])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Var] {
        &self.0
    }

    pub fn concat(&self, o: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + o.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&o.0);
        Word(v)
    }

    pub fn slice(&self, r: std::ops::Range<usize>) -> Word {
        Word(self.0[r].to_vec())
    }

    pub fn first(&self) -> Option<Var> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Var> {
        self.0.last().copied()
    }

    pub fn display<'a>(&'a self, a: &'a Alphabet) -> impl fmt::Display + 'a {
        WordDisplay(self, a)
    }
}

struct WordDisplay<'a>(&'a Word, &'a Alphabet);

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let names: Vec<&str> = self.0 .0.iter().map(|&v| self.1.name(v)).collect();
        f.write_str(&names.join("*"))
    }
}

/// How a word starts and ends relative to a bipartition `A | B` of the variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WordType {
    AA,
    AB,
    BA,
    BB,
}

/// Maximal runs of letters on the same side of the bipartition; `true` marks side A.
pub fn blocks_by_set(w: &Word, in_a: &VarSet) -> Vec<(Word, bool)> {
    let mut out: Vec<(Word, bool)> = Vec::new();
    for &v in w.letters() {
        let side = in_a.contains(&v);
        match out.last_mut() {
            Some((blk, s)) if *s == side => blk.0.push(v),
            _ => out.push((Word::letter(v), side)),
        }
    }
    out
}

/// Maximal same-algebra runs, each with its algebra tag, and the word type
/// relative to the algebra of the first letter. `None` for the unit.
pub fn alternating_factorization(w: &Word, alpha: &Alphabet) -> Option<(Vec<(Word, u32)>, WordType)> {
    let mut out: Vec<(Word, u32)> = Vec::new();
    for &v in w.letters() {
        let tag = alpha.algebra(v);
        match out.last_mut() {
            Some((blk, t)) if *t == tag => blk.0.push(v),
            _ => out.push((Word::letter(v), tag)),
        }
    }
    let first = out.first()?.1;
    let last = out.last()?.1;
    let ty = if first == last { WordType::AA } else { WordType::AB };
    Some((out, ty))
}

pub fn word_type(w: &Word, in_a: &VarSet) -> Option<WordType> {
    let f = in_a.contains(&w.first()?);
    let l = in_a.contains(&w.last()?);
    Some(match (f, l) {
        (true, true) => WordType::AA,
        (true, false) => WordType::AB,
        (false, true) => WordType::BA,
        (false, false) => WordType::BB,
    })
}

/// Non-commutative polynomial with exact Gaussian-rational coefficients.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct NCPoly {
    terms: BTreeMap<Word, Scalar>,
}

impl fmt::Debug for NCPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

impl NCPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Self::monomial(Word::unit(), c)
    }

    pub fn var(v: Var) -> Self {
        Self::monomial(Word::letter(v), Scalar::one())
    }

    pub fn monomial(w: Word, c: Scalar) -> Self {
        let mut p = Self::zero();
        p.add_term(w, c);
        p
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Word, Scalar)>) -> Self {
        let mut p = Self::zero();
        for (w, c) in it {
            p.add_term(w, c);
        }
        p
    }

    pub fn add_term(&mut self, w: Word, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &Word) -> Scalar {
        self.terms.get(w).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Augmentation ε: the constant coefficient.
    pub fn eps(&self) -> Scalar {
        self.coeff(&Word::unit())
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    /// `Some(d)` if every term has length `d`.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let d = self.degree();
        self.terms.keys().all(|w| w.len() == d).then_some(d)
    }

    pub fn vars(&self) -> VarSet {
        self.terms.keys().flat_map(|w| w.0.iter().copied()).collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut p = self.clone();
        for (w, c) in &o.terms {
            p.add_term(w.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Scalar::one()))
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        NCPoly { terms: self.terms.iter().map(|(w, c)| (w.clone(), c * s)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut p = Self::zero();
        for (u, a) in &self.terms {
            for (v, b) in &o.terms {
                p.add_term(u.concat(v), a * b);
            }
        }
        p
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// Drops all terms longer than `max_len`.
    pub fn truncate(&self, max_len: usize) -> Self {
        NCPoly {
            terms: self.terms.iter().filter(|(w, _)| w.len() <= max_len).map(|(w, c)| (w.clone(), c.clone())).collect(),
        }
    }

    /// Applies a linear functional given on monomials.
    pub fn apply(&self, mut f: impl FnMut(&Word) -> Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for (w, c) in &self.terms {
            let v = f(w);
            if !v.is_zero() {
                acc += &(c * &v);
            }
        }
        acc
    }

    pub fn display<'a>(&'a self, a: &'a Alphabet) -> impl fmt::Display + 'a {
        PolyDisplay(self, a)
    }
}

/// Sign-split coefficient text that re-parses: (is_negative, magnitude).
pub(crate) fn coeff_text(c: &Scalar) -> (bool, String) {
    let (re, im) = (c.re(), c.im());
    if im.is_zero() {
        let neg = re.is_negative();
        return (neg, Scalar::real(re.abs()).to_string());
    }
    if re.is_zero() {
        let neg = im.is_negative();
        let m = im.abs();
        return (neg, if m.is_one() { "i".into() } else { format!("{}*i", Scalar::real(m)) });
    }
    let sign = if im.is_negative() { "-" } else { "+" };
    let m = im.abs();
    let imt = if m.is_one() { "i".to_string() } else { format!("{}*i", Scalar::real(m)) };
    let (rneg, rt) = (re.is_negative(), Scalar::real(re.abs()).to_string());
    let rt = if rneg { format!("-{rt}") } else { rt };
    (false, format!("({rt}{sign}{imt})"))
}

struct PolyDisplay<'a>(&'a NCPoly, &'a Alphabet);

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_zero() {
            return f.write_str("0");
        }
        for (k, (w, c)) in self.0.terms.iter().enumerate() {
            let (neg, mag) = coeff_text(c);
            let body = if w.is_empty() {
                mag
            } else if mag == "1" {
                w.display(self.1).to_string()
            } else {
                format!("{mag}*{}", w.display(self.1))
            };
            match (k, neg) {
                (0, false) => f.write_str(&body)?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        Ok(())
    }
}

/// Element of `A ⊗ A`: merged `(left, right)` pairs with nonzero coefficients.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct TensorElem {
    terms: BTreeMap<(Word, Word), Scalar>,
}

impl TensorElem {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, l: Word, r: Word, c: Scalar) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((l, r)) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Word, &Scalar)> {
        self.terms.iter().map(|((l, r), c)| (l, r, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut t = self.clone();
        for ((l, r), c) in &o.terms {
            t.add_term(l.clone(), r.clone(), c.clone());
        }
        t
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut t = self.clone();
        for ((l, r), c) in &o.terms {
            t.add_term(l.clone(), r.clone(), -c);
        }
        t
    }

    /// `(P ⊗ 1)·T`: multiplies left factors by `P` from the left.
    pub fn left_mul(&self, p: &NCPoly) -> Self {
        let mut t = Self::zero();
        for ((l, r), c) in &self.terms {
            for (w, a) in p.terms() {
                t.add_term(w.concat(l), r.clone(), a * c);
            }
        }
        t
    }

    /// `T·(1 ⊗ Q)`: multiplies right factors by `Q` from the right.
    pub fn right_mul(&self, q: &NCPoly) -> Self {
        let mut t = Self::zero();
        for ((l, r), c) in &self.terms {
            for (w, a) in q.terms() {
                t.add_term(l.clone(), r.concat(w), c * a);
            }
        }
        t
    }

    /// Evaluates a bilinear functional `Σ c·f(l)·g(r)`.
    pub fn apply(&self, mut f: impl FnMut(&Word) -> Scalar, mut g: impl FnMut(&Word) -> Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for ((l, r), c) in &self.terms {
            let a = f(l);
            if a.is_zero() {
                continue;
            }
            let b = g(r);
            if !b.is_zero() {
                acc += &(&(c * &a) * &b);
            }
        }
        acc
    }
}

/// Element of `A^{⊗(k+1)}` produced by `k`-fold free difference quotients.
pub type MultiTensor = BTreeMap<Vec<Word>, Scalar>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_order_is_length_then_lex() {
        let mut ws = vec![Word(vec![1, 0]), Word(vec![2]), Word(vec![0, 1]), Word::unit()];
        ws.sort();
        assert_eq!(ws, vec![Word::unit(), Word(vec![2]), Word(vec![0, 1]), Word(vec![1, 0])]);
    }

    #[test]
    fn factorization_types() {
        let mut a = Alphabet::from_names(&["X", "Y"]);
        let (x, y) = (a.var("X"), a.var("Y"));
        let (f, t) = alternating_factorization(&Word(vec![x, y, x]), &a).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(t, WordType::AA);
        let (f, _) = alternating_factorization(&Word(vec![x, x, y, y]), &a).unwrap();
        assert_eq!(f, vec![(Word(vec![x, x]), 0), (Word(vec![y, y]), 1)]);
        let set: VarSet = [x].into();
        assert_eq!(word_type(&Word(vec![x, x, y, y]), &set), Some(WordType::AB));
        assert_eq!(word_type(&Word(vec![y]), &set), Some(WordType::BB));
    }
}
