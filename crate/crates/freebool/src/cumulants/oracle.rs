//! Joint moments of free variables straight from the definition of freeness.
//!
//! A product is consumed left to right while a stack of centered one-variable
//! polynomials is maintained: appending `x` to a top of the same variable
//! either splits off its mean (`top·x = (top·x − φ(top·x)) + φ(top·x)`) or
//! keeps the centered part; a fresh variable is pushed as `x − φ(x)` or
//! absorbed as the scalar `φ(x)`. Alternating centered products have
//! vanishing state, so only the empty stack contributes at the end.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use num_traits::{One, Zero};

use super::{interval_partitions, Dist};
use crate::ncpoly::{blocks_by_set, NCPoly, Var, VarSet, Word};
use crate::scalar::Scalar;

type Stack = Vec<(Var, Vec<Scalar>)>;
type States = HashMap<Stack, Scalar>;

/// Free variables with their marginal laws.
#[derive(Debug, Default)]
pub struct Embedding {
    dists: BTreeMap<Var, Dist>,
    memo: Mutex<HashMap<Word, Scalar>>,
}

impl Clone for Embedding {
    fn clone(&self) -> Self {
        Embedding { dists: self.dists.clone(), memo: Mutex::new(HashMap::new()) }
    }
}

impl Embedding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, v: Var, d: Dist) -> Self {
        self.set_dist(v, d);
        self
    }

    pub fn set_dist(&mut self, v: Var, d: Dist) {
        self.dists.insert(v, d);
        self.memo.get_mut().unwrap().clear();
    }

    pub fn dist(&self, v: Var) -> &Dist {
        self.dists.get(&v).unwrap_or_else(|| panic!("no distribution for variable #{v}"))
    }

    pub fn has_dist(&self, v: Var) -> bool {
        self.dists.contains_key(&v)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.dists.keys().copied()
    }

    fn centered_mean(&self, v: Var, p: &[Scalar]) -> Scalar {
        let d = self.dist(v);
        let mut acc = Scalar::zero();
        for (k, c) in p.iter().enumerate() {
            if !c.is_zero() {
                acc += &(c * &d.moment(k));
            }
        }
        acc
    }

    fn push_letter(&self, states: States, v: Var, remaining: usize) -> States {
        let mut out = States::with_capacity(states.len() * 2);
        let mut add = |s: Stack, w: Scalar| {
            if s.len() > remaining || w.is_zero() {
                return;
            }
            let e = out.entry(s).or_insert_with(Scalar::zero);
            *e += &w;
        };
        for (mut stack, w) in states {
            match stack.last() {
                Some((tv, top)) if *tv == v => {
                    let mut t = Vec::with_capacity(top.len() + 1);
                    t.push(Scalar::zero());
                    t.extend(top.iter().cloned());
                    let c = self.centered_mean(v, &t);
                    t[0] -= &c;
                    let mut popped = stack.clone();
                    popped.pop();
                    add(popped, &w * &c);
                    *stack.last_mut().unwrap() = (v, t);
                    add(stack, w);
                }
                _ => {
                    let m1 = self.dist(v).moment(1);
                    add(stack.clone(), &w * &m1);
                    stack.push((v, vec![-m1, Scalar::one()]));
                    add(stack, w);
                }
            }
        }
        out
    }

    fn feed(&self, states: States, p: &NCPoly, after: usize) -> States {
        let mut out = States::new();
        for (word, c) in p.terms() {
            let mut s: States = states.iter().map(|(k, v)| (k.clone(), v * c)).collect();
            let n = word.len();
            for (j, &v) in word.letters().iter().enumerate() {
                s = self.push_letter(s, v, n - j - 1 + after);
            }
            for (k, v) in s {
                let e = out.entry(k).or_insert_with(Scalar::zero);
                *e += &v;
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    fn start() -> States {
        States::from([(Stack::new(), Scalar::one())])
    }

    fn empty_weight(s: &States) -> Scalar {
        s.get(&Stack::new()).cloned().unwrap_or_else(Scalar::zero)
    }

    /// `φ(P_1⋯P_k)` for every `k = 0..=n`.
    pub fn phi_prefixes(&self, factors: &[NCPoly]) -> Vec<Scalar> {
        let degs: Vec<usize> = factors.iter().map(NCPoly::degree).collect();
        let mut left: usize = degs.iter().sum();
        let mut s = Self::start();
        let mut out = vec![Scalar::one()];
        for (p, d) in factors.iter().zip(&degs) {
            left -= d;
            s = self.feed(s, p, left);
            out.push(Self::empty_weight(&s));
        }
        out
    }

    /// `φ(P^k)` for `k = 0..=kmax`.
    pub fn phi_powers(&self, p: &NCPoly, kmax: usize) -> Vec<Scalar> {
        self.phi_prefixes(&vec![p.clone(); kmax])
    }

    pub fn phi(&self, p: &NCPoly) -> Scalar {
        p.apply(|w| self.free_moment(w))
    }

    /// The oracle: `φ(w)` for a word in free variables.
    pub fn free_moment(&self, w: &Word) -> Scalar {
        if let Some(v) = self.memo.lock().unwrap().get(w) {
            return v.clone();
        }
        let mut s = Self::start();
        let n = w.len();
        for (j, &v) in w.letters().iter().enumerate() {
            s = self.push_letter(s, v, n - j - 1);
        }
        let r = Self::empty_weight(&s);
        self.memo.lock().unwrap().insert(w.clone(), r.clone());
        r
    }

    /// `β_k(P_1,…,P_k)` for `k = 1..=n` by the Boolean moment recurrence.
    pub fn prefix_cumulants(&self, args: &[NCPoly]) -> Vec<Scalar> {
        let n = args.len();
        // phi[j][k−j] = φ(P_{j+1}⋯P_k)
        let phi: Vec<Vec<Scalar>> = (0..n).map(|j| self.phi_prefixes(&args[j..])).collect();
        let mut b: Vec<Scalar> = Vec::with_capacity(n);
        for k in 1..=n {
            let mut v = phi[0][k].clone();
            for j in 1..k {
                if !b[j - 1].is_zero() {
                    v -= &(&b[j - 1] * &phi[j][k - j]);
                }
            }
            b.push(v);
        }
        b
    }

    pub fn boolean_cumulant(&self, args: &[NCPoly]) -> Scalar {
        if args.is_empty() {
            return Scalar::one();
        }
        self.prefix_cumulants(args).pop().unwrap()
    }

    /// `β_n(w_1,…,w_n)` with word entries.
    pub fn mixed_boolean_cumulant(&self, args: &[Word]) -> Scalar {
        let polys: Vec<NCPoly> = args.iter().map(|w| NCPoly::monomial(w.clone(), Scalar::one())).collect();
        self.boolean_cumulant(&polys)
    }

    /// `β_π` for an interval partition given by block sizes.
    pub fn beta_pi(&self, blocks: &[usize], args: &[Word]) -> Scalar {
        let mut at = 0;
        let mut acc = Scalar::one();
        for &len in blocks {
            acc *= &self.mixed_boolean_cumulant(&args[at..at + len]);
            at += len;
        }
        acc
    }

    /// `Σ_π β_π`, which must reproduce the joint moment.
    pub fn sum_over_interval_partitions(&self, args: &[Word]) -> Scalar {
        interval_partitions(args.len()).iter().fold(Scalar::zero(), |a, p| a + self.beta_pi(p, args))
    }

    /// Alternating cumulant `β_{2n−1}(a_1,b_1,…,a_n)` of two free families,
    /// expanded by the nested formula that only needs cumulants within each family.
    pub fn bocu2(&self, a: &[Word], b: &[Word]) -> Scalar {
        assert_eq!(a.len(), b.len() + 1, "alternating tuple must start and end in the first family");
        let n = a.len();
        if n == 1 {
            return self.mixed_boolean_cumulant(&a[..1]);
        }
        let mut total = Scalar::zero();
        // interior indices chosen by a bitmask; 0 and n−1 always present
        for mask in 0..1u64 << (n - 2) {
            let mut js = vec![0];
            js.extend((1..n - 1).filter(|i| mask >> (i - 1) & 1 == 1));
            js.push(n - 1);
            let outer: Vec<Word> = js.iter().map(|&j| a[j].clone()).collect();
            let mut term = self.mixed_boolean_cumulant(&outer);
            for w in js.windows(2) {
                if term.is_zero() {
                    break;
                }
                let (j, jn) = (w[0], w[1]);
                term *= &self.bocu2(&b[j..jn], &a[j + 1..jn]);
            }
            total += &term;
        }
        total
    }

    /// Block cumulant functional `β̇_S`: `β_#blocks` of the `S`/non-`S`
    /// factorization for words starting and ending in `S`, 0 otherwise, 1 on the unit.
    pub fn bbeta(&self, p: &NCPoly, s: &VarSet) -> Scalar {
        p.apply(|w| self.bbeta_word(w, s))
    }

    pub fn bbeta_word(&self, w: &Word, s: &VarSet) -> Scalar {
        let (Some(f), Some(l)) = (w.first(), w.last()) else { return Scalar::one() };
        if !s.contains(&f) || !s.contains(&l) {
            return Scalar::zero();
        }
        let blocks: Vec<Word> = blocks_by_set(w, s).into_iter().map(|(b, _)| b).collect();
        self.mixed_boolean_cumulant(&blocks)
    }

    /// Fully factored cumulant `β̃_S`: `β_len` of the single letters for words
    /// starting and ending in `S`, 0 otherwise, 1 on the unit.
    pub fn fbeta(&self, p: &NCPoly, s: &VarSet) -> Scalar {
        p.apply(|w| self.fbeta_word(w, s))
    }

    pub fn fbeta_word(&self, w: &Word, s: &VarSet) -> Scalar {
        let (Some(f), Some(l)) = (w.first(), w.last()) else { return Scalar::one() };
        if !s.contains(&f) || !s.contains(&l) {
            return Scalar::zero();
        }
        let letters: Vec<Word> = w.letters().iter().map(|&v| Word::letter(v)).collect();
        self.mixed_boolean_cumulant(&letters)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[Var]) -> Word {
        Word(v.to_vec())
    }

    fn semis() -> Embedding {
        Embedding::new().with(0, Dist::standard_semicircle()).with(1, Dist::standard_semicircle())
    }

    #[test]
    fn oracle_examples() {
        let e = semis();
        assert_eq!(e.free_moment(&w(&[0, 1, 0, 1])), Scalar::zero());
        assert_eq!(e.free_moment(&w(&[0, 1, 1, 0])), Scalar::one());
        let e2 = Embedding::new().with(0, Dist::point(Scalar::int(3))).with(1, Dist::point(Scalar::int(5)));
        assert_eq!(e2.free_moment(&w(&[0, 1])), Scalar::int(15));
        let t1 = NCPoly::from_terms([(w(&[0, 1]), Scalar::one()), (w(&[1, 0]), Scalar::one())]);
        assert_eq!(e.phi(&t1.mul(&t1)), Scalar::int(2));
        assert_eq!(e.phi_powers(&t1, 2)[2], Scalar::int(2));
    }

    #[test]
    fn cumulant_examples() {
        let e = semis().with(1, Dist::point(Scalar::int(7)));
        assert_eq!(e.mixed_boolean_cumulant(&[w(&[0]), w(&[1])]), Scalar::zero());
        assert_eq!(e.mixed_boolean_cumulant(&[w(&[0]), w(&[1]), w(&[0])]), Scalar::int(7));
        assert_eq!(e.bocu2(&[w(&[0]), w(&[0])], &[w(&[1])]), Scalar::int(7));
        let x: VarSet = [0].into();
        assert_eq!(e.fbeta(&NCPoly::monomial(w(&[0, 1, 0]), Scalar::one()), &x), Scalar::int(7));
        assert_eq!(e.bbeta(&NCPoly::monomial(w(&[1, 0, 1]), Scalar::one()), &x), Scalar::zero());
    }
}
