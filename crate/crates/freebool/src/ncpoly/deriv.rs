//! Free difference quotients and block derivatives.

use super::{blocks_by_set, Alphabet, MultiTensor, NCPoly, TensorElem, Var, VarSet, Word};

/// `∂_x(uxv) = u ⊗ v`, summed over occurrences and extended linearly.
pub fn free_derivative(p: &NCPoly, x: Var) -> TensorElem {
    split_at_letters(p, |v| v == x, |w, k| (w.slice(0..k), w.slice(k + 1..w.len())))
}

/// `(1 ⊗ x)·∂_x`: `uxv ↦ u ⊗ xv`.
pub fn rdelta(p: &NCPoly, x: Var) -> TensorElem {
    rdelta_set(p, &[x].into())
}

/// `(x ⊗ 1)·∂_x`: `uxv ↦ ux ⊗ v`.
pub fn ldelta(p: &NCPoly, x: Var) -> TensorElem {
    ldelta_set(p, &[x].into())
}

/// `Σ_{x∈S} rdelta_x`.
pub fn rdelta_set(p: &NCPoly, s: &VarSet) -> TensorElem {
    split_at_letters(p, |v| s.contains(&v), |w, k| (w.slice(0..k), w.slice(k..w.len())))
}

/// `Σ_{x∈S} ldelta_x`.
pub fn ldelta_set(p: &NCPoly, s: &VarSet) -> TensorElem {
    split_at_letters(p, |v| s.contains(&v), |w, k| (w.slice(0..k + 1), w.slice(k + 1..w.len())))
}

/// Tensor commutator with `x`: each occurrence contributes `u ⊗ xv − ux ⊗ v`.
pub fn rnabla(p: &NCPoly, x: Var) -> TensorElem {
    rdelta(p, x).sub(&ldelta(p, x))
}

fn split_at_letters(
    p: &NCPoly,
    hit: impl Fn(Var) -> bool,
    cut: impl Fn(&Word, usize) -> (Word, Word),
) -> TensorElem {
    let mut t = TensorElem::zero();
    for (w, c) in p.terms() {
        for (k, &v) in w.letters().iter().enumerate() {
            if hit(v) {
                let (l, r) = cut(w, k);
                t.add_term(l, r, c.clone());
            }
        }
    }
    t
}

/// `k`-fold difference quotient `∂_x^k`: every choice of `k` occurrences of `x`
/// yields the `k+1` pockets between them.
pub fn free_derivative_k(p: &NCPoly, x: Var, k: usize) -> MultiTensor {
    let mut out = MultiTensor::new();
    for (w, c) in p.terms() {
        let pos: Vec<usize> = w.letters().iter().enumerate().filter(|(_, &v)| v == x).map(|(i, _)| i).collect();
        let mut choice = Vec::with_capacity(k);
        choose(&pos, k, 0, &mut choice, &mut |sel| {
            let mut parts = Vec::with_capacity(k + 1);
            let mut start = 0;
            for &i in sel {
                parts.push(w.slice(start..i));
                start = i + 1;
            }
            parts.push(w.slice(start..w.len()));
            let e = out.entry(parts).or_default();
            *e += c;
        });
    }
    out.retain(|_, c| !num_traits::Zero::is_zero(c));
    out
}

fn choose(pos: &[usize], k: usize, from: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    let need = k - cur.len();
    for j in from..pos.len() {
        if pos.len() - j < need {
            break;
        }
        cur.push(pos[j]);
        choose(pos, k, j + 1, cur, f);
        cur.pop();
    }
}

/// Right block derivative `Δ̂_S`: deconcatenates each monomial just before
/// every maximal block of letters in `S`. A monomial starting with such a
/// block contributes the summand `1 ⊗ w`.
pub fn block_delta_right(p: &NCPoly, s: &VarSet) -> TensorElem {
    let mut t = TensorElem::zero();
    for (w, c) in p.terms() {
        let mut at = 0;
        for (blk, in_s) in blocks_by_set(w, s) {
            if in_s {
                t.add_term(w.slice(0..at), w.slice(at..w.len()), c.clone());
            }
            at += blk.len();
        }
    }
    t
}

/// Left block derivative: cuts just after every maximal block in `S`;
/// a monomial ending with such a block contributes `w ⊗ 1`.
pub fn block_delta_left(p: &NCPoly, s: &VarSet) -> TensorElem {
    let mut t = TensorElem::zero();
    for (w, c) in p.terms() {
        let mut at = 0;
        for (blk, in_s) in blocks_by_set(w, s) {
            at += blk.len();
            if in_s {
                t.add_term(w.slice(0..at), w.slice(at..w.len()), c.clone());
            }
        }
    }
    t
}

/// Full block derivative: cuts before every maximal same-algebra block.
pub fn block_delta(p: &NCPoly, alpha: &Alphabet) -> TensorElem {
    let mut t = TensorElem::zero();
    for (w, c) in p.terms() {
        let Some((blocks, _)) = super::alternating_factorization(w, alpha) else { continue };
        let mut at = 0;
        for (blk, _) in blocks {
            t.add_term(w.slice(0..at), w.slice(at..w.len()), c.clone());
            at += blk.len();
        }
    }
    t
}
