#![allow(dead_code)]

use freebool::cumulants::{Dist, Embedding};
use freebool::ncpoly::{NCPoly, Var, Word};
use freebool::Scalar;
use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Law of `d + c`, given by its first `n` moments.
pub fn shifted(d: &Dist, c: i64, n: usize) -> Dist {
    let m = d.moments(n).unwrap();
    let c = Scalar::int(c);
    let out = (0..=n)
        .map(|k| {
            (0..=k).fold(Scalar::int(0), |acc, j| {
                let b = Scalar::real(BigRational::from_integer(binomial(BigInt::from(k), BigInt::from(j))));
                acc + &(&b * &(&m[j] * &c.pow((k - j) as u32)))
            })
        })
        .collect();
    Dist::from_moments(out).unwrap()
}

/// Three free variables with non-centred laws so that few cumulants vanish by symmetry.
pub fn skewed_embedding() -> Embedding {
    Embedding::new()
        .with(0, shifted(&Dist::standard_semicircle(), 1, 40))
        .with(1, shifted(&Dist::bernoulli(), 2, 40))
        .with(2, shifted(&Dist::arcsine(), -1, 40))
}

pub fn word_over(r: &mut ChaCha8Rng, letters: &[Var], len: usize) -> Word {
    Word((0..len).map(|_| letters[r.gen_range(0..letters.len())]).collect())
}

pub fn random_word(r: &mut ChaCha8Rng, letters: &[Var], min: usize, max: usize) -> Word {
    let len = r.gen_range(min..=max);
    word_over(r, letters, len)
}

pub fn small_scalar(r: &mut ChaCha8Rng) -> Scalar {
    let re = Scalar::ratio(r.gen_range(-4..=4), r.gen_range(1..=3));
    if r.gen_bool(0.25) {
        &re + &(&Scalar::i() * &Scalar::int(r.gen_range(-2..=2)))
    } else {
        re
    }
}

pub fn random_poly(r: &mut ChaCha8Rng, letters: &[Var], terms: usize, max_len: usize) -> NCPoly {
    let mut p = NCPoly::zero();
    for _ in 0..terms {
        let w = random_word(r, letters, 0, max_len);
        p.add_term(w, small_scalar(r));
    }
    p
}
