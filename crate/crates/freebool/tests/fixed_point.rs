mod common;

use std::time::Instant;

use freebool::condexp::{expand_natural, integrate_out};
use freebool::cumulants::{Dist, Embedding};
use freebool::linearize::{automaton_linearize, suffix_linearize, GradedPencil};
use freebool::ncpoly::{parse_poly, Alphabet, NCPoly, VarSet};
use freebool::solver::{cokernel_projection, iteration_trace, solve, FSolution, FixedPointProblem};
use freebool::{Mat, Scalar};
use num_traits::Zero;

struct Example {
    text: &'static str,
    dists: Vec<(&'static str, Dist)>,
}

fn ex(text: &'static str, dists: Vec<(&'static str, Dist)>) -> Example {
    Example { text, dists }
}

fn semi() -> Dist {
    Dist::standard_semicircle()
}

fn examples() -> Vec<Example> {
    let t3 = "X*Y*Z + Y*X*Z + X*Z*Y + Z*X*Y + Y*Z*X + Z*Y*X";
    vec![
        ex("X + Y", vec![("X", semi()), ("Y", semi())]),
        ex("X*Y", vec![("X", common::shifted(&semi(), 1, 30)), ("Y", common::shifted(&Dist::bernoulli(), 2, 30))]),
        ex("X*Y + Y*X", vec![("X", semi()), ("Y", semi())]),
        ex("X*Y + Y*X", vec![("X", Dist::arcsine()), ("Y", Dist::bernoulli())]),
        ex("i*X*Y - i*Y*X", vec![("X", semi()), ("Y", semi())]),
        ex("X + i*X*Y - i*Y*X", vec![("X", semi()), ("Y", semi())]),
        ex("X + i*X*Y - i*Y*X", vec![("X", semi()), ("Y", Dist::bernoulli())]),
        ex(t3, vec![("X", semi()), ("Y", semi()), ("Z", semi())]),
        ex(t3, vec![("X", Dist::arcsine()), ("Y", Dist::arcsine()), ("Z", Dist::arcsine())]),
    ]
}

fn setup(e: &Example) -> (NCPoly, GradedPencil, Embedding, Alphabet) {
    let mut al = Alphabet::new();
    let p = parse_poly(e.text, &mut al).unwrap();
    let pen = suffix_linearize(&p).unwrap();
    let mut emb = Embedding::new();
    for (name, d) in &e.dists {
        emb.set_dist(al.lookup(name).unwrap(), d.clone());
    }
    (p, pen, emb, al)
}

fn solved(e: &Example, k: usize) -> (NCPoly, FSolution<Scalar>, Embedding, Alphabet) {
    let (p, pen, emb, al) = setup(e);
    let sol = solve(&FixedPointProblem::graded(&pen, &emb, k * pen.m).unwrap()).unwrap();
    (p, sol, emb, al)
}

#[test]
fn moments_agree_with_the_oracle() {
    for e in examples() {
        let start = Instant::now();
        let (p, sol, emb, _) = solved(&e, 6);
        assert_eq!(sol.moments().unwrap(), emb.phi_powers(&p, 6), "{}", e.text);
        assert!(start.elapsed().as_secs() < 60, "{} too slow", e.text);
    }
}

#[test]
fn both_linearizations_give_the_same_moments() {
    for e in examples() {
        let (p, pen, emb, _) = setup(&e);
        let Ok(auto) = automaton_linearize(&p) else { continue };
        let k = 6;
        let a = solve(&FixedPointProblem::graded(&pen, &emb, k * pen.m).unwrap()).unwrap();
        let b = solve(&FixedPointProblem::graded(&auto, &emb, k * auto.m).unwrap()).unwrap();
        assert_eq!(a.moments().unwrap(), b.moments().unwrap(), "{}", e.text);
    }
}

#[test]
fn residual_vanishes_and_compression_is_consistent() {
    for e in examples() {
        let (_, sol, _, _) = solved(&e, 8);
        assert_eq!(sol.residual_order().unwrap(), None, "{}", e.text);
        assert!(sol.compression_consistent().unwrap(), "{}", e.text);
        for (x, q) in &sol.q {
            assert_eq!(&q.mul(q), q);
            assert_eq!(&q.conj_transpose(), q);
            for c in &sol.problem.split[x] {
                assert_eq!(&c.mul(q), c);
            }
            let fq = sol.f[x].mul_mat_left(&q.clone());
            assert_eq!(fq, sol.ftilde[x], "{}", e.text);
        }
    }
}

#[test]
fn iterates_gain_at_least_one_order() {
    for e in examples().iter().take(7) {
        let (_, pen, emb, _) = setup(e);
        let prob = FixedPointProblem::graded(&pen, &emb, 10).unwrap();
        for (r, &o) in iteration_trace(&prob, 8).unwrap().iter().enumerate() {
            assert!(o > r, "{}: iterate {r} agrees only to order {o}", e.text);
        }
    }
}

fn nonzero_entries(s: &freebool::mps::MatSeries<Scalar>) -> usize {
    let (n, m) = (s.rows(), s.cols());
    (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .filter(|&(i, j)| s.coeffs().iter().any(|c| !c[(i, j)].is_zero()))
        .count()
}

#[test]
fn anticommutator_unknowns_are_sparse() {
    let e = &examples()[3];
    let (_, sol, _, _) = solved(e, 10);
    assert_eq!(sol.problem.dim(), 3);
    for f in sol.ftilde.values() {
        assert_eq!(nonzero_entries(f), 2);
    }
}

#[test]
fn phase_does_not_change_the_law() {
    let k = 8;
    let one = solved(&examples()[2], k);
    let i = solved(&examples()[4], k);
    assert_eq!(one.1.moments().unwrap(), i.1.moments().unwrap());
    for v in ["X", "Y"] {
        let keep = |al: &Alphabet| -> VarSet { [al.lookup(v).unwrap()].into() };
        let a = expand_natural(&integrate_out(&one.1, &keep(&one.3)).unwrap(), 6).unwrap();
        let b = expand_natural(&integrate_out(&i.1, &keep(&i.3)).unwrap(), 6).unwrap();
        assert_eq!(a, b, "E_{v}");
    }
}

#[test]
fn projection_of_mixed_rows() {
    let r = |v: &[i64]| v.iter().map(|&x| Scalar::int(x)).collect::<Vec<_>>();
    let a = Mat::from_rows(vec![r(&[1, 0, 1]), r(&[0, 0, 0]), r(&[0, 0, 0])]).unwrap();
    let b = Mat::from_rows(vec![r(&[0, 0, 0]), r(&[2, 0, 2]), r(&[0, 1, 0])]).unwrap();
    let q = cokernel_projection(&[a.clone(), b.clone()]);
    assert_eq!(a.mul(&q), a);
    assert_eq!(b.mul(&q), b);
    let mut rows = q.clone();
    assert_eq!(rows.rref().len(), 2);
}
