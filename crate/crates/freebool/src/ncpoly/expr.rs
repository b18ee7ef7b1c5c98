//! Rational expressions: parser, printer and evaluation.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' INT)?
//! atom   := INT ('/' INT)? | 'i' | IDENT | '(' expr ')' | 'inv' '(' expr ')'
//! ```
//!
//! `p/q` is only a rational literal; division of expressions is rejected, as
//! is implicit multiplication (`2X`).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{coeff_text, Alphabet, NCPoly, Var, Word};
use crate::matrix::Mat;
use crate::scalar::Scalar;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum RatExpr {
    Var(Var),
    Const(Scalar),
    Sum(Vec<RatExpr>),
    Prod(Vec<RatExpr>),
    Inv(Box<RatExpr>),
}

impl RatExpr {
    /// Constant term, i.e. the value at all variables zero.
    pub fn eps(&self) -> Scalar {
        match self {
            RatExpr::Var(_) => Scalar::zero(),
            RatExpr::Const(c) => c.clone(),
            RatExpr::Sum(xs) => xs.iter().fold(Scalar::zero(), |a, x| a + x.eps()),
            RatExpr::Prod(xs) => xs.iter().fold(Scalar::one(), |a, x| a * x.eps()),
            RatExpr::Inv(x) => x.eps().inv().unwrap_or_else(Scalar::zero),
        }
    }

    pub fn is_polynomial(&self) -> bool {
        match self {
            RatExpr::Var(_) | RatExpr::Const(_) => true,
            RatExpr::Sum(xs) | RatExpr::Prod(xs) => xs.iter().all(RatExpr::is_polynomial),
            RatExpr::Inv(_) => false,
        }
    }

    /// Expands an inverse-free expression.
    pub fn to_poly(&self) -> Option<NCPoly> {
        match self {
            RatExpr::Var(v) => Some(NCPoly::var(*v)),
            RatExpr::Const(c) => Some(NCPoly::constant(c.clone())),
            RatExpr::Sum(xs) => xs.iter().try_fold(NCPoly::zero(), |a, x| Some(a.add(&x.to_poly()?))),
            RatExpr::Prod(xs) => xs.iter().try_fold(NCPoly::one(), |a, x| Some(a.mul(&x.to_poly()?))),
            RatExpr::Inv(_) => None,
        }
    }

    /// Power-series expansion truncated to words of length `<= max_len`.
    pub fn expand(&self, max_len: usize) -> NCPoly {
        match self {
            RatExpr::Var(v) => NCPoly::var(*v).truncate(max_len),
            RatExpr::Const(c) => NCPoly::constant(c.clone()),
            RatExpr::Sum(xs) => xs.iter().fold(NCPoly::zero(), |a, x| a.add(&x.expand(max_len))),
            RatExpr::Prod(xs) => {
                xs.iter().fold(NCPoly::one(), |a, x| a.mul(&x.expand(max_len)).truncate(max_len))
            }
            RatExpr::Inv(x) => {
                // c⁻¹ Σ_k (1 − E/c)^k; the k-th power starts at degree k
                let e = x.expand(max_len);
                let cinv = e.eps().inv().expect("inverse of expression with zero constant term");
                let q = NCPoly::one().sub(&e.scale(&cinv));
                let mut acc = NCPoly::one();
                let mut pw = NCPoly::one();
                for _ in 0..max_len {
                    pw = pw.mul(&q).truncate(max_len);
                    if pw.is_zero() {
                        break;
                    }
                    acc = acc.add(&pw);
                }
                acc.scale(&cinv)
            }
        }
    }

    pub fn vars(&self) -> super::VarSet {
        let mut s = super::VarSet::new();
        self.collect_vars(&mut s);
        s
    }

    fn collect_vars(&self, s: &mut super::VarSet) {
        match self {
            RatExpr::Var(v) => {
                s.insert(*v);
            }
            RatExpr::Const(_) => {}
            RatExpr::Sum(xs) | RatExpr::Prod(xs) => xs.iter().for_each(|x| x.collect_vars(s)),
            RatExpr::Inv(x) => x.collect_vars(s),
        }
    }

    pub fn display<'a>(&'a self, a: &'a Alphabet) -> impl fmt::Display + 'a {
        ExprDisplay(self, a)
    }

    fn sum(mut xs: Vec<RatExpr>) -> RatExpr {
        let mut c = Scalar::zero();
        xs.retain(|x| match x {
            RatExpr::Const(k) => {
                c += k;
                false
            }
            _ => true,
        });
        if !c.is_zero() || xs.is_empty() {
            xs.push(RatExpr::Const(c));
        }
        if xs.len() == 1 {
            xs.pop().unwrap()
        } else {
            RatExpr::Sum(xs)
        }
    }

    fn prod(xs: Vec<RatExpr>) -> RatExpr {
        let mut c = Scalar::one();
        let mut rest = Vec::new();
        for x in xs {
            match x {
                RatExpr::Const(k) => c *= &k,
                RatExpr::Prod(ys) => rest.extend(ys),
                x => rest.push(x),
            }
        }
        if c.is_zero() || rest.is_empty() {
            return RatExpr::Const(c);
        }
        if !c.is_one() {
            rest.insert(0, RatExpr::Const(c));
        }
        if rest.len() == 1 {
            rest.pop().unwrap()
        } else {
            RatExpr::Prod(rest)
        }
    }
}

struct ExprDisplay<'a>(&'a RatExpr, &'a Alphabet);

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.1;
        match self.0 {
            RatExpr::Var(v) => f.write_str(a.name(*v)),
            RatExpr::Const(c) => {
                let (neg, m) = coeff_text(c);
                if neg {
                    write!(f, "(-{m})")
                } else {
                    f.write_str(&m)
                }
            }
            RatExpr::Sum(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| x.display(a).to_string()).collect();
                write!(f, "({})", parts.join(" + "))
            }
            RatExpr::Prod(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| x.display(a).to_string()).collect();
                f.write_str(&parts.join("*"))
            }
            RatExpr::Inv(x) => write!(f, "inv({})", x.display(a)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '0'..='9' => {
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((start, Tok::Int(text[start..i].parse().unwrap())));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => return Err(Error::Parse { pos: i, msg: format!("unexpected character {c:?}") }),
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    alpha: &'a mut Alphabet,
    guard_inv: bool,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos(), msg: msg.into() })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.err(format!("expected {t:?}"))
        }
    }

    fn expr(&mut self) -> Result<RatExpr> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(&Tok::Plus) {
                terms.push(self.term()?);
            } else if self.eat(&Tok::Minus) {
                let t = self.term()?;
                terms.push(RatExpr::prod(vec![RatExpr::Const(Scalar::int(-1)), t]));
            } else {
                break;
            }
        }
        Ok(RatExpr::sum(terms))
    }

    fn term(&mut self) -> Result<RatExpr> {
        let mut fs = vec![self.unary()?];
        loop {
            if self.eat(&Tok::Star) {
                fs.push(self.unary()?);
            } else if self.peek() == Some(&Tok::Slash) {
                return self.err("division is not supported; use inv(...)");
            } else if matches!(self.peek(), Some(Tok::Ident(_) | Tok::Int(_) | Tok::LParen)) {
                return self.err("implicit multiplication is not allowed");
            } else {
                break;
            }
        }
        Ok(RatExpr::prod(fs))
    }

    fn unary(&mut self) -> Result<RatExpr> {
        if self.eat(&Tok::Minus) {
            let x = self.unary()?;
            return Ok(RatExpr::prod(vec![RatExpr::Const(Scalar::int(-1)), x]));
        }
        let base = self.atom()?;
        if self.eat(&Tok::Caret) {
            let Some(Tok::Int(n)) = self.peek().cloned() else {
                return self.err("expected integer exponent");
            };
            self.at += 1;
            let n: usize = n.try_into().map_err(|_| Error::Parse { pos: self.pos(), msg: "exponent too large".into() })?;
            return Ok(RatExpr::prod(vec![base; n]));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RatExpr> {
        let Some(t) = self.peek().cloned() else {
            return self.err("unexpected end of input");
        };
        self.at += 1;
        match t {
            Tok::Int(p) => {
                if self.peek() == Some(&Tok::Slash) {
                    if let Some((_, Tok::Int(q))) = self.toks.get(self.at + 1).cloned() {
                        if q.is_zero() {
                            return self.err("zero denominator");
                        }
                        self.at += 2;
                        return Ok(RatExpr::Const(Scalar::real(BigRational::new(p, q))));
                    }
                    return self.err("division is not supported; use inv(...)");
                }
                Ok(RatExpr::Const(Scalar::real(BigRational::from_integer(p))))
            }
            Tok::Ident(name) if name == "i" => Ok(RatExpr::Const(Scalar::i())),
            Tok::Ident(name) if name == "inv" && self.peek() == Some(&Tok::LParen) => {
                let pos = self.pos();
                self.at += 1;
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                if self.guard_inv && inner.eps().is_zero() {
                    return Err(Error::Parse { pos, msg: "inverse of an expression with zero constant term".into() });
                }
                Ok(match inner {
                    RatExpr::Const(c) => RatExpr::Const(c.inv().unwrap()),
                    e => RatExpr::Inv(Box::new(e)),
                })
            }
            Tok::Ident(name) => Ok(RatExpr::Var(self.alpha.var(&name))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => {
                self.at -= 1;
                self.err("expected an operand")
            }
        }
    }
}

/// Parses `text`, interning new variable names into `alpha`.
pub fn parse(text: &str, alpha: &mut Alphabet) -> Result<RatExpr> {
    parse_with(text, alpha, true)
}

/// Like [`parse`], but accepts `inv(...)` of anything: for evaluation in
/// algebras where the variables themselves may be invertible (series with a
/// nonzero constant term, matrices). [`RatExpr::expand`] must not be used on the result.
pub fn parse_unguarded(text: &str, alpha: &mut Alphabet) -> Result<RatExpr> {
    parse_with(text, alpha, false)
}

fn parse_with(text: &str, alpha: &mut Alphabet, guard_inv: bool) -> Result<RatExpr> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, end: text.len(), alpha, guard_inv };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Parses an inverse-free expression into a polynomial.
pub fn parse_poly(text: &str, alpha: &mut Alphabet) -> Result<NCPoly> {
    parse(text, alpha)?
        .to_poly()
        .ok_or_else(|| Error::Precondition("expected a polynomial, found inv(...)".into()))
}

/// Square matrices (or anything matrix-like) that expressions can be evaluated in.
pub trait EvalAlgebra: Clone {
    /// Size that all operands must share (matrix dimension, series order).
    fn dim(&self) -> usize;
    /// Multiplicative unit of the same shape as `self`.
    fn one_like(&self) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn scaled(&self, c: &Scalar) -> Self;
    fn inverse_of(&self) -> Option<Self>;
}

impl EvalAlgebra for Mat<Scalar> {
    fn dim(&self) -> usize {
        self.rows()
    }
    fn one_like(&self) -> Self {
        Mat::identity(self.rows())
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn scaled(&self, c: &Scalar) -> Self {
        self.scale(c)
    }
    fn inverse_of(&self) -> Option<Self> {
        self.inverse()
    }
}

/// Evaluates `e` at the given square matrices, all of one dimension.
pub fn evaluate<A: EvalAlgebra>(e: &RatExpr, assign: &BTreeMap<Var, A>) -> Result<A> {
    let one = assign.values().next().map(A::one_like).ok_or_else(|| Error::Dimension("empty assignment".into()))?;
    if assign.values().any(|m| m.dim() != one.dim()) {
        return Err(Error::Dimension("operands of different sizes".into()));
    }
    eval_rec(e, assign, &one)
}

fn eval_rec<A: EvalAlgebra>(e: &RatExpr, assign: &BTreeMap<Var, A>, one: &A) -> Result<A> {
    Ok(match e {
        RatExpr::Var(v) => assign.get(v).cloned().ok_or_else(|| Error::UnknownVar(format!("#{v}")))?,
        RatExpr::Const(c) => one.scaled(c),
        RatExpr::Sum(xs) => {
            let mut acc = eval_rec(&xs[0], assign, one)?;
            for x in &xs[1..] {
                acc = acc.plus(&eval_rec(x, assign, one)?);
            }
            acc
        }
        RatExpr::Prod(xs) => {
            let mut acc = eval_rec(&xs[0], assign, one)?;
            for x in &xs[1..] {
                acc = acc.times(&eval_rec(x, assign, one)?);
            }
            acc
        }
        RatExpr::Inv(x) => eval_rec(x, assign, one)?
            .inverse_of()
            .ok_or_else(|| Error::Singular("matrix at inv(...) is not invertible".into()))?,
    })
}

/// Monomial word for a product of variables, e.g. for building test inputs.
pub fn word_of(vars: &[Var]) -> Word {
    Word(vars.to_vec())
}
