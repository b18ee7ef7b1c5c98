//! Exact Gaussian rationals `re + i·im` with big-rational parts.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Error;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Scalar {
    re: BigRational,
    im: BigRational,
}

impl Scalar {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Scalar { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Scalar { re, im: BigRational::zero() }
    }

    pub fn int(n: i64) -> Self {
        Self::real(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Self::real(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn i() -> Self {
        Scalar { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Scalar { re: self.re.clone(), im: -self.im.clone() }
    }

    /// Squared modulus `re² + im²`.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.im.is_zero() {
            return Some(Self::real(self.re.recip()));
        }
        let d = self.norm_sqr();
        Some(Scalar { re: &self.re / &d, im: -(&self.im / &d) })
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Scalar::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    /// Rational value, if the imaginary part vanishes.
    pub fn as_real(&self) -> Option<&BigRational> {
        self.is_real().then_some(&self.re)
    }
}

impl Zero for Scalar {
    fn zero() -> Self {
        Scalar { re: BigRational::zero(), im: BigRational::zero() }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for Scalar {
    fn one() -> Self {
        Self::real(BigRational::one())
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::real(r)
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        if self.im.is_zero() && o.im.is_zero() {
            return Scalar::real(&self.re + &o.re);
        }
        Scalar { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        if self.im.is_zero() && o.im.is_zero() {
            return Scalar::real(&self.re - &o.re);
        }
        Scalar { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        if self.im.is_zero() && o.im.is_zero() {
            return Scalar::real(&self.re * &o.re);
        }
        Scalar {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: &Scalar) -> Scalar {
        self * &o.inv().expect("division by zero scalar")
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar { (&self).$m(&o) }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar { (&self).$m(o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { re: -self.re, im: -self.im }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { re: -self.re.clone(), im: -self.im.clone() }
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, o: &Scalar) {
        if !o.re.is_zero() {
            self.re += &o.re;
        }
        if !o.im.is_zero() {
            self.im += &o.im;
        }
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, o: &Scalar) {
        if !o.re.is_zero() {
            self.re -= &o.re;
        }
        if !o.im.is_zero() {
            self.im -= &o.im;
        }
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, o: &Scalar) {
        *self = &*self * o;
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Canonical text: `p/q` for reals, `a+bi` / `bi` otherwise.
impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return f.write_str(&fmt_rat(&self.re));
        }
        let im = if self.im.is_one() {
            String::new()
        } else if (-self.im.clone()).is_one() {
            "-".to_string()
        } else {
            fmt_rat(&self.im)
        };
        if self.re.is_zero() {
            write!(f, "{im}i")
        } else if self.im.is_negative() {
            write!(f, "{}{im}i", fmt_rat(&self.re))
        } else {
            write!(f, "{}+{im}i", fmt_rat(&self.re))
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_rat(s: &str) -> Result<BigRational, Error> {
    let bad = || Error::Parse { pos: 0, msg: format!("bad rational literal {s:?}") };
    let s = s.trim();
    if s.is_empty() {
        return Err(bad());
    }
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Accepts the `Display` forms: `p`, `p/q`, `bi`, `i`, `-i`, `a+bi`, `a-bi`.
impl FromStr for Scalar {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(body) = s.strip_suffix('i') else {
            return Ok(Scalar::real(parse_rat(&s)?));
        };
        // split at the last sign that is not the leading one
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i)
            .last();
        let (re, im) = match split {
            Some(k) => (parse_rat(&body[..k])?, &body[k..]),
            None => (BigRational::zero(), body),
        };
        let im = match im {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            t => parse_rat(t.strip_prefix('+').unwrap_or(t))?,
        };
        Ok(Scalar::new(re, im))
    }
}
