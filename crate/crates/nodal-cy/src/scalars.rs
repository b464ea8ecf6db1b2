//! Exact scalars: rationals, the field Q(i, sqrt 2), its extension by sqrt(-3),
//! and the multiplicative units i^a * sqrt(2)^b used by monomial group elements.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Error;

pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Formats as `n/d` with the denominator always present.
pub fn rat_to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

fn isqrt_exact(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    Some(Rational::new(isqrt_exact(r.numer())?, isqrt_exact(r.denom())?))
}

/// Element a + b*sqrt(2) of the real subfield.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Real2 {
    a: Rational,
    b: Rational,
}

impl Real2 {
    fn zero() -> Self {
        Real2 { a: Rational::zero(), b: Rational::zero() }
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        Real2 { a: &self.a + &o.a, b: &self.b + &o.b }
    }
    fn sub(&self, o: &Self) -> Self {
        Real2 { a: &self.a - &o.a, b: &self.b - &o.b }
    }
    fn mul(&self, o: &Self) -> Self {
        let two = int(2);
        Real2 {
            a: &self.a * &o.a + two * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
    fn scale(&self, r: &Rational) -> Self {
        Real2 { a: &self.a * r, b: &self.b * r }
    }
    fn inv(&self) -> Self {
        let n = &self.a * &self.a - int(2) * &self.b * &self.b;
        Real2 { a: &self.a / &n, b: -&self.b / &n }
    }
    fn sqrt(&self) -> Option<Self> {
        if self.b.is_zero() {
            if let Some(s) = rational_sqrt(&self.a) {
                return Some(Real2 { a: s, b: Rational::zero() });
            }
            // a = 2 c^2 gives c * sqrt(2)
            let s = rational_sqrt(&(&self.a / int(2)))?;
            return Some(Real2 { a: Rational::zero(), b: s });
        }
        let n = &self.a * &self.a - int(2) * &self.b * &self.b;
        let rn = rational_sqrt(&n)?;
        for cand in [(&self.a + &rn) / int(2), (&self.a - &rn) / int(2)] {
            if let Some(u) = rational_sqrt(&cand) {
                if u.is_zero() {
                    continue;
                }
                let v = &self.b / (int(2) * &u);
                return Some(Real2 { a: u, b: v });
            }
        }
        None
    }
}

/// Element c0 + c1*sqrt(2) + c2*i + c3*i*sqrt(2) of Q(i, sqrt 2).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldScalar {
    c: [Rational; 4],
}

impl FieldScalar {
    pub fn new(c0: Rational, c1: Rational, c2: Rational, c3: Rational) -> Self {
        FieldScalar { c: [c0, c1, c2, c3] }
    }

    pub fn from_ints(c: [i64; 4]) -> Self {
        FieldScalar { c: c.map(int) }
    }

    pub fn from_rational(r: Rational) -> Self {
        FieldScalar::new(r, Rational::zero(), Rational::zero(), Rational::zero())
    }

    pub fn zero() -> Self {
        Self::from_ints([0, 0, 0, 0])
    }

    pub fn one() -> Self {
        Self::from_ints([1, 0, 0, 0])
    }

    pub fn i() -> Self {
        Self::from_ints([0, 0, 1, 0])
    }

    pub fn sqrt2() -> Self {
        Self::from_ints([0, 1, 0, 0])
    }

    pub fn coeffs(&self) -> &[Rational; 4] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        *self == Self::one()
    }

    fn parts(&self) -> (Real2, Real2) {
        (
            Real2 { a: self.c[0].clone(), b: self.c[1].clone() },
            Real2 { a: self.c[2].clone(), b: self.c[3].clone() },
        )
    }

    fn from_parts(p: Real2, q: Real2) -> Self {
        FieldScalar { c: [p.a, p.b, q.a, q.b] }
    }

    pub fn conj_i(&self) -> Self {
        FieldScalar::new(self.c[0].clone(), self.c[1].clone(), -&self.c[2], -&self.c[3])
    }

    pub fn scale(&self, r: &Rational) -> Self {
        FieldScalar { c: [&self.c[0] * r, &self.c[1] * r, &self.c[2] * r, &self.c[3] * r] }
    }

    pub fn try_inverse(&self) -> Result<Self, Error> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (p, q) = self.parts();
        let n = p.mul(&p).add(&q.mul(&q)).inv();
        Ok(FieldScalar::from_parts(p.mul(&n), q.mul(&n).scale(&int(-1))))
    }

    /// Panics on zero; use `try_inverse` for a checked version.
    pub fn inverse(&self) -> Self {
        self.try_inverse().expect("inverse of zero")
    }

    /// An exact square root inside the field, when one exists.
    pub fn sqrt(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        let (p, q) = self.parts();
        if q.is_zero() {
            if let Some(u) = p.sqrt() {
                return Some(FieldScalar::from_parts(u, Real2::zero()));
            }
            let v = p.scale(&int(-1)).sqrt()?;
            return Some(FieldScalar::from_parts(Real2::zero(), v));
        }
        let n = p.mul(&p).add(&q.mul(&q)).sqrt()?;
        let half = rat(1, 2);
        for cand in [p.add(&n).scale(&half), p.sub(&n).scale(&half)] {
            if let Some(u) = cand.sqrt() {
                if u.is_zero() {
                    continue;
                }
                let v = q.mul(&u.scale(&int(2)).inv());
                return Some(FieldScalar::from_parts(u, v));
            }
        }
        None
    }

    pub fn to_complex(&self) -> Complex64 {
        let f = |r: &Rational| r.to_f64().unwrap_or(f64::NAN);
        let s2 = std::f64::consts::SQRT_2;
        Complex64::new(f(&self.c[0]) + s2 * f(&self.c[1]), f(&self.c[2]) + s2 * f(&self.c[3]))
    }

    /// Complex embedding with sqrt 2 -> 1.414..., i -> imaginary unit.
    /// Double precision carries at most 50 reliable bits for the values used here.
    pub fn complex_embedding(&self, precision: u32) -> Result<Complex64, Error> {
        if precision > 50 {
            return Err(Error::Unsupported(format!(
                "complex embedding limited to 50 bits, {precision} requested"
            )));
        }
        Ok(self.to_complex())
    }

    /// Four reduced fractions "n/d" in basis order.
    pub fn to_strings(&self) -> [String; 4] {
        [0, 1, 2, 3].map(|k| rat_to_string(&self.c[k]))
    }

    pub fn from_strings(s: &[&str]) -> Result<Self, Error> {
        if s.len() != 4 {
            return Err(Error::Parse("field scalar needs four fractions".into()));
        }
        Ok(FieldScalar::new(
            parse_rational(s[0])?,
            parse_rational(s[1])?,
            parse_rational(s[2])?,
            parse_rational(s[3])?,
        ))
    }
}

impl fmt::Debug for FieldScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FieldScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["", "√2", "i", "i√2"];
        let mut out = String::new();
        for (k, c) in self.c.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if k == 0 || !mag.is_one() {
                out.push_str(&mag.to_string());
            }
            out.push_str(names[k]);
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

impl Add for &FieldScalar {
    type Output = FieldScalar;
    fn add(self, o: &FieldScalar) -> FieldScalar {
        FieldScalar {
            c: [&self.c[0] + &o.c[0], &self.c[1] + &o.c[1], &self.c[2] + &o.c[2], &self.c[3] + &o.c[3]],
        }
    }
}

impl Sub for &FieldScalar {
    type Output = FieldScalar;
    fn sub(self, o: &FieldScalar) -> FieldScalar {
        FieldScalar {
            c: [&self.c[0] - &o.c[0], &self.c[1] - &o.c[1], &self.c[2] - &o.c[2], &self.c[3] - &o.c[3]],
        }
    }
}

impl Mul for &FieldScalar {
    type Output = FieldScalar;
    fn mul(self, o: &FieldScalar) -> FieldScalar {
        let (p, q) = self.parts();
        let (r, s) = o.parts();
        FieldScalar::from_parts(p.mul(&r).sub(&q.mul(&s)), p.mul(&s).add(&q.mul(&r)))
    }
}

impl Neg for &FieldScalar {
    type Output = FieldScalar;
    fn neg(self) -> FieldScalar {
        FieldScalar { c: [-&self.c[0], -&self.c[1], -&self.c[2], -&self.c[3]] }
    }
}

macro_rules! forward_owned {
    ($t:ty, $($tr:ident $m:ident),*) => {$(
        impl $tr for $t {
            type Output = $t;
            fn $m(self, o: $t) -> $t { (&self).$m(&o) }
        }
    )*
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t { -&self }
        }
    };
}

forward_owned!(FieldScalar, Add add, Sub sub, Mul mul);

/// Element x + y*sqrt(-3) with x, y in Q(i, sqrt 2); contains the cube roots of unity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtScalar {
    pub x: FieldScalar,
    pub y: FieldScalar,
}

impl ExtScalar {
    pub fn new(x: FieldScalar, y: FieldScalar) -> Self {
        ExtScalar { x, y }
    }

    pub fn from_field(x: FieldScalar) -> Self {
        ExtScalar { x, y: FieldScalar::zero() }
    }

    pub fn zero() -> Self {
        Self::from_field(FieldScalar::zero())
    }

    pub fn one() -> Self {
        Self::from_field(FieldScalar::one())
    }

    /// omega = (-1 + sqrt(-3)) / 2.
    pub fn omega() -> Self {
        ExtScalar {
            x: FieldScalar::from_rational(rat(-1, 2)),
            y: FieldScalar::from_rational(rat(1, 2)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn in_base_field(&self) -> bool {
        self.y.is_zero()
    }

    pub fn try_inverse(&self) -> Result<Self, Error> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let three = FieldScalar::from_ints([3, 0, 0, 0]);
        let n = (&(&self.x * &self.x) + &(&three * &(&self.y * &self.y))).inverse();
        Ok(ExtScalar { x: &self.x * &n, y: -&(&self.y * &n) })
    }

    pub fn inverse(&self) -> Self {
        self.try_inverse().expect("inverse of zero")
    }

    pub fn sqrt(&self) -> Option<Self> {
        if self.y.is_zero() {
            if let Some(u) = self.x.sqrt() {
                return Some(Self::from_field(u));
            }
            // x = -3 v^2 gives v * sqrt(-3)
            let v = (&self.x * &FieldScalar::from_rational(rat(-1, 3))).sqrt()?;
            return Some(ExtScalar { x: FieldScalar::zero(), y: v });
        }
        let three = FieldScalar::from_ints([3, 0, 0, 0]);
        let n = (&(&self.x * &self.x) + &(&three * &(&self.y * &self.y))).sqrt()?;
        let half = rat(1, 2);
        for cand in [(&self.x + &n).scale(&half), (&self.x - &n).scale(&half)] {
            if let Some(u) = cand.sqrt() {
                if u.is_zero() {
                    continue;
                }
                let v = &self.y * &(&u * &FieldScalar::from_ints([2, 0, 0, 0])).inverse();
                return Some(ExtScalar { x: u, y: v });
            }
        }
        None
    }

    pub fn to_complex(&self) -> Complex64 {
        self.x.to_complex() + self.y.to_complex() * Complex64::new(0.0, 3f64.sqrt())
    }
}

impl fmt::Debug for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.y.is_zero() {
            write!(f, "{}", self.x)
        } else {
            write!(f, "({}) + ({})√-3", self.x, self.y)
        }
    }
}

impl Add for &ExtScalar {
    type Output = ExtScalar;
    fn add(self, o: &ExtScalar) -> ExtScalar {
        ExtScalar { x: &self.x + &o.x, y: &self.y + &o.y }
    }
}

impl Sub for &ExtScalar {
    type Output = ExtScalar;
    fn sub(self, o: &ExtScalar) -> ExtScalar {
        ExtScalar { x: &self.x - &o.x, y: &self.y - &o.y }
    }
}

impl Mul for &ExtScalar {
    type Output = ExtScalar;
    fn mul(self, o: &ExtScalar) -> ExtScalar {
        let three = FieldScalar::from_ints([3, 0, 0, 0]);
        ExtScalar {
            x: &(&self.x * &o.x) - &(&three * &(&self.y * &o.y)),
            y: &(&self.x * &o.y) + &(&self.y * &o.x),
        }
    }
}

impl Neg for &ExtScalar {
    type Output = ExtScalar;
    fn neg(self) -> ExtScalar {
        ExtScalar { x: -&self.x, y: -&self.y }
    }
}

forward_owned!(ExtScalar, Add add, Sub sub, Mul mul);

/// The unit i^ipow * sqrt(2)^r2; every scale of a group element has this shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitScale {
    pub ipow: u8,
    pub r2: i8,
}

impl UnitScale {
    pub const ONE: UnitScale = UnitScale { ipow: 0, r2: 0 };

    pub fn new(ipow: i32, r2: i32) -> Self {
        UnitScale { ipow: ipow.rem_euclid(4) as u8, r2: r2 as i8 }
    }

    pub fn mul(self, o: UnitScale) -> UnitScale {
        UnitScale { ipow: (self.ipow + o.ipow) % 4, r2: self.r2 + o.r2 }
    }

    pub fn inv(self) -> UnitScale {
        UnitScale { ipow: (4 - self.ipow) % 4, r2: -self.r2 }
    }

    pub fn to_field(self) -> FieldScalar {
        let mut mag = Rational::one();
        let half = self.r2.div_euclid(2) as i32;
        let two = int(2);
        for _ in 0..half.abs() {
            mag = if half > 0 { mag * &two } else { mag / &two };
        }
        let odd = self.r2.rem_euclid(2) == 1;
        let base = if odd { FieldScalar::sqrt2() } else { FieldScalar::one() };
        let unit = match self.ipow {
            0 => FieldScalar::one(),
            1 => FieldScalar::i(),
            2 => FieldScalar::from_ints([-1, 0, 0, 0]),
            _ => FieldScalar::from_ints([0, 0, -1, 0]),
        };
        (&base * &unit).scale(&mag)
    }

    /// Recognizes i^a * sqrt(2)^b; `None` for any other field element.
    pub fn from_field(s: &FieldScalar) -> Option<UnitScale> {
        let nz: Vec<usize> = (0..4).filter(|&k| !s.c[k].is_zero()).collect();
        if nz.len() != 1 {
            return None;
        }
        let k = nz[0];
        let v = &s.c[k];
        let ipow = match (k >= 2, v.is_negative()) {
            (false, false) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (true, true) => 3,
        };
        let mag = v.abs();
        let (n, d) = (mag.numer().clone(), mag.denom().clone());
        let pow2 = |x: &BigInt| -> Option<i32> {
            let bits = x.bits();
            (x.is_positive() && *x == BigInt::one() << (bits - 1)).then(|| bits as i32 - 1)
        };
        let e = pow2(&n)? - pow2(&d)?;
        let r2 = 2 * e + (k % 2) as i32;
        if r2.abs() > 100 {
            return None;
        }
        Some(UnitScale::new(ipow, r2))
    }
}
