//! Exact rational arithmetic used for all time, utilization and share values.
//!
//! `Rat` is an arbitrary-precision rational kept in lowest terms with a
//! positive denominator. Values whose reduced numerator and denominator fit
//! in `i64` are stored inline; anything larger transparently falls back to
//! big integers. All operations are exact — there is no rounding anywhere.

use alloc::boxed::Box;
use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use core::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Clone)]
enum Repr {
    /// Reduced, `den > 0`.
    Small(i64, i64),
    /// Reduced, `den > 0`, and does not fit `Small`.
    Big(Box<(BigInt, BigInt)>),
}

/// An exact rational number.
#[derive(Clone)]
pub struct Rat(Repr);

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rat {
    pub fn zero() -> Rat {
        Rat(Repr::Small(0, 1))
    }

    pub fn one() -> Rat {
        Rat(Repr::Small(1, 1))
    }

    pub fn from_int(n: i64) -> Rat {
        Rat(Repr::Small(n, 1))
    }

    /// Builds `num/den`. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Rat {
        assert!(den != 0, "Rat with zero denominator");
        Rat::from_i128(num as i128, den as i128)
    }

    fn from_i128(num: i128, den: i128) -> Rat {
        debug_assert!(den != 0);
        let (mut n, mut d) = if den < 0 { (-num, -den) } else { (num, den) };
        if n == 0 {
            return Rat::zero();
        }
        let g = gcd_i128(n, d);
        n /= g;
        d /= g;
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Rat(Repr::Small(n, d)),
            _ => Rat(Repr::Big(Box::new((BigInt::from(n), BigInt::from(d))))),
        }
    }

    pub fn from_bigint(num: BigInt, den: BigInt) -> Rat {
        assert!(!den.is_zero(), "Rat with zero denominator");
        let (num, den) = if den.is_negative() { (-num, -den) } else { (num, den) };
        if num.is_zero() {
            return Rat::zero();
        }
        let g = num.gcd(&den);
        let n = num / &g;
        let d = den / g;
        match (n.to_i64(), d.to_i64()) {
            (Some(n), Some(d)) => Rat(Repr::Small(n, d)),
            _ => Rat(Repr::Big(Box::new((n, d)))),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(b) => b.0.clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(b) => b.1.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(b) => b.0.is_negative(),
        }
    }

    pub fn is_positive(&self) -> bool {
        !self.is_zero() && !self.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(b) => b.1 == BigInt::from(1),
        }
    }

    /// Largest integer `<= self`, as a `Rat`.
    pub fn floor(&self) -> Rat {
        match &self.0 {
            Repr::Small(n, d) => Rat(Repr::Small(n.div_euclid(*d), 1)),
            Repr::Big(b) => Rat::from_bigint(b.0.div_floor(&b.1), BigInt::from(1)),
        }
    }

    /// Smallest integer `>= self`, as a `Rat`.
    pub fn ceil(&self) -> Rat {
        match &self.0 {
            Repr::Small(n, d) => {
                Rat(Repr::Small(n.div_euclid(*d) + i64::from(n.rem_euclid(*d) != 0), 1))
            }
            Repr::Big(b) => Rat::from_bigint(b.0.div_ceil(&b.1), BigInt::from(1)),
        }
    }

    /// `floor(self)` as an `i64`, when it fits.
    pub fn floor_i64(&self) -> Option<i64> {
        match self.floor().0 {
            Repr::Small(n, 1) => Some(n),
            _ => None,
        }
    }

    pub fn ceil_i64(&self) -> Option<i64> {
        match self.ceil().0 {
            Repr::Small(n, 1) => Some(n),
            _ => None,
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        match self.0 {
            Repr::Small(n, 1) => Some(n),
            _ => None,
        }
    }

    /// Nearest `f64`; only for reporting, never fed back into exact paths.
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(n, d) => *n as f64 / *d as f64,
            Repr::Big(b) => {
                let n = b.0.to_f64().unwrap_or(f64::NAN);
                let d = b.1.to_f64().unwrap_or(f64::NAN);
                n / d
            }
        }
    }

    pub fn abs(&self) -> Rat {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn min(self, other: Rat) -> Rat {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Rat) -> Rat {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn recip(&self) -> Rat {
        assert!(!self.is_zero(), "Rat division by zero");
        match &self.0 {
            Repr::Small(n, d) => Rat::from_i128(*d as i128, *n as i128),
            Repr::Big(b) => Rat::from_bigint(b.1.clone(), b.0.clone()),
        }
    }

    fn add_impl(&self, rhs: &Rat, sub: bool) -> Rat {
        if let (Repr::Small(n1, d1), Repr::Small(n2, d2)) = (&self.0, &rhs.0) {
            let n2 = if sub { -(*n2 as i128) } else { *n2 as i128 };
            let a = *n1 as i128 * *d2 as i128;
            let b = n2 * *d1 as i128;
            if let Some(n) = a.checked_add(b) {
                return Rat::from_i128(n, *d1 as i128 * *d2 as i128);
            }
        }
        let (n1, d1) = (self.numer(), self.denom());
        let (n2, d2) = (rhs.numer(), rhs.denom());
        let n2 = if sub { -n2 } else { n2 };
        Rat::from_bigint(n1 * &d2 + n2 * &d1, d1 * d2)
    }

    fn mul_impl(&self, rhs: &Rat) -> Rat {
        if let (Repr::Small(n1, d1), Repr::Small(n2, d2)) = (&self.0, &rhs.0) {
            return Rat::from_i128(
                *n1 as i128 * *n2 as i128,
                *d1 as i128 * *d2 as i128,
            );
        }
        Rat::from_bigint(self.numer() * rhs.numer(), self.denom() * rhs.denom())
    }
}

impl PartialEq for Rat {
    fn eq(&self, other: &Rat) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Rat {}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Rat) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Rat) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(n1, d1), Repr::Small(n2, d2)) => {
                (*n1 as i128 * *d2 as i128).cmp(&(*n2 as i128 * *d1 as i128))
            }
            _ => (self.numer() * other.denom()).cmp(&(other.numer() * self.denom())),
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $impl_fn:ident $(, $extra:expr)?) => {
        impl<'a> $trait<&'a Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                self.$impl_fn(rhs $(, $extra)?)
            }
        }
        impl $trait<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                (&self).$method(rhs)
            }
        }
        impl $trait<Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_impl, false);
forward_binop!(Sub, sub, add_impl, true);
forward_binop!(Mul, mul, mul_impl);

impl<'a> Div<&'a Rat> for &Rat {
    type Output = Rat;
    fn div(self, rhs: &'a Rat) -> Rat {
        self.mul_impl(&rhs.recip())
    }
}
impl Div<Rat> for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        (&self).div(&rhs)
    }
}
impl<'a> Div<&'a Rat> for Rat {
    type Output = Rat;
    fn div(self, rhs: &'a Rat) -> Rat {
        (&self).div(rhs)
    }
}
impl Div<Rat> for &Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        self.div(&rhs)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        match &self.0 {
            Repr::Small(n, d) => Rat::from_i128(-(*n as i128), *d as i128),
            Repr::Big(b) => Rat::from_bigint(-b.0.clone(), b.1.clone()),
        }
    }
}
impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        -&self
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        *self = &*self + rhs;
    }
}
impl AddAssign<Rat> for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        *self = &*self + &rhs;
    }
}
impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        *self = &*self - rhs;
    }
}
impl SubAssign<Rat> for Rat {
    fn sub_assign(&mut self, rhs: Rat) {
        *self = &*self - &rhs;
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Rat {
        Rat::from_int(n)
    }
}
impl From<u32> for Rat {
    fn from(n: u32) -> Rat {
        Rat::from_int(n as i64)
    }
}

impl core::iter::Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        let mut acc = Rat::zero();
        for x in iter {
            acc += x;
        }
        acc
    }
}
impl<'a> core::iter::Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        let mut acc = Rat::zero();
        for x in iter {
            acc += x;
        }
        acc
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(b) if b.1 == BigInt::from(1) => write!(f, "{}", b.0),
            Repr::Big(b) => write!(f, "{}/{}", b.0, b.1),
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Failure to parse a rational literal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRatError(pub String);

impl fmt::Display for ParseRatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational literal `{}`", self.0)
    }
}

impl FromStr for Rat {
    type Err = ParseRatError;

    /// Accepts `-3`, `7/20` and decimal fractions like `0.25` (parsed
    /// exactly as 25/100).
    fn from_str(s: &str) -> Result<Rat, ParseRatError> {
        let err = || ParseRatError(String::from(s));
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(Rat::from_bigint(n, d))
        } else if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            let neg = int.trim_start().starts_with('-');
            let int: BigInt = if int.is_empty() || int == "-" {
                BigInt::from(0)
            } else {
                int.parse().map_err(|_| err())?
            };
            let fnum: BigInt = frac.parse().map_err(|_| err())?;
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            let num = &int * &scale + if neg { -fnum } else { fnum };
            Ok(Rat::from_bigint(num, scale))
        } else {
            let n: BigInt = s.parse().map_err(|_| err())?;
            Ok(Rat::from_bigint(n, BigInt::from(1)))
        }
    }
}
