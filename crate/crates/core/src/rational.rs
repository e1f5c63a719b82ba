//! Exact rational numbers.
//!
//! `Q` keeps values that fit in a pair of `i64` in a fixed-size
//! representation and computes on them in `i128`; anything larger is
//! promoted to [`BigRational`]. Results are always reduced, so equality is
//! structural on the canonical form.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone)]
enum Repr {
    /// Reduced, `den > 0`.
    Small(i64, i64),
    /// Only used when the value does not fit `Small`.
    Big(BigRational),
}

/// An exact rational number.
#[derive(Clone)]
pub struct Q(Repr);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(String);

impl Q {
    pub fn zero() -> Self {
        Q(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        Q(Repr::Small(1, 1))
    }

    pub fn from_int(v: i64) -> Self {
        Q(Repr::Small(v, 1))
    }

    /// `num/den`, reduced. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_i128(num as i128, den as i128)
    }

    fn from_i128(num: i128, den: i128) -> Self {
        debug_assert!(den != 0);
        let g = num.gcd(&den);
        let (mut n, mut d) = if g > 1 { (num / g, den / g) } else { (num, den) };
        if d < 0 {
            n = -n;
            d = -d;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Q(Repr::Small(n, d)),
            _ => Q(Repr::Big(BigRational::new_raw(BigInt::from(n), BigInt::from(d)))),
        }
    }

    fn from_big(r: BigRational) -> Self {
        // BigRational arithmetic already returns reduced values.
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Q(Repr::Small(n, d)),
            _ => Q(Repr::Big(r)),
        }
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(r) => r.clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n > 0,
            Repr::Big(r) => r.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(r) => r.is_negative(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(r) => r.is_integer(),
        }
    }

    pub fn abs(&self) -> Q {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Q {
        assert!(!self.is_zero(), "reciprocal of zero");
        match &self.0 {
            Repr::Small(n, d) => Self::from_i128(*d as i128, *n as i128),
            Repr::Big(r) => Self::from_big(r.recip()),
        }
    }

    pub fn min(self, other: Q) -> Q {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Q) -> Q {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Lossy conversion for human-readable output only.
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(n, d) => *n as f64 / *d as f64,
            Repr::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Canonical `p/q` rendering; integers are written with denominator 1.
    pub fn to_pq(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

impl Default for Q {
    fn default() -> Self {
        Q::zero()
    }
}

impl From<i64> for Q {
    fn from(v: i64) -> Self {
        Q::from_int(v)
    }
}

impl From<i32> for Q {
    fn from(v: i32) -> Self {
        Q::from_int(v as i64)
    }
}

impl From<usize> for Q {
    fn from(v: usize) -> Self {
        match i64::try_from(v) {
            Ok(v) => Q::from_int(v),
            Err(_) => Q::from_big(BigRational::from_integer(BigInt::from(v))),
        }
    }
}

impl Zero for Q {
    fn zero() -> Self {
        Q::zero()
    }
    fn is_zero(&self) -> bool {
        Q::is_zero(self)
    }
}

impl One for Q {
    fn one() -> Self {
        Q::one()
    }
}

impl PartialEq for Q {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => a == c && b == d,
            // Canonical forms: a Big never equals a Small.
            (Repr::Big(a), Repr::Big(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Q {}

impl std::hash::Hash for Q {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(n, d) => {
                n.hash(state);
                d.hash(state);
            }
            Repr::Big(r) => r.hash(state),
        }
    }
}

impl Ord for Q {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => ((*a as i128) * (*d as i128)).cmp(&((*c as i128) * (*b as i128))),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Q {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn add_ref(x: &Q, y: &Q) -> Q {
    match (&x.0, &y.0) {
        (Repr::Small(a, b), Repr::Small(c, d)) => {
            if b == d {
                Q::from_i128(*a as i128 + *c as i128, *b as i128)
            } else {
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                // |a*d|, |c*b| < 2^126, so the sum cannot overflow.
                Q::from_i128(a * d + c * b, b * d)
            }
        }
        _ => Q::from_big(x.to_big() + y.to_big()),
    }
}

fn mul_ref(x: &Q, y: &Q) -> Q {
    match (&x.0, &y.0) {
        (Repr::Small(a, b), Repr::Small(c, d)) => Q::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128),
        _ => Q::from_big(x.to_big() * y.to_big()),
    }
}

fn neg_ref(x: &Q) -> Q {
    match &x.0 {
        Repr::Small(n, d) if *n != i64::MIN => Q(Repr::Small(-n, *d)),
        _ => Q::from_big(-x.to_big()),
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl<'a, 'b> $tr<&'b Q> for &'a Q {
            type Output = Q;
            fn $method(self, rhs: &'b Q) -> Q {
                $body(self, rhs)
            }
        }
        impl<'a> $tr<Q> for &'a Q {
            type Output = Q;
            fn $method(self, rhs: Q) -> Q {
                $body(self, &rhs)
            }
        }
        impl<'b> $tr<&'b Q> for Q {
            type Output = Q;
            fn $method(self, rhs: &'b Q) -> Q {
                $body(&self, rhs)
            }
        }
        impl $tr<Q> for Q {
            type Output = Q;
            fn $method(self, rhs: Q) -> Q {
                $body(&self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Mul, mul, mul_ref);
forward_binop!(Sub, sub, |x: &Q, y: &Q| add_ref(x, &neg_ref(y)));
forward_binop!(Div, div, |x: &Q, y: &Q| mul_ref(x, &y.recip()));

impl Neg for Q {
    type Output = Q;
    fn neg(self) -> Q {
        neg_ref(&self)
    }
}

impl Neg for &Q {
    type Output = Q;
    fn neg(self) -> Q {
        neg_ref(self)
    }
}

impl AddAssign<&Q> for Q {
    fn add_assign(&mut self, rhs: &Q) {
        *self = add_ref(self, rhs);
    }
}

impl AddAssign<Q> for Q {
    fn add_assign(&mut self, rhs: Q) {
        *self = add_ref(self, &rhs);
    }
}

impl SubAssign<&Q> for Q {
    fn sub_assign(&mut self, rhs: &Q) {
        *self = add_ref(self, &neg_ref(rhs));
    }
}

impl SubAssign<Q> for Q {
    fn sub_assign(&mut self, rhs: Q) {
        *self = add_ref(self, &neg_ref(&rhs));
    }
}

impl Sum for Q {
    fn sum<I: Iterator<Item = Q>>(iter: I) -> Q {
        iter.fold(Q::zero(), |acc, v| acc + v)
    }
}

impl<'a> Sum<&'a Q> for Q {
    fn sum<I: Iterator<Item = &'a Q>>(iter: I) -> Q {
        iter.fold(Q::zero(), |acc, v| acc + v)
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(r) => write!(f, "{r}"),
        }
    }
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Q {
    type Err = ParseRationalError;

    /// Accepts `p`, `p/q` and `-p/q` with decimal integers.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        let (num, den) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let num: BigInt = num.parse().map_err(|_| err())?;
        let den: BigInt = den.parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        Ok(Q::from_big(BigRational::new(num, den)))
    }
}

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_pq())
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// Shorthand for `Q::new(num, den)`.
pub fn q(num: i64, den: i64) -> Q {
    Q::new(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn reduces_and_normalizes_sign() {
        assert_eq!(q(2, 4), q(1, 2));
        assert_eq!(q(3, -6), q(-1, 2));
        assert_eq!(q(0, -5), Q::zero());
        assert_eq!(q(6, 3).to_pq(), "2/1");
        assert_eq!(q(-4, 6).to_pq(), "-2/3");
    }

    #[test]
    fn promotes_on_overflow_and_demotes_back() {
        let huge = Q::from_int(i64::MAX);
        let sum = &huge + &huge;
        assert!(matches!(sum.0, Repr::Big(_)));
        assert_eq!(sum.to_pq(), format!("{}/1", 2 * (i64::MAX as i128)));
        let back = &sum - &huge;
        assert!(matches!(back.0, Repr::Small(_, _)));
        assert_eq!(back, huge);
        let tiny = q(1, i64::MAX);
        let prod = &tiny * &tiny;
        assert!(prod.is_positive());
        assert_eq!(&prod * &Q::from_int(i64::MAX), tiny);
        assert_eq!(-Q::from_int(i64::MIN), &Q::from_int(i64::MAX) + &Q::one());
    }

    #[test]
    fn parses_pq_and_integers() {
        assert_eq!("3/4".parse::<Q>().unwrap(), q(3, 4));
        assert_eq!("-6/8".parse::<Q>().unwrap(), q(-3, 4));
        assert_eq!("7".parse::<Q>().unwrap(), Q::from_int(7));
        assert!("1/0".parse::<Q>().is_err());
        assert!("x/2".parse::<Q>().is_err());
    }

    #[test]
    fn serde_uses_pq_strings() {
        let v = vec![q(1, 2), Q::from_int(3)];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"["1/2","3/1"]"#);
        let back: Vec<Q> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    proptest! {
        #[test]
        fn agrees_with_bigrational(a in any::<i64>(), b in 1i64..=i64::MAX,
                                   c in any::<i64>(), d in 1i64..=i64::MAX) {
            let (x, y) = (q(a, b), q(c, d));
            let (bx, by) = (big(a, b), big(c, d));
            prop_assert_eq!((&x + &y).to_big(), &bx + &by);
            prop_assert_eq!((&x - &y).to_big(), &bx - &by);
            prop_assert_eq!((&x * &y).to_big(), &bx * &by);
            if c != 0 {
                prop_assert_eq!((&x / &y).to_big(), &bx / &by);
            }
            prop_assert_eq!(x.cmp(&y), bx.cmp(&by));
            prop_assert_eq!(x.to_pq().parse::<Q>().unwrap(), x);
        }
    }
}
