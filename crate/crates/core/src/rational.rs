//! Exact rationals with an inline machine-word representation.
//!
//! A value is stored as `Small { num: i64, den: u64 }` whenever its lowest-terms
//! form fits, and as a boxed [`BigRational`] otherwise. The representation is
//! canonical, so structural equality is value equality.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone)]
enum Repr {
    // den > 0, gcd(|num|, den) = 1
    Small { num: i64, den: u64 },
    // never representable as Small
    Big(Box<BigRational>),
}

/// An exact rational number in lowest terms with positive denominator.
#[derive(Clone)]
pub struct Rational(Repr);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RationalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    if a <= u64::MAX as u128 && b <= u64::MAX as u128 {
        return gcd_u64(a as u64, b as u64) as u128;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

impl Rational {
    #[inline]
    pub fn zero() -> Self {
        Rational(Repr::Small { num: 0, den: 1 })
    }

    #[inline]
    pub fn one() -> Self {
        Rational(Repr::Small { num: 1, den: 1 })
    }

    #[inline]
    pub fn from_integer(n: i64) -> Self {
        Rational(Repr::Small { num: n, den: 1 })
    }

    /// `sign / den` with `den > 0`; the fast path for harmonic-type terms.
    #[inline]
    pub fn unit(negative: bool, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        Rational(Repr::Small {
            num: if negative { -1 } else { 1 },
            den,
        })
    }

    /// `num / den`, reduced. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let n = num as i128 * den.signum() as i128;
        Self::from_i128(n, den.unsigned_abs() as u128)
    }

    /// `num / den`, reduced. Panics if `den == 0`.
    pub fn from_i128(num: i128, den: u128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd_u128(num.unsigned_abs(), den);
        let (n, d) = if g > 1 {
            (num / g as i128, den / g)
        } else {
            (num, den)
        };
        if let (Ok(n), Ok(d)) = (i64::try_from(n), u64::try_from(d)) {
            return Rational(Repr::Small { num: n, den: d });
        }
        Rational(Repr::Big(Box::new(BigRational::new_raw(
            BigInt::from(n),
            BigInt::from(d),
        ))))
    }

    pub fn from_big(r: BigRational) -> Self {
        // BigRational::new reduces; new_raw values are normalised here too.
        let r = if r.denom().is_negative() || !r.numer().gcd(r.denom()).is_one() {
            BigRational::new(r.numer().clone(), r.denom().clone())
        } else {
            r
        };
        if let (Some(n), Some(d)) = (r.numer().to_i64(), r.denom().to_u64()) {
            return Rational(Repr::Small { num: n, den: d });
        }
        Rational(Repr::Big(Box::new(r)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Self::from_big(BigRational::from_integer(n))
    }

    /// `num / den` from arbitrary-precision parts, reduced.
    pub fn from_bigints(num: BigInt, den: BigInt) -> Result<Self, RationalError> {
        if den.is_zero() {
            return Err(RationalError::DivisionByZero);
        }
        Ok(Self::from_big(BigRational::new(num, den)))
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small { num, den } => {
                BigRational::new_raw(BigInt::from(*num), BigInt::from(*den))
            }
            Repr::Big(b) => (**b).clone(),
        }
    }

    /// The small parts if the value is held inline.
    #[inline]
    pub fn as_small(&self) -> Option<(i64, u64)> {
        match self.0 {
            Repr::Small { num, den } => Some((num, den)),
            Repr::Big(_) => None,
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small { num, .. } => BigInt::from(*num),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigUint {
        match &self.0 {
            Repr::Small { den, .. } => BigUint::from(*den),
            Repr::Big(b) => b.denom().magnitude().clone(),
        }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small { num: 0, .. })
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small { den, .. } => *den == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    #[inline]
    pub fn signum(&self) -> i32 {
        match &self.0 {
            Repr::Small { num, .. } => num.signum() as i32,
            Repr::Big(b) => match b.numer().sign() {
                Sign::Minus => -1,
                Sign::NoSign => 0,
                Sign::Plus => 1,
            },
        }
    }

    #[inline]
    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    #[inline]
    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Result<Self, RationalError> {
        match &self.0 {
            Repr::Small { num: 0, .. } => Err(RationalError::DivisionByZero),
            Repr::Small { num, den } => {
                let n = if *num < 0 {
                    -(*den as i128)
                } else {
                    *den as i128
                };
                Ok(Self::from_i128(n, num.unsigned_abs() as u128))
            }
            Repr::Big(b) => Ok(Self::from_big(b.recip())),
        }
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Self, RationalError> {
        Ok(self * &rhs.recip()?)
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        match &self.0 {
            Repr::Small { num, den } => BigInt::from((*num as i128).div_euclid(*den as i128)),
            Repr::Big(b) => b.floor().to_integer(),
        }
    }

    /// Smallest integer not below the value.
    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Rational::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Approximate value, for annotations only.
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small { num, den } => *num as f64 / *den as f64,
            Repr::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Decimal rendering with `places` digits after the point, rounded half away from zero.
    pub fn to_decimal(&self, places: usize) -> String {
        let scale = BigInt::from(10u32).pow(places as u32);
        let num = self.numer().abs() * &scale;
        let den = BigInt::from(self.denom());
        let (q, r) = num.div_rem(&den);
        let q = if r * 2u32 >= den { q + 1u32 } else { q };
        let digits = q.to_string();
        let (int_part, frac_part) = if places == 0 {
            (digits, String::new())
        } else if digits.len() > places {
            let (a, b) = digits.split_at(digits.len() - places);
            (a.to_string(), b.to_string())
        } else {
            (
                "0".to_string(),
                format!("{:0>width$}", digits, width = places),
            )
        };
        let negative =
            self.is_negative() && (int_part != "0" || frac_part.chars().any(|c| c != '0'));
        let sign = if negative { "-" } else { "" };
        if places == 0 {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        }
    }

    fn add_ref(&self, rhs: &Rational) -> Rational {
        if let (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) = (&self.0, &rhs.0)
        {
            if *a == 0 {
                return rhs.clone();
            }
            if *c == 0 {
                return self.clone();
            }
            if b == d {
                return Self::from_i128(*a as i128 + *c as i128, *b as u128);
            }
            let lhs = *a as i128 * *d as i128;
            let rhs2 = *c as i128 * *b as i128;
            if let Some(n) = lhs.checked_add(rhs2) {
                return Self::from_i128(n, *b as u128 * *d as u128);
            }
        }
        Self::from_big(self.to_big() + rhs.to_big())
    }

    fn mul_ref(&self, rhs: &Rational) -> Rational {
        if let (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) = (&self.0, &rhs.0)
        {
            if *a == 0 || *c == 0 {
                return Rational::zero();
            }
            return Self::from_i128(*a as i128 * *c as i128, *b as u128 * *d as u128);
        }
        Self::from_big(self.to_big() * rhs.to_big())
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Rational::from_integer(n as i64)
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Rational::from_i128(n as i128, 1)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_bigint(n)
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => a == c && b == d,
            (Repr::Big(x), Repr::Big(y)) => x == y,
            _ => false,
        }
    }
}

impl Eq for Rational {}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small { num, den } => {
                0u8.hash(state);
                num.hash(state);
                den.hash(state);
            }
            Repr::Big(b) => {
                1u8.hash(state);
                b.hash(state);
            }
        }
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) =
            (&self.0, &other.0)
        {
            return (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128));
        }
        self.to_big().cmp(&other.to_big())
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match &self.0 {
            Repr::Small { num, den } => match num.checked_neg() {
                Some(n) => Rational(Repr::Small { num: n, den: *den }),
                None => Rational::from_big(-self.to_big()),
            },
            Repr::Big(b) => Rational::from_big(-(**b).clone()),
        }
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                let f: fn(&Rational, &Rational) -> Rational = $body;
                f(self, rhs)
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                (&self).$m(rhs)
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.add_ref(b));
binop!(Sub, sub, |a, b| a.add_ref(&-b));
binop!(Mul, mul, |a, b| a.mul_ref(b));
binop!(Div, div, |a, b| a
    .checked_div(b)
    .expect("division by zero rational"));

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        *self = self.add_ref(rhs);
    }
}

impl AddAssign<Rational> for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        *self = self.add_ref(&rhs);
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        *self = self.add_ref(&-rhs);
    }
}

impl SubAssign<Rational> for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        *self = self.add_ref(&-rhs);
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        let mut acc = ExactSum::new();
        for x in iter {
            acc.add(&x);
        }
        acc.value()
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        let mut acc = ExactSum::new();
        for x in iter {
            acc.add(x);
        }
        acc.value()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small { num, den: 1 } => write!(f, "{num}"),
            Repr::Small { num, den } => write!(f, "{num}/{den}"),
            Repr::Big(b) if b.is_integer() => write!(f, "{}", b.numer()),
            Repr::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = RationalError;

    /// Accepts `p`, `p/q` and finite decimals such as `-0.125`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || RationalError::Parse(s.to_string());
        let t = s.trim();
        if t.is_empty() {
            return Err(err());
        }
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| err())?;
            let q: BigInt = q.trim().parse().map_err(|_| err())?;
            return Rational::from_bigints(p, q).map_err(|_| err());
        }
        if let Some((ip, fp)) = t.split_once('.') {
            if fp.is_empty() || !fp.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            let negative = ip.starts_with('-');
            let ip = ip.trim_start_matches(['-', '+']);
            if !ip.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            let digits: BigInt = format!("{}{}", if ip.is_empty() { "0" } else { ip }, fp)
                .parse()
                .map_err(|_| err())?;
            let den = BigInt::from(10u32).pow(fp.len() as u32);
            let num = if negative { -digits } else { digits };
            return Rational::from_bigints(num, den).map_err(|_| err());
        }
        let n: BigInt = t.parse().map_err(|_| err())?;
        Ok(Rational::from_bigint(n))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Exact running sum that batches machine-word additions before touching
/// arbitrary-precision arithmetic.
///
/// The big part keeps an unreduced denominator; reduction happens once in
/// [`ExactSum::value`].
#[derive(Clone, Debug, Default)]
pub struct ExactSum {
    // reduced, den > 0
    small_num: i128,
    small_den: u128,
    big: Option<(BigInt, BigInt)>,
}

impl ExactSum {
    pub fn new() -> Self {
        ExactSum {
            small_num: 0,
            small_den: 1,
            big: None,
        }
    }

    pub fn add(&mut self, x: &Rational) {
        if let Some((n, d)) = x.as_small() {
            if n == 0 {
                return;
            }
            if self.try_add_small(n as i128, d as u128) {
                return;
            }
            self.flush();
            self.small_num = n as i128;
            self.small_den = d as u128;
            return;
        }
        self.flush();
        let b = x.to_big();
        self.add_big(b.numer().clone(), b.denom().clone());
    }

    fn try_add_small(&mut self, n: i128, d: u128) -> bool {
        let (a, b) = (self.small_num, self.small_den);
        if a == 0 {
            self.small_num = n;
            self.small_den = d;
            return true;
        }
        let g = gcd_u128(b, d);
        let (bg, dg) = (b / g, d / g);
        let lhs = match i128::try_from(dg).ok().and_then(|dg| a.checked_mul(dg)) {
            Some(v) => v,
            None => return false,
        };
        let rhs = match i128::try_from(bg).ok().and_then(|bg| n.checked_mul(bg)) {
            Some(v) => v,
            None => return false,
        };
        let num = match lhs.checked_add(rhs) {
            Some(v) => v,
            None => return false,
        };
        let den = match b.checked_mul(dg) {
            Some(v) => v,
            None => return false,
        };
        let h = gcd_u128(num.unsigned_abs(), den);
        let (num, den) = if h > 1 {
            (num / h as i128, den / h)
        } else {
            (num, den)
        };
        if den > (1u128 << 126) {
            return false;
        }
        self.small_num = num;
        self.small_den = den;
        true
    }

    fn add_big(&mut self, n: BigInt, d: BigInt) {
        match self.big.take() {
            None => self.big = Some((n, d)),
            Some((bn, bd)) => {
                let g = bd.gcd(&d);
                let dg = &d / &g;
                let num = bn * &dg + n * (&bd / &g);
                let den = bd * dg;
                self.big = Some((num, den));
            }
        }
    }

    fn flush(&mut self) {
        if self.small_num != 0 {
            let n = BigInt::from(self.small_num);
            let d = BigInt::from(self.small_den);
            self.add_big(n, d);
        }
        self.small_num = 0;
        self.small_den = 1;
    }

    pub fn value(&self) -> Rational {
        let small = Rational::from_i128(self.small_num, self.small_den);
        match &self.big {
            None => small,
            Some((n, d)) => {
                let b = Rational::from_big(BigRational::new(n.clone(), d.clone()));
                b + small
            }
        }
    }
}
