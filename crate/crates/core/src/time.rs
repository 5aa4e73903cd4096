//! Simulated time. Budgets grow exponentially with word length, so time is
//! kept as an exact rational rather than a float.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(BigRational);

impl SimTime {
    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self(BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Self {
        Self(BigRational::new(p.into(), q.into()))
    }

    pub fn from_rational(q: BigRational) -> Self {
        Self(q)
    }

    /// `scale * 2^k`.
    pub fn scaled_pow2(scale: &SimTime, k: u64) -> Self {
        Self(&scale.0 * BigRational::from_integer(BigInt::from(BigUint::one() << k)))
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn into_rational(self) -> BigRational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::INFINITY)
    }

    /// Floor of log2 for positive values; used to size probe depths.
    pub fn floor_log2(&self) -> Option<i64> {
        if !self.0.is_positive() {
            return None;
        }
        let n = self.0.numer().magnitude();
        let d = self.0.denom().magnitude();
        let mut e = n.bits() as i64 - d.bits() as i64;
        // adjust so that 2^e <= n/d < 2^(e+1)
        let ge = |e: i64| -> bool {
            if e >= 0 {
                n >= &(d << e as u64)
            } else {
                &(n << (-e) as u64) >= d
            }
        };
        while !ge(e) {
            e -= 1;
        }
        while ge(e + 1) {
            e += 1;
        }
        Some(e)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SimTime({})", self.0)
    }
}

impl FromStr for SimTime {
    type Err = String;

    /// Accepts integers, `p/q`, `2^k`, `c*2^k` and finite decimals such as `0.25`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rational(s).map(Self)
    }
}

pub(crate) fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    let bad = || format!("cannot parse {s:?} as an exact number");
    if let Some((c, k)) = s.split_once("*2^") {
        let c = parse_rational(c)?;
        let k: u64 = k.trim().parse().map_err(|_| bad())?;
        return Ok(c * BigRational::from_integer(BigInt::from(BigUint::one() << k)));
    }
    if let Some(k) = s.strip_prefix("2^") {
        let k: u64 = k.trim().parse().map_err(|_| bad())?;
        return Ok(BigRational::from_integer(BigInt::from(BigUint::one() << k)));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches('-'), frac);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10u32), frac.len());
        let q = BigRational::new(n, d);
        return Ok(if neg { -q } else { q });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a SimTime> for &'a SimTime {
    type Output = SimTime;
    fn add(self, rhs: &SimTime) -> SimTime {
        SimTime(&self.0 + &rhs.0)
    }
}

impl AddAssign<&SimTime> for SimTime {
    fn add_assign(&mut self, rhs: &SimTime) {
        self.0 += &rhs.0;
    }
}

impl<'a> Sub<&'a SimTime> for &'a SimTime {
    type Output = SimTime;
    fn sub(self, rhs: &SimTime) -> SimTime {
        SimTime(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a BigRational> for &'a SimTime {
    type Output = SimTime;
    fn mul(self, rhs: &BigRational) -> SimTime {
        SimTime(&self.0 * rhs)
    }
}

impl Mul<&BigRational> for SimTime {
    type Output = SimTime;
    fn mul(self, rhs: &BigRational) -> SimTime {
        SimTime(self.0 * rhs)
    }
}

impl<'a> Sum<&'a SimTime> for SimTime {
    fn sum<I: Iterator<Item = &'a SimTime>>(iter: I) -> SimTime {
        iter.fold(SimTime::zero(), |mut acc, t| {
            acc += t;
            acc
        })
    }
}

impl Serialize for SimTime {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for SimTime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
