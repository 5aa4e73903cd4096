//! Exact dyadic rationals in `[0, 1]` and the query-word encoding.
//!
//! A query word `z_1 .. z_n` denotes `sum_i z_i * 2^(1-i)`: the first bit is
//! the units digit, so the only word starting with `1` is `"1"` itself.
//! Trailing zeros pad a word without changing its value; the word length,
//! not the value, is what timing budgets are indexed by.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DyadicError {
    #[error("value {0} lies outside [0, 1]")]
    OutOfRange(String),
    #[error("malformed query word {0:?}: only \"1\" may start with 1")]
    MalformedWord(String),
    #[error("query word contains non-binary character {0:?}")]
    NonBinary(char),
    #[error("empty query word")]
    EmptyWord,
    #[error("midpoint needs a < b, got {0} and {1}")]
    DegenerateInterval(String, String),
    #[error("the value 1 is encoded only by the one-bit word \"1\" and cannot be padded to length {0}")]
    UnpaddableOne(usize),
    #[error("{0} is not a dyadic rational")]
    NotDyadic(String),
}

/// A dyadic rational `numerator / 2^exponent` in `[0, 1]`, always stored
/// reduced (odd numerator, or zero with exponent 0).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    numerator: BigUint,
    exponent: u64,
}

impl Dyadic {
    pub fn new(numerator: impl Into<BigUint>, exponent: u64) -> Result<Self, DyadicError> {
        let numerator = numerator.into();
        if numerator > (BigUint::one() << exponent) {
            return Err(DyadicError::OutOfRange(format!("{numerator}/2^{exponent}")));
        }
        Ok(Self::reduced(numerator, exponent))
    }

    fn reduced(numerator: BigUint, exponent: u64) -> Self {
        if numerator.is_zero() {
            return Self { numerator, exponent: 0 };
        }
        let shift = numerator.trailing_zeros().unwrap_or(0).min(exponent);
        Self { numerator: numerator >> shift, exponent: exponent - shift }
    }

    pub fn zero() -> Self {
        Self { numerator: BigUint::zero(), exponent: 0 }
    }

    pub fn one() -> Self {
        Self { numerator: BigUint::one(), exponent: 0 }
    }

    /// `1 / 2^k`.
    pub fn pow2_inv(k: u64) -> Self {
        Self { numerator: BigUint::one(), exponent: k }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    /// Exponent of the reduced form.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.exponent == 0 && self.numerator.is_one()
    }

    /// Numerator over `2^depth`; `depth` must be at least the exponent.
    pub fn scaled_numerator(&self, depth: u64) -> BigUint {
        debug_assert!(depth >= self.exponent);
        &self.numerator << (depth - self.exponent)
    }

    /// Length of the shortest query word denoting this value.
    pub fn min_word_len(&self) -> usize {
        self.exponent as usize + 1
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.numerator.clone()), BigInt::from(BigUint::one() << self.exponent))
    }

    pub fn try_from_rational(q: &BigRational) -> Result<Self, DyadicError> {
        if q < &BigRational::zero() || q > &BigRational::one() {
            return Err(DyadicError::OutOfRange(q.to_string()));
        }
        let den = q.denom().magnitude();
        let k = den.trailing_zeros().unwrap_or(0);
        if den != &(BigUint::one() << k) {
            return Err(DyadicError::NotDyadic(q.to_string()));
        }
        Ok(Self::reduced(q.numer().magnitude().clone(), k))
    }

    /// Exact `(a + b) / 2`.
    pub fn midpoint(&self, other: &Self) -> Result<Self, DyadicError> {
        if self >= other {
            return Err(DyadicError::DegenerateInterval(self.to_string(), other.to_string()));
        }
        let e = self.exponent.max(other.exponent);
        let sum = self.scaled_numerator(e) + other.scaled_numerator(e);
        Ok(Self::reduced(sum, e + 1))
    }

    /// Clamp an exact rational lying anywhere into `[0, 1]`, requiring the
    /// result to be dyadic.
    pub fn clamp_from_rational(q: &BigRational) -> Result<Self, DyadicError> {
        if q.is_negative() {
            Ok(Self::zero())
        } else if q > &BigRational::one() {
            Ok(Self::one())
        } else {
            Self::try_from_rational(q)
        }
    }

    /// Value of the `i`-th binary place (1-based) of the terminating expansion.
    pub fn binary_digit(&self, i: u64) -> bool {
        if i == 0 || i > self.exponent {
            return false;
        }
        self.numerator.bit(self.exponent - i)
    }

    pub fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self.to_rational()).unwrap_or(f64::NAN)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        self.scaled_numerator(e).cmp(&other.scaled_numerator(e))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/2^{}", self.numerator, self.exponent)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({self})")
    }
}

/// Parses `p/q` (q a power of two), a plain integer 0 or 1, or `p/2^k`.
impl FromStr for Dyadic {
    type Err = DyadicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || DyadicError::NotDyadic(s.to_string());
        match s.split_once('/') {
            None => {
                let n: BigUint = s.parse().map_err(|_| bad())?;
                Self::new(n, 0)
            }
            Some((p, q)) => {
                let p: BigUint = p.trim().parse().map_err(|_| bad())?;
                let q = q.trim();
                if let Some(k) = q.strip_prefix("2^") {
                    let k: u64 = k.parse().map_err(|_| bad())?;
                    return Self::new(p, k);
                }
                let q: BigUint = q.parse().map_err(|_| bad())?;
                if q.is_zero() {
                    return Err(bad());
                }
                Self::try_from_rational(&BigRational::new(p.into(), q.into()))
            }
        }
    }
}

/// A well-formed query word: `"1"` or a non-empty bit string starting with 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QueryWord {
    bits: Vec<bool>,
}

impl QueryWord {
    pub fn from_bits(bits: Vec<bool>) -> Result<Self, DyadicError> {
        match bits.first() {
            None => Err(DyadicError::EmptyWord),
            Some(true) if bits.len() > 1 => Err(DyadicError::MalformedWord(render_bits(&bits))),
            _ => Ok(Self { bits }),
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Append `extra` trailing zeros. The word `"1"` cannot be padded.
    pub fn padded(&self, extra: usize) -> Result<Self, DyadicError> {
        if extra == 0 {
            return Ok(self.clone());
        }
        if self.bits == [true] {
            return Err(DyadicError::UnpaddableOne(1 + extra));
        }
        let mut bits = self.bits.clone();
        bits.resize(bits.len() + extra, false);
        Ok(Self { bits })
    }

    pub fn value(&self) -> Dyadic {
        word_to_dyadic(self)
    }
}

impl fmt::Display for QueryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_bits(&self.bits))
    }
}

impl fmt::Debug for QueryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QueryWord({self})")
    }
}

impl FromStr for QueryWord {
    type Err = DyadicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_bits(parse_bits(s.trim())?)
    }
}

pub fn parse_bits(s: &str) -> Result<Vec<bool>, DyadicError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(DyadicError::NonBinary(other)),
        })
        .collect()
}

pub fn render_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// `sum_{i=1..n} z_i * 2^(1-i)`.
pub fn word_to_dyadic(z: &QueryWord) -> Dyadic {
    let n = z.bits.len() as u64;
    let mut numerator = BigUint::zero();
    for &b in &z.bits {
        numerator <<= 1u32;
        if b {
            numerator += 1u32;
        }
    }
    Dyadic::reduced(numerator, n - 1)
}

/// Shortest word for `d`, padded with trailing zeros to at least `min_length`.
pub fn dyadic_to_word(d: &Dyadic, min_length: usize) -> Result<QueryWord, DyadicError> {
    if d.is_one() {
        return if min_length <= 1 { Ok(QueryWord { bits: vec![true] }) } else { Err(DyadicError::UnpaddableOne(min_length)) };
    }
    let len = d.min_word_len().max(min_length);
    let bits = (0..len as u64).map(|i| d.binary_digit(i)).collect();
    Ok(QueryWord { bits })
}
