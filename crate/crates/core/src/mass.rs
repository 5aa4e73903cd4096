//! The unknown mass as a lazily evaluated canonical binary expansion.
//!
//! Every source answers `digit_at(n)` (the n-th binary place, 1-based) and
//! `prefix(d) = floor(mu * 2^d)`. Sources whose exact value is known
//! (dyadic and rational constants) also expose it; everything else is only
//! ever observed through prefixes, which is what keeps the oracle honest.

use std::cmp::Ordering;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex};

use num_bigint::{BigInt, BigUint};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::advice::{AdviceEncoder, AdviceFunction};
use crate::dyadic::Dyadic;
use crate::schedule::Schedule;
use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MassError {
    #[error("denominator must be positive")]
    ZeroDenominator,
    #[error("rational {0}/{1} lies outside [0, 1]")]
    OutOfRange(String, String),
    #[error("run length u_{index} = {value} is invalid: blocks after the first need length >= 1")]
    EmptyBlock { index: usize, value: u64 },
    #[error("{0} is a perfect square; its root has no fractional digits")]
    PerfectSquare(u64),
    #[error("time constant must be positive")]
    NonPositiveConstant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum MassKind {
    DyadicConst,
    Rational,
    RunLengthPattern,
    AdviceEncoded,
    Adversarial,
    Custom,
}

/// Which side of the unknown mass a test mass lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `m < mu`
    Below,
    /// `m > mu`
    Above,
}

/// Produces further digits of a stream in order.
pub trait DigitGenerator: Send {
    /// Append at least one further digit (0 or 1) to `out`.
    fn extend(&mut self, out: &mut Vec<u8>);
}

enum Rule {
    Dyadic(Dyadic),
    Rational { p: BigUint, q: BigUint },
    Stream(Mutex<StreamState>),
}

struct StreamState {
    digits: Vec<u8>,
    generator: Box<dyn DigitGenerator>,
}

impl StreamState {
    fn ensure(&mut self, n: usize) {
        while self.digits.len() < n {
            let before = self.digits.len();
            self.generator.extend(&mut self.digits);
            assert!(self.digits.len() > before, "digit generator made no progress");
        }
    }
}

struct Inner {
    kind: MassKind,
    label: String,
    rule: Rule,
    deepest: AtomicU64,
}

/// An unknown mass `mu` in `[0, 1]`. Cheap to clone; clones share the digit
/// cache.
#[derive(Clone)]
pub struct MassSource {
    inner: Arc<Inner>,
}

impl fmt::Debug for MassSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MassSource").field("kind", &self.inner.kind).field("label", &self.inner.label).finish()
    }
}

impl MassSource {
    fn build(kind: MassKind, label: String, rule: Rule) -> Self {
        Self { inner: Arc::new(Inner { kind, label, rule, deepest: AtomicU64::new(0) }) }
    }

    pub fn from_dyadic(d: Dyadic) -> Self {
        Self::build(MassKind::DyadicConst, format!("dyadic:{d}"), Rule::Dyadic(d))
    }

    pub fn from_rational(p: u64, q: u64) -> Result<Self, MassError> {
        Self::from_big_rational(&BigRational::new(BigInt::from(p), BigInt::from(q.max(1)))).and_then(|s| {
            if q == 0 {
                Err(MassError::ZeroDenominator)
            } else {
                Ok(s)
            }
        })
    }

    pub fn from_big_rational(value: &BigRational) -> Result<Self, MassError> {
        if value.denom().is_zero() {
            return Err(MassError::ZeroDenominator);
        }
        if value < &BigRational::zero() || value > &BigRational::one() {
            return Err(MassError::OutOfRange(value.numer().to_string(), value.denom().to_string()));
        }
        let p = value.numer().magnitude().clone();
        let q = value.denom().magnitude().clone();
        Ok(Self::build(MassKind::Rational, format!("rational:{p}/{q}"), Rule::Rational { p, q }))
    }

    pub fn from_run_lengths(u: RunLengths) -> Result<Self, MassError> {
        u.validate_head()?;
        let kind = if matches!(u.tail, Tail::Adversarial(_)) { MassKind::Adversarial } else { MassKind::RunLengthPattern };
        let label = format!("pattern:{}", u.describe());
        Ok(Self::from_generator(kind, label, Box::new(RunLengthGenerator::new(u))))
    }

    /// `mu(f)` for a prefix advice function.
    pub fn from_advice(f: AdviceFunction) -> Self {
        let label = format!("advice:{}", f.name());
        Self::from_generator(MassKind::AdviceEncoded, label, Box::new(AdviceStream { encoder: AdviceEncoder::new(f) }))
    }

    /// A source whose n-th digit is given by a pure user rule. Purity is the
    /// caller's contract; debug builds evaluate each digit twice to audit it.
    pub fn custom<F>(label: impl Into<String>, rule: F) -> Self
    where
        F: Fn(u64) -> bool + Send + 'static,
    {
        Self::from_generator(MassKind::Custom, label.into(), Box::new(IndexedRule { next: 1, rule }))
    }

    pub fn from_generator(kind: MassKind, label: String, generator: Box<dyn DigitGenerator>) -> Self {
        Self::build(kind, label, Rule::Stream(Mutex::new(StreamState { digits: Vec::new(), generator })))
    }

    /// A pseudo-random real: digits are a fixed hash of `(seed, n)`. Uniform
    /// in distribution over seeds and non-dyadic with probability one.
    pub fn pseudo_random(seed: u64) -> Self {
        Self::custom(format!("random:{seed}"), move |n| {
            let word = splitmix64(seed ^ splitmix64((n - 1) / 64));
            (word >> ((n - 1) % 64)) & 1 == 1
        })
    }

    /// The fractional part of `sqrt(k)`, an algebraic number of order 2.
    pub fn sqrt_fraction(k: u64) -> Result<Self, MassError> {
        let r = k.sqrt();
        if r * r == k {
            return Err(MassError::PerfectSquare(k));
        }
        let kk = BigUint::from(k);
        Ok(Self::custom(format!("sqrt:{k}"), move |n| {
            let scaled = (&kk << (2 * n)).sqrt();
            scaled.bit(0)
        }))
    }

    /// `1/2 - eps/2 + s*eps` for `eps = 2^-e`: the unknown mass used to read
    /// the digits of `s` through a fixed-precision oracle.
    pub fn fixed_precision_embedding(s: &MassSource, e: u64) -> Self {
        if let Some(v) = s.exact_value() {
            let half = BigRational::new(1.into(), 2.into());
            let eps = BigRational::new(1.into(), BigInt::from(BigUint::one() << e));
            let mu = &half - &eps * &half + v * eps;
            return Self::from_big_rational(&mu).expect("embedding stays inside [0, 1]");
        }
        // mu = 0.s_1 (1-s_1)^e s_2 s_3 ...
        let inner = s.clone();
        let label = format!("embed(e={e}):{}", s.label());
        Self::from_generator(s.kind(), label, Box::new(EmbeddingStream { s: inner, e, next: 1 }))
    }

    pub fn kind(&self) -> MassKind {
        self.inner.kind
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }

    /// Deepest binary place any caller has examined so far.
    pub fn deepest_probe(&self) -> u64 {
        self.inner.deepest.load(AtomicOrdering::Relaxed)
    }

    fn note_depth(&self, d: u64) {
        self.inner.deepest.fetch_max(d, AtomicOrdering::Relaxed);
    }

    /// 1 exactly when `mu = 1`; all binary places are then zero.
    pub fn units_digit(&self) -> bool {
        match &self.inner.rule {
            Rule::Dyadic(d) => d.is_one(),
            Rule::Rational { p, q } => p == q,
            Rule::Stream(_) => false,
        }
    }

    /// The n-th binary place (1-based) of the canonical expansion.
    pub fn digit_at(&self, n: u64) -> bool {
        assert!(n >= 1, "binary places are numbered from 1");
        self.note_depth(n);
        match &self.inner.rule {
            Rule::Dyadic(d) => d.binary_digit(n),
            Rule::Rational { p, q } => ((p << n) / q).bit(0),
            Rule::Stream(state) => {
                let mut st = state.lock().expect("digit cache poisoned");
                st.ensure(n as usize);
                st.digits[n as usize - 1] == 1
            }
        }
    }

    pub fn digits(&self, n: u64) -> Vec<bool> {
        match &self.inner.rule {
            Rule::Stream(state) => {
                self.note_depth(n);
                let mut st = state.lock().expect("digit cache poisoned");
                st.ensure(n as usize);
                st.digits[..n as usize].iter().map(|&b| b == 1).collect()
            }
            _ => (1..=n).map(|i| self.digit_at(i)).collect(),
        }
    }

    /// `floor(mu * 2^d)`.
    pub fn prefix(&self, d: u64) -> BigUint {
        self.note_depth(d);
        match &self.inner.rule {
            Rule::Dyadic(x) => {
                if d >= x.exponent() {
                    x.scaled_numerator(d)
                } else {
                    x.numerator() >> (x.exponent() - d)
                }
            }
            Rule::Rational { p, q } => (p << d) / q,
            Rule::Stream(state) => {
                if d == 0 {
                    return BigUint::zero();
                }
                let mut st = state.lock().expect("digit cache poisoned");
                st.ensure(d as usize);
                BigUint::from_radix_be(&st.digits[..d as usize], 2).expect("binary digits")
            }
        }
    }

    /// True when `mu` is known to equal `prefix(d) / 2^d` exactly.
    pub fn terminates_by(&self, d: u64) -> bool {
        match &self.inner.rule {
            Rule::Dyadic(x) => x.exponent() <= d,
            Rule::Rational { p, q } => (p << d).is_multiple_of(q),
            Rule::Stream(_) => false,
        }
    }

    /// The exact value, for constant sources.
    pub fn exact_value(&self) -> Option<BigRational> {
        match &self.inner.rule {
            Rule::Dyadic(d) => Some(d.to_rational()),
            Rule::Rational { p, q } => Some(BigRational::new(p.clone().into(), q.clone().into())),
            Rule::Stream(_) => None,
        }
    }

    /// Approximate value from the first `d` places.
    pub fn approx_f64(&self, d: u64) -> f64 {
        if let Some(v) = self.exact_value() {
            return v.to_f64().unwrap_or(f64::NAN);
        }
        let p = self.prefix(d);
        BigRational::new(p.into(), BigInt::from(BigUint::one() << d)).to_f64().unwrap_or(f64::NAN)
    }
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct IndexedRule<F> {
    next: u64,
    rule: F,
}

impl<F: Fn(u64) -> bool + Send> DigitGenerator for IndexedRule<F> {
    fn extend(&mut self, out: &mut Vec<u8>) {
        let bit = (self.rule)(self.next);
        debug_assert_eq!(bit, (self.rule)(self.next), "custom digit rule is not pure at n = {}", self.next);
        out.push(bit as u8);
        self.next += 1;
    }
}

struct AdviceStream {
    encoder: AdviceEncoder,
}

impl DigitGenerator for AdviceStream {
    fn extend(&mut self, out: &mut Vec<u8>) {
        // Constant stretches of f still emit separators at powers of two, so
        // a few steps always make progress.
        let before = out.len();
        while out.len() == before {
            let block = self.encoder.step().unwrap_or_else(|e| panic!("advice function broke its contract: {e}"));
            out.extend(block.iter().map(|&b| b as u8));
        }
    }
}

struct EmbeddingStream {
    s: MassSource,
    e: u64,
    next: u64,
}

impl DigitGenerator for EmbeddingStream {
    fn extend(&mut self, out: &mut Vec<u8>) {
        let n = self.next;
        let bit = if n == 1 {
            self.s.digit_at(1)
        } else if n <= self.e + 1 {
            !self.s.digit_at(1)
        } else {
            self.s.digit_at(n - self.e)
        };
        out.push(bit as u8);
        self.next += 1;
    }
}

/// How the run lengths continue past the explicitly listed head.
#[derive(Clone)]
pub enum Tail {
    /// No further blocks: the expansion ends in zeros (a dyadic value).
    Finite,
    Const(u64),
    /// `u_k = slope * k + offset` with 1-based `k`.
    Linear {
        slope: u64,
        offset: u64,
    },
    /// Repeat the listed head cyclically, starting over at `u_{from}`.
    Cycle {
        from: usize,
    },
    Adversarial(Arc<AdversarialRule>),
    Custom {
        name: String,
        rule: Arc<dyn Fn(usize) -> u64 + Send + Sync>,
    },
}

impl fmt::Debug for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tail::Finite => write!(f, "Finite"),
            Tail::Const(c) => write!(f, "Const({c})"),
            Tail::Linear { slope, offset } => write!(f, "Linear({slope}k+{offset})"),
            Tail::Cycle { from } => write!(f, "Cycle(from {from})"),
            Tail::Adversarial(_) => write!(f, "Adversarial"),
            Tail::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Block lengths `u_1, u_2, ...` of alternating runs of ones and zeros:
/// `mu = 0.1^{u_1} 0^{u_2} 1^{u_3} ...`.
#[derive(Clone, Debug)]
pub struct RunLengths {
    head: Vec<u64>,
    tail: Tail,
}

impl RunLengths {
    pub fn new(head: Vec<u64>, tail: Tail) -> Result<Self, MassError> {
        let u = Self { head, tail };
        u.validate_head()?;
        Ok(u)
    }

    pub fn finite(head: Vec<u64>) -> Result<Self, MassError> {
        Self::new(head, Tail::Finite)
    }

    pub fn constant(c: u64) -> Result<Self, MassError> {
        Self::new(vec![c], Tail::Const(c))
    }

    /// `u_k = slope * k + offset`.
    pub fn linear(slope: u64, offset: u64) -> Result<Self, MassError> {
        Self::new(Vec::new(), Tail::Linear { slope, offset })
    }

    pub fn cyclic(cycle: Vec<u64>) -> Result<Self, MassError> {
        Self::new(cycle, Tail::Cycle { from: 1 })
    }

    fn validate_head(&self) -> Result<(), MassError> {
        let probe = match self.tail {
            Tail::Finite => self.head.len(),
            Tail::Adversarial(_) => 0,
            _ => self.head.len().max(64),
        };
        for k in 1..=probe {
            let value = self.u(k).unwrap_or(1);
            if k >= 2 && value == 0 {
                return Err(MassError::EmptyBlock { index: k, value });
            }
        }
        if let Tail::Cycle { from } = self.tail {
            if from == 0 || from > self.head.len() {
                return Err(MassError::EmptyBlock { index: from, value: 0 });
            }
        }
        Ok(())
    }

    /// `u_k` (1-based), or `None` past the end of a finite pattern.
    pub fn u(&self, k: usize) -> Option<u64> {
        assert!(k >= 1, "run lengths are numbered from 1");
        if k <= self.head.len() {
            return Some(self.head[k - 1]);
        }
        match &self.tail {
            Tail::Finite => None,
            Tail::Const(c) => Some(*c),
            Tail::Linear { slope, offset } => Some(slope * k as u64 + offset),
            Tail::Cycle { from } => {
                let period = self.head.len() - from + 1;
                Some(self.head[from - 1 + (k - self.head.len() - 1) % period])
            }
            Tail::Adversarial(rule) => Some(rule.u(k)),
            Tail::Custom { rule, .. } => Some(rule(k)),
        }
    }

    /// `a_k = u_1 + ... + u_k`: the position of the last digit of block `k`.
    pub fn a(&self, k: usize) -> Option<u64> {
        (1..=k).map(|i| self.u(i)).sum()
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.tail, Tail::Finite)
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn describe(&self) -> String {
        let head: Vec<String> = self.head.iter().map(u64::to_string).collect();
        let tail = match &self.tail {
            Tail::Finite => String::new(),
            Tail::Const(c) => format!(";tail=const:{c}"),
            Tail::Linear { slope, offset } => format!(";tail=linear:{slope},{offset}"),
            Tail::Cycle { from } => format!(";tail=cycle:{from}"),
            Tail::Adversarial(r) => format!(";tail=adversarial:{}", r.schedule.describe()),
            Tail::Custom { name, .. } => format!(";tail={name}"),
        };
        format!("{}{}", head.join(","), tail)
    }
}

struct RunLengthGenerator {
    u: RunLengths,
    block: usize,
    pending: Option<u64>,
}

impl RunLengthGenerator {
    fn new(u: RunLengths) -> Self {
        Self { u, block: 1, pending: None }
    }
}

impl DigitGenerator for RunLengthGenerator {
    fn extend(&mut self, out: &mut Vec<u8>) {
        let before = out.len();
        while out.len() == before {
            let len = match self.pending {
                Some(len) => len,
                None => match self.u.u(self.block) {
                    Some(len) => {
                        assert!(self.block == 1 || len >= 1, "run length u_{} is zero", self.block);
                        len
                    }
                    None => {
                        out.extend(std::iter::repeat_n(0u8, 64));
                        return;
                    }
                },
            };
            // long blocks are emitted in chunks
            let chunk = len.min(1 << 16);
            let bit = (self.block % 2 == 1) as u8;
            out.extend(std::iter::repeat_n(bit, chunk as usize));
            if chunk == len {
                self.block += 1;
                self.pending = None;
            } else {
                self.pending = Some(len - chunk);
            }
        }
    }
}

/// Extract the run lengths visible in a finite prefix. The last block may be
/// truncated by the end of the prefix.
pub fn run_lengths_of(bits: &[bool]) -> Vec<u64> {
    let mut out = Vec::new();
    let mut expect = true;
    let mut i = 0;
    while i < bits.len() {
        let start = i;
        while i < bits.len() && bits[i] == expect {
            i += 1;
        }
        out.push((i - start) as u64);
        expect = !expect;
    }
    out
}

/// Result of comparing a dyadic test mass with a digit stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GapProbe {
    /// `|m - mu| >= gap`, with the side certain.
    ProvenGap { gap: Dyadic, side: Side, depth: u64 },
    /// Not separated: `|m - mu| < 2^-depth`.
    Unresolved { depth: u64 },
}

/// Certified bounds on `|m - mu|` from the first `depth` places of `mu`, as
/// numerators over `2^depth`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Separation {
    pub depth: u64,
    /// Known sign of `m - mu`, if the prefix decides it.
    pub side: Option<Side>,
    pub lower: BigUint,
    pub upper: BigUint,
    /// Bounds of `mu` itself, `[mu_lower, mu_upper] / 2^depth`.
    pub mu_lower: BigUint,
    pub mu_upper: BigUint,
}

impl Separation {
    pub fn lower_rational(&self) -> BigRational {
        ratio_pow2(&self.lower, self.depth)
    }

    pub fn upper_rational(&self) -> BigRational {
        ratio_pow2(&self.upper, self.depth)
    }
}

pub(crate) fn ratio_pow2(n: &BigUint, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n.clone()), BigInt::from(BigUint::one() << d))
}

/// Compare `m` with `mu` using the first `depth` places; `depth` must be at
/// least the exponent of `m`.
pub fn separation_at(src: &MassSource, m: &Dyadic, depth: u64) -> Separation {
    let depth = depth.max(m.exponent());
    let p = src.prefix(depth);
    let mm = m.scaled_numerator(depth);
    if src.terminates_by(depth) {
        let (side, diff) = match mm.cmp(&p) {
            Ordering::Less => (Some(Side::Below), &p - &mm),
            Ordering::Greater => (Some(Side::Above), &mm - &p),
            Ordering::Equal => (None, BigUint::zero()),
        };
        return Separation { depth, side, lower: diff.clone(), upper: diff, mu_lower: p.clone(), mu_upper: p };
    }
    // mu lies in [p, p + 1) / 2^depth for a canonical expansion
    let p1 = &p + 1u32;
    let (side, lower, upper) = match mm.cmp(&p) {
        Ordering::Less => (Some(Side::Below), &p - &mm, &p1 - &mm),
        Ordering::Equal => (None, BigUint::zero(), BigUint::one()),
        Ordering::Greater => (Some(Side::Above), &mm - &p1, &mm - &p),
    };
    Separation { depth, side, lower, upper, mu_lower: p, mu_upper: p1 }
}

/// Search depths from the exponent of `m` up to `max_depth` for a proven gap.
pub fn gap_probe(src: &MassSource, m: &Dyadic, max_depth: u64) -> GapProbe {
    let start = m.exponent();
    let mut last = None;
    for depth in start..=max_depth.max(start) {
        let sep = separation_at(src, m, depth);
        if let Some(side) = sep.side {
            if !sep.lower.is_zero() {
                let gap = Dyadic::new(sep.lower, depth).expect("gap below one");
                return GapProbe::ProvenGap { gap, side, depth };
            }
        }
        last = Some(sep);
    }
    let sep = last.expect("at least one depth examined");
    // In the cell just above m's prefix only |m - mu| <= 2^-depth is known.
    let depth = if sep.side == Some(Side::Above) { sep.depth.saturating_sub(1) } else { sep.depth };
    GapProbe::Unresolved { depth }
}

/// Schedule-diagonalizing run lengths: each block is just long enough that
/// the bisection step deciding its first digit cannot finish within `T`.
///
/// The decisive query for block `k+1` is the midpoint carrying the last digit
/// of block `k`. Its word has length `a_k + 1` and it lies within
/// `2^-a_{k+1}` of `mu`, so it needs time above `K 2^{a_{k+1}}`. Choosing
/// `2^{u_{k+1}} > 2^{-a_k} max(T(a_k), T(a_k + 1)) / K` defeats both the
/// budget indexed by digit count and the one indexed by word length.
pub struct AdversarialRule {
    schedule: Schedule,
    k_const: BigRational,
    memo: Mutex<Vec<u64>>,
}

impl AdversarialRule {
    fn u(&self, k: usize) -> u64 {
        let mut memo = self.memo.lock().expect("adversarial memo poisoned");
        while memo.len() < k {
            let next = if memo.is_empty() {
                1
            } else {
                let a: u64 = memo.iter().sum();
                least_violating_run(&self.schedule, &self.k_const, a)
            };
            memo.push(next);
        }
        memo[k - 1]
    }
}

/// Least `u >= 1` with `2^{a+u} K > max(T(a), T(a+1))`.
pub fn least_violating_run(schedule: &Schedule, k_const: &BigRational, a: u64) -> u64 {
    let t = schedule.evaluate(a).max(schedule.evaluate(a + 1));
    let target = SimTime::from_rational(t.as_rational() / k_const);
    match target.floor_log2() {
        // 2^e <= target < 2^{e+1}, so the least x with 2^x > target is e + 1
        Some(e) => (e + 1 - a as i64).max(1) as u64,
        None => 1,
    }
}

pub fn adversarial_mass(schedule: &Schedule, k_const: &BigRational) -> Result<RunLengths, MassError> {
    if k_const <= &BigRational::zero() {
        return Err(MassError::NonPositiveConstant);
    }
    let rule = AdversarialRule { schedule: schedule.clone(), k_const: k_const.clone(), memo: Mutex::new(Vec::new()) };
    RunLengths::new(Vec::new(), Tail::Adversarial(Arc::new(rule)))
}

impl RunLengths {
    /// `u_k` values for `k = 1..=count` (panics past a finite end).
    pub fn head_values(&self, count: usize) -> Vec<u64> {
        (1..=count).map(|k| self.u(k).expect("pattern shorter than requested")).collect()
    }
}

impl AdversarialRule {
    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }
}
