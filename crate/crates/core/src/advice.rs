//! Coding prefix advice functions into a mass value and reading them back.
//!
//! Each binary letter becomes a triple (`0 -> 100`, `1 -> 010`) and the
//! separator `001` follows the block for every power-of-two length, so the
//! expansion never contains `000` or `111`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Pow, Zero};
use thiserror::Error;

pub const SEPARATOR: [bool; 3] = [false, false, true];
const CODE_ZERO: [bool; 3] = [true, false, false];
const CODE_ONE: [bool; 3] = [false, true, false];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdviceError {
    #[error("advice is not prefix-closed: f({n}) is not a prefix of f({next})", next = n + 1)]
    PrefixViolation { n: u64 },
    #[error("|f({n})| = {len} exceeds the declared bound a*log2(n)+b")]
    BoundExceeded { n: u64, len: usize },
    #[error("letter {letter:?} does not fit the {bits}-bit alphabet")]
    LetterOutOfRange { letter: char, bits: u32 },
    #[error("corrupt expansion: triple {triple} at digit {position}")]
    Corrupt { position: u64, triple: String },
    #[error("expansion ended after {read} digits before enough separators were seen")]
    Truncated { read: u64 },
    #[error("input length must be at least 1")]
    ZeroLength,
    #[error("decoded {bits} bits, not a whole number of {width}-bit letters")]
    RaggedLetters { bits: usize, width: u32 },
    #[error("prefix has {have} digits, at least {need} are needed")]
    InsufficientPrefix { have: usize, need: u64 },
    #[error("advice corpus line {line}: {msg}")]
    Corpus { line: usize, msg: String },
}

/// How letters of the advice alphabet become bits before triple coding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Alphabet {
    /// Words are already strings of `0` and `1`.
    Binary,
    /// Each letter is its code point written in this many bits, MSB first.
    FixedWidth(u32),
}

impl Default for Alphabet {
    fn default() -> Self {
        Alphabet::FixedWidth(8)
    }
}

impl Alphabet {
    pub fn bits_per_letter(self) -> u32 {
        match self {
            Alphabet::Binary => 1,
            Alphabet::FixedWidth(w) => w,
        }
    }

    pub fn binarize(self, word: &str) -> Result<Vec<bool>, AdviceError> {
        let mut out = Vec::new();
        for ch in word.chars() {
            match self {
                Alphabet::Binary => match ch {
                    '0' => out.push(false),
                    '1' => out.push(true),
                    _ => return Err(AdviceError::LetterOutOfRange { letter: ch, bits: 1 }),
                },
                Alphabet::FixedWidth(w) => {
                    let code = ch as u32;
                    if w < 32 && code >> w != 0 {
                        return Err(AdviceError::LetterOutOfRange { letter: ch, bits: w });
                    }
                    out.extend((0..w).rev().map(|i| (code >> i) & 1 == 1));
                }
            }
        }
        Ok(out)
    }

    pub fn letters(self, bits: &[bool]) -> Result<String, AdviceError> {
        match self {
            Alphabet::Binary => Ok(bits.iter().map(|&b| if b { '1' } else { '0' }).collect()),
            Alphabet::FixedWidth(w) => {
                if w == 0 || !bits.len().is_multiple_of(w as usize) {
                    return Err(AdviceError::RaggedLetters { bits: bits.len(), width: w });
                }
                bits.chunks(w as usize)
                    .map(|c| {
                        let code = c.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
                        char::from_u32(code).ok_or(AdviceError::RaggedLetters { bits: bits.len(), width: w })
                    })
                    .collect()
            }
        }
    }
}

/// `c(a)` for an already binary word.
pub fn code_binary(bits: &[bool]) -> Vec<bool> {
    bits.iter().flat_map(|&b| if b { CODE_ONE } else { CODE_ZERO }).collect()
}

/// Length bound `|f(n)| <= a log2(n) + b`, in letters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct LogBound {
    pub a: u64,
    pub b: u64,
}

impl LogBound {
    /// Exact test of `len <= a log2(n) + b`, i.e. `2^(len-b) <= n^a`.
    pub fn admits(&self, n: u64, len: usize) -> bool {
        let len = len as u64;
        if len <= self.b {
            return true;
        }
        if n <= 1 || self.a == 0 {
            return false;
        }
        let lhs = BigUint::one() << (len - self.b);
        let rhs: BigUint = Pow::pow(BigUint::from(n), self.a);
        lhs <= rhs
    }

    /// Digits a decoder may read for inputs up to `2^m`: `L m + K' + 3 m`.
    /// Each letter costs `3 * width` digits, so `L = 3 a width` and the
    /// `b` letters plus the final separator give `K' = 3 b width + 3`.
    pub fn read_bound(&self, alphabet: Alphabet, m: u64) -> u64 {
        let w = alphabet.bits_per_letter() as u64;
        let l = 3 * self.a * w;
        let k = 3 * self.b * w + 3;
        l * m + k + 3 * m
    }
}

/// A prefix advice function `n -> f(n)`.
#[derive(Clone)]
pub struct AdviceFunction {
    name: String,
    alphabet: Alphabet,
    bound: Option<LogBound>,
    rule: Arc<dyn Fn(u64) -> String + Send + Sync>,
}

impl fmt::Debug for AdviceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdviceFunction").field("name", &self.name).field("alphabet", &self.alphabet).field("bound", &self.bound).finish()
    }
}

impl AdviceFunction {
    pub fn new<F>(name: impl Into<String>, alphabet: Alphabet, rule: F) -> Self
    where
        F: Fn(u64) -> String + Send + Sync + 'static,
    {
        Self { name: name.into(), alphabet, bound: None, rule: Arc::new(rule) }
    }

    pub fn with_bound(mut self, bound: LogBound) -> Self {
        self.bound = Some(bound);
        self
    }

    /// Parse `n<TAB>f(n)` lines. Lengths missing from the file inherit the
    /// previous value; before the first entry the advice is empty.
    pub fn from_corpus(name: impl Into<String>, text: &str, alphabet: Alphabet) -> Result<Self, AdviceError> {
        let mut entries: Vec<(u64, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
                continue;
            }
            let (n, word) = trimmed.split_once('\t').ok_or_else(|| AdviceError::Corpus { line, msg: "expected n<TAB>f(n)".into() })?;
            let n: u64 = n.trim().parse().map_err(|_| AdviceError::Corpus { line, msg: format!("bad length {n:?}") })?;
            if let Some((prev, _)) = entries.last() {
                if n <= *prev {
                    return Err(AdviceError::Corpus { line, msg: format!("length {n} is not increasing") });
                }
            }
            alphabet.binarize(word).map_err(|e| AdviceError::Corpus { line, msg: e.to_string() })?;
            entries.push((n, word.to_string()));
        }
        // prefix closure is checked here so a bad corpus fails at load time
        let mut prev = String::new();
        for (n, w) in &entries {
            if !w.starts_with(prev.as_str()) {
                return Err(AdviceError::PrefixViolation { n: n.saturating_sub(1) });
            }
            prev = w.clone();
        }
        let rule = move |n: u64| {
            let idx = entries.partition_point(|(k, _)| *k <= n);
            if idx == 0 {
                String::new()
            } else {
                entries[idx - 1].1.clone()
            }
        };
        Ok(Self::new(name, alphabet, rule))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn bound(&self) -> Option<LogBound> {
        self.bound
    }

    pub fn eval(&self, n: u64) -> String {
        (self.rule)(n)
    }

    fn checked(&self, n: u64) -> Result<String, AdviceError> {
        let w = self.eval(n);
        if let Some(b) = self.bound {
            let len = w.chars().count();
            if !b.admits(n, len) {
                return Err(AdviceError::BoundExceeded { n, len });
            }
        }
        Ok(w)
    }
}

/// Incremental builder of the expansion: one `step` per length `n`.
pub struct AdviceEncoder {
    f: AdviceFunction,
    next: u64,
    last: String,
}

impl AdviceEncoder {
    pub fn new(f: AdviceFunction) -> Self {
        Self { f, next: 0, last: String::new() }
    }

    /// The length whose block the next `step` emits.
    pub fn next_length(&self) -> u64 {
        self.next
    }

    /// Emit the block for the next length: `c(f(0))` first, then `c(s)` with
    /// `f(n+1) = f(n) s`, followed by `001` when `n+1` is a power of two.
    pub fn step(&mut self) -> Result<Vec<bool>, AdviceError> {
        let n = self.next;
        let word = self.f.checked(n)?;
        let suffix =
            if n == 0 { word.as_str() } else { word.strip_prefix(self.last.as_str()).ok_or(AdviceError::PrefixViolation { n: n - 1 })? };
        let mut block = code_binary(&self.f.alphabet.binarize(suffix)?);
        if n >= 1 && n.is_power_of_two() {
            block.extend_from_slice(&SEPARATOR);
        }
        self.last = word;
        self.next += 1;
        Ok(block)
    }
}

/// Digits of `mu(f)(n_max)` together with where each separator starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedMassPrefix {
    pub bits: Vec<bool>,
    pub separators: Vec<usize>,
    pub n_max: u64,
}

impl EncodedMassPrefix {
    pub fn render(&self) -> String {
        crate::dyadic::render_bits(&self.bits)
    }

    /// Every aligned triple is one of `001`, `010`, `100`.
    pub fn triples_well_formed(&self) -> bool {
        self.bits.len().is_multiple_of(3) && self.bits.chunks(3).all(|t| t.iter().filter(|&&b| b).count() == 1)
    }
}

pub fn encode_advice(f: &AdviceFunction, n_max: u64) -> Result<EncodedMassPrefix, AdviceError> {
    let mut enc = AdviceEncoder::new(f.clone());
    let mut bits = Vec::new();
    let mut separators = Vec::new();
    for n in 0..=n_max {
        let block = enc.step()?;
        if n >= 1 && n.is_power_of_two() {
            separators.push(bits.len() + block.len() - 3);
        }
        bits.extend(block);
    }
    Ok(EncodedMassPrefix { bits, separators, n_max })
}

/// Smallest `m` with `len <= 2^m`.
pub fn separator_target(w_len: u64) -> u64 {
    if w_len <= 1 {
        0
    } else {
        64 - (w_len - 1).leading_zeros() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedAdvice {
    /// `f(2^m)`.
    pub word: String,
    pub m: u64,
    pub digits_read: u64,
}

/// Read digits until `m + 1` separators have passed, with `2^(m-1) < w_len <= 2^m`.
pub fn decode_advice<I>(digits: I, w_len: u64, alphabet: Alphabet) -> Result<DecodedAdvice, AdviceError>
where
    I: IntoIterator<Item = bool>,
{
    if w_len == 0 {
        return Err(AdviceError::ZeroLength);
    }
    let m = separator_target(w_len);
    let mut it = digits.into_iter();
    let mut read = 0u64;
    let mut seen = 0u64;
    let mut payload = Vec::new();
    while seen < m + 1 {
        let mut t = [false; 3];
        for slot in t.iter_mut() {
            *slot = it.next().ok_or(AdviceError::Truncated { read })?;
            read += 1;
        }
        match t {
            [false, false, true] => seen += 1,
            [true, false, false] => payload.push(false),
            [false, true, false] => payload.push(true),
            _ => return Err(AdviceError::Corrupt { position: read - 2, triple: crate::dyadic::render_bits(&t) }),
        }
    }
    Ok(DecodedAdvice { word: alphabet.letters(&payload)?, m, digits_read: read })
}

/// Check `|mu - k/2^n| > 2^-(n+5)` from a finite prefix.
///
/// The prefix pins `mu` to the open cell `(P, P+1)/2^l` (it cannot sit on
/// an endpoint, being free of `000` and `111` tails), so the bound holds as
/// soon as the whole cell clears the band around `k/2^n`. Returns `Ok(false)`
/// only when the cell lies inside the band, which would refute the bound.
pub fn gap_certificate(prefix: &EncodedMassPrefix, k: &BigUint, n: u64) -> Result<bool, AdviceError> {
    let need = n + 5;
    let l = prefix.bits.len() as u64;
    if l < need {
        return Err(AdviceError::InsufficientPrefix { have: prefix.bits.len(), need });
    }
    let p = prefix_value(&prefix.bits);
    let centre = k << (l - n);
    let band = BigUint::one() << (l - need);
    let cell_hi = &p + 1u32;
    if p >= &centre + &band || (centre >= band && cell_hi <= &centre - &band) {
        return Ok(true);
    }
    if centre >= band && p >= &centre - &band && cell_hi <= &centre + &band {
        return Ok(false);
    }
    Err(AdviceError::InsufficientPrefix { have: prefix.bits.len(), need: l + 1 })
}

/// Brute-force gap check over every `k/2^n` with `n <= n_max`; returns the
/// first `(k, n)` that fails to certify, if any.
pub fn exhaustive_gap_check(prefix: &EncodedMassPrefix, n_max: u64) -> Result<Option<(BigUint, u64)>, AdviceError> {
    for n in 0..=n_max {
        let top = BigUint::one() << n;
        let mut k = BigUint::zero();
        while k <= top {
            if !gap_certificate(prefix, &k, n)? {
                return Ok(Some((k, n)));
            }
            k += 1u32;
        }
    }
    Ok(None)
}

fn prefix_value(bits: &[bool]) -> BigUint {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            bytes[i / 8] |= 0x80 >> (i % 8);
        }
    }
    let pad = bytes.len() * 8 - bits.len();
    BigUint::from_bytes_be(&bytes) >> pad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{parse_bits, render_bits};

    fn binary(name: &str, rule: impl Fn(u64) -> String + Send + Sync + 'static) -> AdviceFunction {
        AdviceFunction::new(name, Alphabet::Binary, rule)
    }

    #[test]
    fn code_examples() {
        assert_eq!(render_bits(&code_binary(&parse_bits("00101").unwrap())), "100100010100010");
        assert!(code_binary(&[]).is_empty());
        assert_eq!(render_bits(&code_binary(&[true])), "010");
    }

    #[test]
    fn two_step_unrolling() {
        let f = binary("one", |n| if n == 0 { String::new() } else { "1".into() });
        let e = encode_advice(&f, 2).unwrap();
        assert_eq!(e.render(), "010001001");
        assert_eq!(e.separators, vec![3, 6]);
    }

    #[test]
    fn constant_advice_is_separators_only() {
        let f = binary("empty", |_| String::new());
        let e = encode_advice(&f, 8).unwrap();
        assert_eq!(e.render(), "001".repeat(4));
        let d = decode_advice(e.bits.iter().copied(), 5, Alphabet::Binary).unwrap();
        assert_eq!(d.word, "");
        assert_eq!(d.digits_read, 12);
    }

    #[test]
    fn prefix_violation_names_length() {
        let f = binary("bad", |n| if n < 3 { "1".into() } else { "0".into() });
        assert_eq!(encode_advice(&f, 5), Err(AdviceError::PrefixViolation { n: 2 }));
    }

    #[test]
    fn corrupt_triples_rejected() {
        let bits = parse_bits("010111001").unwrap();
        assert!(matches!(decode_advice(bits, 1, Alphabet::Binary), Err(AdviceError::Corrupt { position: 4, .. })));
        let bits = parse_bits("000").unwrap();
        assert!(matches!(decode_advice(bits, 1, Alphabet::Binary), Err(AdviceError::Corrupt { .. })));
        assert_eq!(decode_advice(vec![], 0, Alphabet::Binary), Err(AdviceError::ZeroLength));
    }

    #[test]
    fn separator_targets() {
        let got: Vec<u64> = [1, 2, 3, 4, 5, 8, 9, 1024, 1025].iter().map(|&w| separator_target(w)).collect();
        assert_eq!(got, vec![0, 1, 2, 2, 3, 3, 4, 10, 11]);
    }

    #[test]
    fn byte_alphabet_round_trip() {
        let word = "advice";
        let f = AdviceFunction::new("ascii", Alphabet::default(), move |n| word.chars().take((64 - n.leading_zeros()) as usize).collect());
        let e = encode_advice(&f, 64).unwrap();
        assert!(e.triples_well_formed());
        for w in 1..=64u64 {
            let d = decode_advice(e.bits.iter().copied(), w, Alphabet::default()).unwrap();
            assert_eq!(d.word, f.eval(1 << d.m));
        }
        assert!(Alphabet::FixedWidth(8).binarize("\u{0100}").is_err());
    }

    #[test]
    fn bound_is_checked_exactly() {
        let b = LogBound { a: 1, b: 1 };
        assert!(b.admits(0, 1));
        assert!(!b.admits(1, 2));
        assert!(b.admits(2, 2));
        assert!(!b.admits(3, 3));
        assert!(b.admits(4, 3));
        let f = binary("long", |n| "1".repeat(n as usize)).with_bound(b);
        assert!(matches!(encode_advice(&f, 8), Err(AdviceError::BoundExceeded { .. })));
    }

    #[test]
    fn corpus_carries_values_forward() {
        let f = AdviceFunction::from_corpus("c", "# demo\n1\t1\n4\t10\n9\t101\n", Alphabet::Binary).unwrap();
        let got: Vec<String> = (0..11).map(|n| f.eval(n)).collect();
        assert_eq!(got, ["", "1", "1", "1", "10", "10", "10", "10", "10", "101", "101"]);
        assert!(matches!(AdviceFunction::from_corpus("c", "1\t1\n2\t0\n", Alphabet::Binary), Err(AdviceError::PrefixViolation { .. })));
        assert!(matches!(AdviceFunction::from_corpus("c", "1 1\n", Alphabet::Binary), Err(AdviceError::Corpus { line: 1, .. })));
    }

    #[test]
    fn gap_certificate_small_cases() {
        let f = binary("empty", |_| String::new());
        let e = encode_advice(&f, 16).unwrap();
        assert_eq!(exhaustive_gap_check(&e, 8).unwrap(), None);
        let short = EncodedMassPrefix { bits: e.bits[..6].to_vec(), separators: vec![], n_max: 1 };
        assert!(matches!(gap_certificate(&short, &BigUint::one(), 2), Err(AdviceError::InsufficientPrefix { .. })));
    }
}
