//! Complexity demonstrations: deciding an advice language through the
//! oracle, and estimating digits with a fixed-precision oracle.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::advice::{decode_advice, separator_target, AdviceError, AdviceFunction, Alphabet, LogBound};
use crate::dyadic::{Dyadic, QueryWord};
use crate::expr::{ExprError, Rule};
use crate::mass::{splitmix64, MassSource};
use crate::oracle::{Answer, Oracle, OracleError, PrecisionMode};
use crate::procedures::{bisection, ProcedureError, Status};
use crate::schedule::Schedule;
use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("the mass is not an advice encoding: {0}")]
    NotAnEncoding(AdviceError),
    #[error("advice digits ran out: bisection stopped at digit {0}")]
    Incomplete(u64),
    #[error("the advice function needs a declared length bound")]
    NoBound,
    #[error("{zeta} trials are too few: more than {required} are needed")]
    TooFewTrials { zeta: u64, required: u64 },
    #[error("estimation needs a fixed-precision oracle")]
    NeedsFixedPrecision,
    #[error("delta must lie in (0, 1)")]
    BadDelta,
    #[error(transparent)]
    Rule(#[from] ExprError),
    #[error(transparent)]
    Procedure(#[from] ProcedureError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// `<w, a>`: each bit of `w` doubled, then `01`, then `a`.
pub fn pair(w: &[bool], a: &[bool]) -> Vec<bool> {
    let mut out = Vec::with_capacity(2 * w.len() + 2 + a.len());
    for &b in w {
        out.push(b);
        out.push(b);
    }
    out.push(false);
    out.push(true);
    out.extend_from_slice(a);
    out
}

/// Inverse of [`pair`]; `None` if the input is not a pair.
pub fn unpair(p: &[bool]) -> Option<(Vec<bool>, Vec<bool>)> {
    let mut w = Vec::new();
    let mut i = 0;
    while i + 1 < p.len() {
        if p[i] == p[i + 1] {
            w.push(p[i]);
            i += 2;
        } else if !p[i] && p[i + 1] {
            return Some((w, p[i + 2..].to_vec()));
        } else {
            return None;
        }
    }
    None
}

/// `w in A` iff `B(<w, f(|w|)>)` accepts.
#[derive(Debug, Clone)]
pub struct AdviceLanguage {
    pub rule: Rule,
    pub advice: AdviceFunction,
}

impl AdviceLanguage {
    pub fn new(rule: &str, advice: AdviceFunction) -> Result<Self, HarnessError> {
        Ok(Self { rule: rule.parse()?, advice })
    }

    /// Run `B` on a paired input.
    pub fn base_accepts(&self, paired: &[bool]) -> bool {
        match unpair(paired) {
            Some((w, a)) => self.rule.accepts(&w, &a),
            None => false,
        }
    }

    /// Membership computed straight from the advice function.
    pub fn ground_truth(&self, w: &[bool]) -> Result<bool, HarnessError> {
        let a = self.advice.alphabet().binarize(&self.advice.eval(w.len() as u64)).map_err(HarnessError::NotAnEncoding)?;
        Ok(self.base_accepts(&pair(w, &a)))
    }
}

/// The demo language: `f(n)` holds the first `floor(log2 n) + 1` hidden bits
/// and `w` is accepted when the last of them is 1.
pub fn demo_language(hidden_seed: u64) -> AdviceLanguage {
    let f = AdviceFunction::new(format!("hidden:{hidden_seed}"), Alphabet::Binary, move |n| {
        let len = if n == 0 { 0 } else { 64 - n.leading_zeros() as u64 };
        (0..len).map(|i| if hidden_bit(hidden_seed, i) { '1' } else { '0' }).collect()
    })
    .with_bound(LogBound { a: 1, b: 1 });
    AdviceLanguage::new("a[log2(len)] == 1", f).expect("demo rule parses")
}

fn hidden_bit(seed: u64, i: u64) -> bool {
    splitmix64(seed ^ splitmix64(i)) & 1 == 1
}

/// Budgets that cover every bisection stage on an advice mass: the stage-`i`
/// midpoint is more than `2^-(i+5)` from `mu`, at most half of which an
/// arbitrary-precision error of `2^-(i+6)` can eat. The word has length
/// `i + 1`, so `T(n) = K 2^(n+5)`.
pub fn advice_schedule(k_const: &BigRational) -> Schedule {
    Schedule::exp2(1, SimTime::scaled_pow2(&SimTime::from_rational(k_const.clone()), 5)).expect("positive scale")
}

/// Digits bisection must read for inputs of length `w_len`.
pub fn advice_digits_needed(bound: LogBound, alphabet: Alphabet, w_len: u64) -> u64 {
    bound.read_bound(alphabet, separator_target(w_len.max(1)))
}

#[derive(Debug, Clone, Serialize)]
pub struct Decision {
    pub accept: bool,
    pub advice: String,
    pub digits_read: u64,
    /// Simulated experiment time spent on this word.
    pub time: SimTime,
    pub queries: u64,
}

/// Decide `w` by reading `mu(f)` through the oracle, decoding `f(2^m)` and
/// running the base rule on the pair.
pub fn decide_plog(w: &[bool], oracle: &mut Oracle, lang: &AdviceLanguage) -> Result<Decision, HarnessError> {
    let bound = lang.advice.bound().ok_or(HarnessError::NoBound)?;
    let alphabet = lang.advice.alphabet();
    let w_len = (w.len() as u64).max(1);
    let digits = advice_digits_needed(bound, alphabet, w_len);
    let schedule = advice_schedule(&oracle.config().k_const);
    let report = bisection(oracle, digits, &schedule)?;
    if let Status::TimedOutAtDigit(j) = report.status {
        return Err(HarnessError::Incomplete(j));
    }
    let decoded = decode_advice(report.digits.iter().copied(), w_len, alphabet).map_err(HarnessError::NotAnEncoding)?;
    let a = alphabet.binarize(&decoded.word).map_err(HarnessError::NotAnEncoding)?;
    Ok(Decision {
        accept: lang.base_accepts(&pair(w, &a)),
        advice: decoded.word,
        digits_read: decoded.digits_read,
        time: report.total_time,
        queries: report.transcript.len() as u64,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Outcome counts of repeated shots: `alpha` below, `beta` above, `gamma`
/// timed out.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TrinomialCounts {
    pub alpha: u64,
    pub beta: u64,
    pub gamma: u64,
}

impl TrinomialCounts {
    pub fn zeta(&self) -> u64 {
        self.alpha + self.beta + self.gamma
    }

    pub fn record(&mut self, a: Answer) {
        match a {
            Answer::Lesser => self.alpha += 1,
            Answer::Greater => self.beta += 1,
            Answer::Timeout => self.gamma += 1,
        }
    }

    /// `X = 2 alpha + gamma`, whose mean does not depend on the timeout window.
    pub fn x(&self) -> u64 {
        2 * self.alpha + self.gamma
    }
}

/// Two-outcome view: one flag against everything else.
pub fn coin_amalgamation(c: &TrinomialCounts) -> (u64, u64) {
    (c.alpha, c.beta + c.gamma)
}

/// `floor(3 2^(2k+10) / (4 delta)) + 1`, the least admissible trial count.
pub fn required_trials(k: u32, delta: f64) -> Result<u64, HarnessError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(HarnessError::BadDelta);
    }
    let d = BigRational::from_float(delta).ok_or(HarnessError::BadDelta)?;
    let num = BigRational::from_integer(BigInt::from(3u32) << (2 * k as usize + 10));
    let bound = num / (d * BigRational::from_integer(4.into()));
    let floor: BigInt = bound.floor().to_integer();
    Ok((floor + BigInt::from(1u32)).to_u64().unwrap_or(u64::MAX))
}

#[derive(Debug, Clone, Serialize)]
pub struct DigitEstimate {
    pub s_hat: f64,
    /// `floor(s_hat 2^k)` as `k` binary digits.
    pub digits: String,
    pub k: u32,
    pub delta: f64,
    pub zeta: u64,
    pub counts: TrinomialCounts,
    pub elapsed_total: SimTime,
}

/// Per-shot budget `4K/eps + N`: any realized mass at least `eps/4` from
/// `mu` answers in time whatever the jitter.
pub fn fixed_shot_budget(oracle: &Oracle, eps: &Dyadic) -> SimTime {
    let cfg = oracle.config();
    let four_k = &cfg.k_const * BigRational::from_integer(4.into());
    SimTime::from_rational(four_k / eps.to_rational() + &cfg.jitter)
}

/// Shoot `zeta` particles at `1/2` and estimate `s` from `X = 2 alpha + gamma`.
pub fn estimate_digits_fixed(oracle: &mut Oracle, k: u32, delta: f64, zeta: Option<u64>) -> Result<DigitEstimate, HarnessError> {
    if !matches!(oracle.config().mode, PrecisionMode::FixedPrecision { .. }) {
        return Err(HarnessError::NeedsFixedPrecision);
    }
    let required = required_trials(k, delta)?;
    let zeta = zeta.unwrap_or(required);
    if zeta < required {
        return Err(HarnessError::TooFewTrials { zeta, required: required - 1 });
    }
    estimate_with_trials(oracle, k, delta, zeta)
}

/// As [`estimate_digits_fixed`] but with no check on `zeta`; the error
/// guarantee is void below [`required_trials`].
pub fn estimate_with_trials(oracle: &mut Oracle, k: u32, delta: f64, zeta: u64) -> Result<DigitEstimate, HarnessError> {
    let PrecisionMode::FixedPrecision { epsilon } = oracle.config().mode.clone() else {
        return Err(HarnessError::NeedsFixedPrecision);
    };
    if zeta == 0 {
        return Err(HarnessError::TooFewTrials { zeta, required: 0 });
    }
    let budget = fixed_shot_budget(oracle, &epsilon);
    let half: QueryWord = "01".parse().expect("valid word");
    let before = oracle.transcript().total_time().clone();
    let mut counts = TrinomialCounts::default();
    for _ in 0..zeta {
        counts.record(oracle.query(&half, &budget)?.answer);
    }
    let s_hat = counts.x() as f64 / zeta as f64 - 0.5;
    let scaled = BigRational::new(BigInt::from(counts.x()) << k as usize, BigInt::from(zeta))
        - BigRational::new(BigInt::from(1u32) << k as usize, BigInt::from(2));
    let top = (BigInt::from(1u32) << k as usize) - 1;
    let idx = scaled.floor().to_integer().clamp(BigInt::from(0), top);
    let digits = format!("{:0width$b}", idx.to_u64().unwrap_or(0), width = k as usize);
    Ok(DigitEstimate { s_hat, digits, k, delta, zeta, counts, elapsed_total: oracle.transcript().total_time() - &before })
}

/// The first `k` binary digits of an exactly known `s` in `[0, 1)`.
pub fn leading_digits(s: &BigRational, k: u32) -> String {
    let idx = (s * BigRational::from_integer(BigInt::from(BigUint::from(1u32) << k as usize))).floor().to_integer();
    format!("{:0width$b}", idx.to_u64().unwrap_or(0), width = k as usize)
}

/// Mass for a demo run: the encoding of `lang`'s advice.
pub fn advice_mass(lang: &AdviceLanguage) -> MassSource {
    MassSource::from_advice(lang.advice.clone())
}
