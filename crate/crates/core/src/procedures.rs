//! Experimental procedures that turn oracle answers into binary digits:
//! bisection, the grid algorithms and the program families built on them.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dyadic::{dyadic_to_word, Dyadic, QueryWord};
use crate::mass::{MassSource, RunLengths};
use crate::oracle::{Answer, Oracle, OracleConfig, OracleError, PrecisionMode, TranscriptEntry};
use crate::schedule::Schedule;
use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProcedureError {
    #[error("digit count must be at least 1")]
    NoDigits,
    #[error("{0} requires an error-free oracle")]
    NeedsErrorFree(&'static str),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Complete(u64),
    /// Digit `j` (1-based) could not be determined.
    TimedOutAtDigit(u64),
}

#[derive(Debug, Clone)]
pub struct MeasurementReport {
    pub procedure: String,
    pub digits: Vec<bool>,
    pub status: Status,
    /// Experiment time spent by this run.
    pub total_time: SimTime,
    /// Elapsed time of each query in order.
    pub stage_elapsed: Vec<SimTime>,
    pub transcript: Vec<TranscriptEntry>,
}

impl MeasurementReport {
    pub fn is_complete(&self) -> bool {
        matches!(self.status, Status::Complete(_))
    }

    pub fn digit_string(&self) -> String {
        crate::dyadic::render_bits(&self.digits)
    }

    /// First reported digit that disagrees with the source, 1-based.
    pub fn first_mismatch(&self, src: &MassSource) -> Option<u64> {
        self.digits.iter().enumerate().find(|(i, &d)| src.digit_at(*i as u64 + 1) != d).map(|(i, _)| i as u64 + 1)
    }

    /// Largest budget any query of this run was given.
    pub fn max_budget(&self) -> Option<SimTime> {
        self.transcript.iter().map(|e| e.budget.clone()).max()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (status, at) = match self.status {
            Status::Complete(n) => ("complete", n),
            Status::TimedOutAtDigit(j) => ("timed_out", j),
        };
        serde_json::json!({
            "procedure": self.procedure,
            "digits": self.digit_string(),
            "status": status,
            "status_digit": at,
            "total_time": self.total_time,
            "stage_elapsed": self.stage_elapsed,
            "queries": self.transcript.len(),
        })
    }
}

/// Captures the transcript slice produced by one procedure run.
struct RunLog {
    start: u64,
    time_before: SimTime,
}

impl RunLog {
    fn open(oracle: &Oracle) -> Self {
        Self { start: oracle.transcript().len(), time_before: oracle.transcript().total_time().clone() }
    }

    fn close(self, oracle: &Oracle, procedure: String, digits: Vec<bool>, status: Status) -> MeasurementReport {
        let entries = oracle.transcript().entries();
        let skip = entries.len().saturating_sub((oracle.transcript().len() - self.start) as usize);
        let transcript = entries[skip..].to_vec();
        let stage_elapsed: Vec<SimTime> = transcript.iter().map(|e| e.result.elapsed.clone()).collect();
        let total_time = oracle.transcript().total_time() - &self.time_before;
        MeasurementReport { procedure, digits, status, total_time, stage_elapsed, transcript }
    }
}

/// Per-stage error used by bisection on an arbitrary-precision oracle.
pub fn stage_precision(stage: u64) -> Dyadic {
    Dyadic::pow2_inv(stage + 6)
}

/// Read `n` digits by halving `(m1, m2)`; the stage-`i` midpoint is a word
/// of length `i + 1` and gets budget `T(i + 1)`.
pub fn bisection(oracle: &mut Oracle, n: u64, schedule: &Schedule) -> Result<MeasurementReport, ProcedureError> {
    bisection_named(oracle, n, schedule, format!("bisection[{}]", schedule.describe()))
}

fn bisection_named(oracle: &mut Oracle, n: u64, schedule: &Schedule, name: String) -> Result<MeasurementReport, ProcedureError> {
    if n == 0 {
        return Err(ProcedureError::NoDigits);
    }
    let log = RunLog::open(oracle);
    let mut lo = Dyadic::zero();
    let mut hi = Dyadic::one();
    let mut digits = Vec::with_capacity(n as usize);
    let mut status = Status::Complete(n);
    for stage in 1..=n {
        let m = lo.midpoint(&hi).expect("bisection interval never degenerates");
        let z = dyadic_to_word(&m, stage as usize + 1).expect("midpoints are below one");
        let budget = schedule.evaluate(z.len() as u64);
        let answer = match ask(oracle, &z, &budget, stage) {
            Ok(a) => a,
            Err(OracleError::Aborted { .. }) => Answer::Timeout,
            Err(e) => return Err(e.into()),
        };
        match answer {
            Answer::Lesser => {
                lo = m;
                digits.push(true);
            }
            Answer::Greater => {
                hi = m;
                digits.push(false);
            }
            Answer::Timeout => {
                status = Status::TimedOutAtDigit(stage);
                break;
            }
        }
    }
    Ok(log.close(oracle, name, digits, status))
}

fn ask(oracle: &mut Oracle, z: &QueryWord, budget: &SimTime, stage: u64) -> Result<Answer, OracleError> {
    let r = match oracle.config().mode {
        PrecisionMode::ArbitraryPrecision => oracle.query_with_error(z, budget, &stage_precision(stage))?,
        _ => oracle.query(z, budget)?,
    };
    Ok(r.answer)
}

/// Fire every `p / 2^r` with waiting time `K 2^(2r+1)` and read off the
/// first `r` places from the tightest bracket.
pub fn grid_algorithm(oracle: &mut Oracle, r: u64) -> Result<MeasurementReport, ProcedureError> {
    let (digits, status, log) = grid_digits(oracle, r, r)?;
    Ok(log.close(oracle, format!("grid[{r}]"), digits, status))
}

fn grid_digits(oracle: &mut Oracle, r: u64, want: u64) -> Result<(Vec<bool>, Status, RunLog), ProcedureError> {
    if oracle.config().mode != PrecisionMode::ErrorFree {
        return Err(ProcedureError::NeedsErrorFree("the grid algorithm"));
    }
    if want == 0 {
        return Err(ProcedureError::NoDigits);
    }
    let log = RunLog::open(oracle);
    let wait = SimTime::scaled_pow2(&SimTime::from_rational(oracle.config().k_const.clone()), 2 * r + 1);
    let count = BigUint::one() << r;
    // mu lies strictly between the largest Lesser point and the smallest Greater point
    let mut below: Option<BigUint> = None;
    let mut above: Option<BigUint> = None;
    let mut p = BigUint::zero();
    while p <= count {
        let point = Dyadic::new(p.clone(), r).expect("grid point in [0, 1]");
        let z = dyadic_to_word(&point, r as usize + 1).unwrap_or_else(|_| QueryWord::from_bits(vec![true]).expect("unit word"));
        let answer = match oracle.query(&z, &wait) {
            Ok(res) => res.answer,
            Err(OracleError::Aborted { .. }) => Answer::Timeout,
            Err(e) => return Err(e.into()),
        };
        match answer {
            Answer::Lesser => below = Some(p.clone()),
            Answer::Greater if above.is_none() => above = Some(p.clone()),
            _ => {}
        }
        p += 1u32;
    }
    let lo = below.unwrap_or_else(BigUint::zero);
    let hi = above.unwrap_or_else(|| count.clone());
    // digit j is known when floor(x 2^j) agrees over the open interval (lo, hi) / 2^r
    let mut digits = Vec::new();
    let mut status = Status::Complete(want);
    for j in 1..=want.min(r) {
        let shift = r - j;
        let first = &lo >> shift;
        let last = (&hi - 1u32) >> shift;
        if hi <= lo || first != last {
            status = Status::TimedOutAtDigit(j);
            break;
        }
        digits.push(first.bit(0));
    }
    if want > r && status == Status::Complete(want) {
        status = Status::TimedOutAtDigit(r + 1);
    }
    Ok((digits, status, log))
}

/// `P_k`: run the grid at level `n + k` and keep `n` digits.
pub fn program_pk(oracle: &mut Oracle, k: u64, n: u64) -> Result<MeasurementReport, ProcedureError> {
    let (digits, status, log) = grid_digits(oracle, n + k, n)?;
    Ok(log.close(oracle, format!("P[{k}]"), digits, status))
}

/// `N_k`: bisection with the constant waiting time `K 2^k`.
pub fn program_nk(oracle: &mut Oracle, k: u64, n: u64) -> Result<MeasurementReport, ProcedureError> {
    let t = SimTime::scaled_pow2(&SimTime::from_rational(oracle.config().k_const.clone()), k);
    let schedule = Schedule::constant(t).expect("positive constant");
    bisection_named(oracle, n, &schedule, format!("N[{k}]"))
}

/// A constant schedule covering every budget another run used. When that
/// run read `n` digits, bisection under it reads them too, since each of its
/// midpoints is a point the other run had to separate from `mu`.
pub fn universal_schedule(report: &MeasurementReport) -> Option<Schedule> {
    report.max_budget().and_then(|t| Schedule::constant(t).ok())
}

/// Per-block verdicts on whether bisection under `T` can get past block `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MeasurabilityVerdict {
    pub k: usize,
    pub a_k: u64,
    pub u_next: u64,
    /// `K 2^(a_(k+1)) <= T(a_k + 1)`: the query at stage `a_k` has a word of
    /// length `a_k + 1` and needs at least this long.
    pub necessary: bool,
    /// The same inequality with `T(a_k)`, as written for digit-indexed budgets.
    pub necessary_digit_indexed: bool,
    /// Every bisection stage through digit `a_k` provably answers in time.
    pub sufficient: bool,
}

pub fn measurability_check(u: &RunLengths, schedule: &Schedule, k_const: &BigRational, k_max: usize) -> Vec<MeasurabilityVerdict> {
    let k_time = SimTime::from_rational(k_const.clone());
    let needs = |exp: u64| SimTime::scaled_pow2(&k_time, exp);
    let mut out = Vec::new();
    let mut interior_ok = true;
    for k in 1..=k_max {
        let (Some(a_k), Some(u_next)) = (u.a(k), u.u(k + 1)) else { break };
        let a_next = a_k + u_next;
        if a_k == 0 {
            // empty leading block: there is no stage a_k
            out.push(MeasurabilityVerdict { k, a_k, u_next, necessary: true, necessary_digit_indexed: true, sufficient: true });
            continue;
        }
        let necessary = needs(a_next) <= schedule.evaluate(a_k + 1);
        let necessary_digit_indexed = needs(a_next) <= schedule.evaluate(a_k);
        // stage a_k: distance at least 2^-(a_(k+1)+1)
        let edge = needs(a_next + 1) <= schedule.evaluate(a_k + 1);
        // interior stages j of block k: distance at least 2^-(j+1)
        let a_prev = if k == 1 { 0 } else { u.a(k - 1).unwrap_or(0) };
        for j in (a_prev + 1)..a_k {
            interior_ok &= needs(j + 1) <= schedule.evaluate(j + 1);
        }
        out.push(MeasurabilityVerdict { k, a_k, u_next, necessary, necessary_digit_indexed, sufficient: interior_ok && edge });
        interior_ok &= edge;
    }
    out
}

/// Failure fraction of the grid at level `r` over `samples` uniform masses.
pub fn grid_failure_fraction(cfg: &OracleConfig, r: u64, samples: u64, seed: u64) -> Result<f64, ProcedureError> {
    let failures: Result<Vec<bool>, ProcedureError> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let src = MassSource::pseudo_random(crate::mass::splitmix64(seed ^ i.wrapping_mul(0x9E37)));
            let mut o = Oracle::new(cfg.clone().with_seed(seed.wrapping_add(i)), src)?;
            o.set_recording(false);
            Ok(!grid_algorithm(&mut o, r)?.is_complete())
        })
        .collect();
    let failures = failures?;
    Ok(failures.iter().filter(|&&f| f).count() as f64 / samples.max(1) as f64)
}

/// Fraction of uniform masses for which `P_k` fails at some `n <= n_max`.
pub fn pk_failure_fraction(cfg: &OracleConfig, k: u64, n_max: u64, samples: u64, seed: u64) -> Result<f64, ProcedureError> {
    let failures: Result<Vec<bool>, ProcedureError> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let src = MassSource::pseudo_random(crate::mass::splitmix64(seed ^ i.wrapping_mul(0x51ED)));
            for n in 1..=n_max {
                let mut o = Oracle::new(cfg.clone(), src.clone())?;
                o.set_recording(false);
                if !program_pk(&mut o, k, n)?.is_complete() {
                    return Ok(true);
                }
            }
            Ok(false)
        })
        .collect();
    let failures = failures?;
    Ok(failures.iter().filter(|&&f| f).count() as f64 / samples.max(1) as f64)
}

/// An exponential schedule `c 2^n` under which bisection reads a rational
/// `p/q` in lowest terms: every stage-`i` midpoint is at least `1/(q 2^i)`
/// away, so `c = K q / 2` suffices.
pub fn rational_schedule(k_const: &BigRational, q: &BigInt) -> Schedule {
    let c = k_const * BigRational::new(q.clone(), BigInt::from(2));
    Schedule::exponential(2, SimTime::from_rational(c)).expect("positive scale")
}

/// Same for run-length masses with every block at most `bound`:
/// stage `j` is at least `2^-(j + bound + 1)` away.
pub fn bounded_runs_schedule(k_const: &BigRational, bound: u64) -> Schedule {
    let c = SimTime::scaled_pow2(&SimTime::from_rational(k_const.clone()), bound);
    Schedule::exponential(2, c).expect("positive scale")
}

/// Lowest-terms denominator helper for rational corpora.
pub fn reduced_denominator(p: u64, q: u64) -> u64 {
    q / p.gcd(&q)
}
