//! The collider as an oracle: a query word sets the test mass, the
//! experiment runs against the unknown mass, and the answer either arrives
//! within the budget or the query times out.

use std::io::{self, Write};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dyadic::{Dyadic, QueryWord};
use crate::mass::{separation_at, MassSource, Side};
use crate::time::{parse_rational, SimTime};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("query {index} ({z}) timed out and the oracle is set to abort")]
    Aborted { index: u64, z: String },
    #[error("arbitrary-precision mode needs a per-query error")]
    PrecisionRequired,
    #[error("budget must be positive")]
    NonPositiveBudget,
    #[error("budget {budget} does not exceed the jitter bound {jitter}")]
    BudgetWithinJitter { budget: String, jitter: String },
    #[error("invalid oracle configuration: {0}")]
    Config(String),
}

/// How exactly the test mass can be set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrecisionMode {
    ErrorFree,
    /// Each query carries its own error bound.
    ArbitraryPrecision,
    /// One error bound for every query.
    FixedPrecision {
        epsilon: Dyadic,
    },
}

impl PrecisionMode {
    pub fn name(&self) -> &'static str {
        match self {
            PrecisionMode::ErrorFree => "errorfree",
            PrecisionMode::ArbitraryPrecision => "arbitrary",
            PrecisionMode::FixedPrecision { .. } => "fixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaitPolicy {
    /// The clock stops when the particle crosses a flag.
    InterruptDriven,
    /// The machine always waits out the whole budget.
    FullBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeoutReaction {
    Abort,
    ReturnTimeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimingModel {
    /// `K / |m - mu|` plus jitter.
    Protocol,
    /// `(r/u)(m + mu) / |m - mu|` plus jitter.
    Kinematic,
}

#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub k_const: BigRational,
    pub jitter: BigRational,
    pub u: BigRational,
    pub r: BigRational,
    pub mode: PrecisionMode,
    pub seed: u64,
    pub wait_policy: WaitPolicy,
    pub timeout_reaction: TimeoutReaction,
    pub timing: TimingModel,
    /// Apparatus setup cost per letter of the query word.
    pub c_setup: BigRational,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            k_const: BigRational::one(),
            jitter: BigRational::zero(),
            u: BigRational::one(),
            r: BigRational::one(),
            mode: PrecisionMode::ErrorFree,
            seed: 0,
            wait_policy: WaitPolicy::InterruptDriven,
            timeout_reaction: TimeoutReaction::ReturnTimeout,
            timing: TimingModel::Protocol,
            c_setup: BigRational::one(),
        }
    }
}

/// Numbers in the config file may be integers, floats or strings such as
/// `"1/3"` and `"3*2^4"`.
#[derive(Deserialize)]
#[serde(untagged)]
enum NumberField {
    Int(i64),
    Float(f64),
    Text(String),
}

impl NumberField {
    fn exact(self, key: &str) -> Result<BigRational, OracleError> {
        match self {
            NumberField::Int(i) => Ok(BigRational::from_integer(i.into())),
            NumberField::Float(f) => BigRational::from_float(f).ok_or_else(|| OracleError::Config(format!("{key} is not finite"))),
            NumberField::Text(s) => parse_rational(&s).map_err(|e| OracleError::Config(format!("{key}: {e}"))),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(rename = "K")]
    k: Option<NumberField>,
    #[serde(rename = "N")]
    n: Option<NumberField>,
    u: Option<NumberField>,
    r: Option<NumberField>,
    mode: Option<String>,
    epsilon: Option<String>,
    seed: Option<u64>,
    wait_policy: Option<WaitPolicy>,
    timeout_reaction: Option<TimeoutReaction>,
    timing: Option<TimingModel>,
    c_setup: Option<NumberField>,
}

impl OracleConfig {
    pub fn error_free(k_const: BigRational) -> Self {
        Self { k_const, ..Self::default() }
    }

    pub fn with_mode(mut self, mode: PrecisionMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_wait(mut self, w: WaitPolicy) -> Self {
        self.wait_policy = w;
        self
    }

    pub fn with_reaction(mut self, r: TimeoutReaction) -> Self {
        self.timeout_reaction = r;
        self
    }

    pub fn with_jitter(mut self, n: BigRational) -> Self {
        self.jitter = n;
        self
    }

    pub fn with_timing(mut self, t: TimingModel) -> Self {
        self.timing = t;
        self
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if !self.k_const.is_positive() {
            return Err(OracleError::Config("K must be positive".into()));
        }
        if self.jitter.is_negative() {
            return Err(OracleError::Config("N must be non-negative".into()));
        }
        if !self.u.is_positive() || !self.r.is_positive() {
            return Err(OracleError::Config("u and r must be positive".into()));
        }
        if self.c_setup.is_negative() {
            return Err(OracleError::Config("c_setup must be non-negative".into()));
        }
        if let PrecisionMode::FixedPrecision { epsilon } = &self.mode {
            if epsilon.is_zero() {
                return Err(OracleError::Config("epsilon must be positive".into()));
            }
        }
        Ok(())
    }

    /// Parse a TOML config; absent keys keep their defaults.
    pub fn from_toml(text: &str) -> Result<Self, OracleError> {
        let raw: ConfigFile = toml::from_str(text).map_err(|e| OracleError::Config(e.to_string()))?;
        let mut cfg = Self::default();
        if let Some(v) = raw.k {
            cfg.k_const = v.exact("K")?;
        }
        if let Some(v) = raw.n {
            cfg.jitter = v.exact("N")?;
        }
        if let Some(v) = raw.u {
            cfg.u = v.exact("u")?;
        }
        if let Some(v) = raw.r {
            cfg.r = v.exact("r")?;
        }
        if let Some(v) = raw.c_setup {
            cfg.c_setup = v.exact("c_setup")?;
        }
        let epsilon = match raw.epsilon {
            Some(e) => Some(e.parse::<Dyadic>().map_err(|err| OracleError::Config(format!("epsilon: {err}")))?),
            None => None,
        };
        cfg.mode = match raw.mode.as_deref().unwrap_or("errorfree") {
            "errorfree" => PrecisionMode::ErrorFree,
            "arbitrary" => PrecisionMode::ArbitraryPrecision,
            "fixed" => {
                PrecisionMode::FixedPrecision { epsilon: epsilon.ok_or_else(|| OracleError::Config("fixed mode needs epsilon".into()))? }
            }
            other => return Err(OracleError::Config(format!("unknown mode {other:?}"))),
        };
        cfg.seed = raw.seed.unwrap_or(0);
        cfg.wait_policy = raw.wait_policy.unwrap_or(cfg.wait_policy);
        cfg.timeout_reaction = raw.timeout_reaction.unwrap_or(cfg.timeout_reaction);
        cfg.timing = raw.timing.unwrap_or(cfg.timing);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let epsilon = match &self.mode {
            PrecisionMode::FixedPrecision { epsilon } => Some(epsilon.to_string()),
            _ => None,
        };
        serde_json::json!({
            "K": self.k_const.to_string(),
            "N": self.jitter.to_string(),
            "u": self.u.to_string(),
            "r": self.r.to_string(),
            "mode": self.mode.name(),
            "epsilon": epsilon,
            "seed": self.seed,
            "wait_policy": self.wait_policy,
            "timeout_reaction": self.timeout_reaction,
            "timing": self.timing,
            "c_setup": self.c_setup.to_string(),
        })
    }
}

/// `eta = K / (budget - N)`: test masses closer than this to `mu` may time out.
pub fn timeout_window(cfg: &OracleConfig, budget: &SimTime) -> Result<BigRational, OracleError> {
    let room = budget.as_rational() - &cfg.jitter;
    if !room.is_positive() {
        return Err(OracleError::BudgetWithinJitter { budget: budget.to_string(), jitter: cfg.jitter.to_string() });
    }
    Ok(&cfg.k_const / room)
}

/// Closed-form `(p, q, r)` for a fixed-precision shot at `z` with error
/// `eps` and timeout window `eta`, assuming `[mu - eta, mu + eta]` lies in
/// `[z - eps, z + eps]`.
pub fn fixed_precision_probabilities(
    z: &BigRational,
    mu: &BigRational,
    eps: &BigRational,
    eta: &BigRational,
) -> (BigRational, BigRational, BigRational) {
    let two_eps = eps * BigRational::from_integer(2.into());
    let p = (mu - eta + eps - z) / &two_eps;
    let q = (z + eps - mu - eta) / &two_eps;
    let r = (eta * BigRational::from_integer(2.into())) / &two_eps;
    (p, q, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Answer {
    /// The realized test mass is below `mu`.
    Lesser,
    /// The realized test mass is above `mu`.
    Greater,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryResult {
    pub answer: Answer,
    pub elapsed: SimTime,
    /// The test mass actually set; exact, so its interval is a point.
    pub realized_mass: Dyadic,
}

impl QueryResult {
    pub fn actual_mass_interval(&self) -> (Dyadic, Dyadic) {
        (self.realized_mass.clone(), self.realized_mass.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub index: u64,
    pub z: QueryWord,
    pub budget: SimTime,
    pub result: QueryResult,
}

#[derive(Debug, Clone, Serialize)]
struct EntryRecord<'a> {
    index: u64,
    z: String,
    len: usize,
    budget: &'a SimTime,
    answer: Answer,
    elapsed: &'a SimTime,
}

/// Append-only log of queries. With recording off only the totals are kept.
#[derive(Debug, Clone, Default)]
pub struct Transcript {
    entries: Vec<TranscriptEntry>,
    recording: bool,
    count: u64,
    total: SimTime,
    setup: SimTime,
}

impl Transcript {
    pub fn new() -> Self {
        Self { recording: true, ..Self::default() }
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn len(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn total_time(&self) -> &SimTime {
        &self.total
    }

    /// Setup charges, kept apart from experiment time.
    pub fn setup_time(&self) -> &SimTime {
        &self.setup
    }

    /// Sum of elapsed experiment times. Exact while recording; with
    /// recording off, times off the `2^-64` grid are rounded up to it first,
    /// so the total is an upper bound within `len() * 2^-64` of the exact sum.
    fn push(&mut self, elapsed: &SimTime, setup: &SimTime, entry: impl FnOnce() -> TranscriptEntry) {
        if self.recording || on_grid(elapsed) {
            self.total += elapsed;
        } else {
            self.total += &round_up_to_grid(elapsed);
        }
        self.setup += setup;
        self.count += 1;
        if self.recording {
            self.entries.push(entry());
        }
    }

    /// Query words and answers only, for replay comparisons.
    pub fn answer_trace(&self) -> Vec<(String, SimTime, Answer)> {
        self.entries.iter().map(|e| (e.z.to_string(), e.budget.clone(), e.result.answer)).collect()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.entries {
            let rec = EntryRecord {
                index: e.index,
                z: e.z.to_string(),
                len: e.z.len(),
                budget: &e.budget,
                answer: e.result.answer,
                elapsed: &e.result.elapsed,
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

const GRID_BITS: u64 = 64;

fn on_grid(t: &SimTime) -> bool {
    let d = t.as_rational().denom();
    d.bits() <= GRID_BITS + 1 && d.magnitude().count_ones() == 1
}

// Exact sums of unrelated rationals grow their denominators without bound,
// which makes long unrecorded runs quadratic.
fn round_up_to_grid(t: &SimTime) -> SimTime {
    let scale = BigInt::one() << GRID_BITS;
    let scaled = (t.as_rational() * BigRational::from_integer(scale.clone())).ceil().to_integer();
    SimTime::from_rational(BigRational::new(scaled, scale))
}

/// One oracle instance bound to an unknown mass.
pub struct Oracle {
    cfg: OracleConfig,
    src: MassSource,
    transcript: Transcript,
    exact: Option<ExactMass>,
    threshold: Option<Threshold>,
}

/// `mu = p / q` for sources with a known value.
struct ExactMass {
    p: BigInt,
    q: BigInt,
    value: BigRational,
}

/// For one `room`, `K q 2^D <= room |m q - p 2^D|` reads `lhs << D <= rhs * diff`.
struct Threshold {
    room: BigRational,
    lhs: BigUint,
    rhs: BigUint,
}

/// Extra digits read past the first decisive depth when a stream needs a
/// tighter physical-time bound.
const TIME_REFINE_DEPTH: u64 = 16;
/// Depth increments tried before a stream comparison is treated as a timeout.
const DEPTH_STEP: u64 = 16;
const DEPTH_TRIES: u64 = 32;

enum Decision {
    Answered(Side),
    Timeout,
}

impl Oracle {
    pub fn new(cfg: OracleConfig, src: MassSource) -> Result<Self, OracleError> {
        cfg.validate()?;
        let exact = src.exact_value().map(|value| ExactMass { p: value.numer().clone(), q: value.denom().clone(), value });
        Ok(Self { cfg, src, transcript: Transcript::new(), exact, threshold: None })
    }

    pub fn config(&self) -> &OracleConfig {
        &self.cfg
    }

    pub fn source(&self) -> &MassSource {
        &self.src
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }

    /// Keep per-query entries (default) or only the totals.
    pub fn set_recording(&mut self, on: bool) {
        self.transcript.recording = on;
    }

    /// Query in error-free or fixed-precision mode.
    pub fn query(&mut self, z: &QueryWord, budget: &SimTime) -> Result<QueryResult, OracleError> {
        let eps = match &self.cfg.mode {
            PrecisionMode::ErrorFree => None,
            PrecisionMode::FixedPrecision { epsilon } => Some(epsilon.clone()),
            PrecisionMode::ArbitraryPrecision => return Err(OracleError::PrecisionRequired),
        };
        self.run(z, budget, eps.as_ref())
    }

    /// Query with a per-query error; in error-free mode the error is ignored
    /// and in fixed-precision mode the global error wins.
    pub fn query_with_error(&mut self, z: &QueryWord, budget: &SimTime, eps: &Dyadic) -> Result<QueryResult, OracleError> {
        match &self.cfg.mode {
            PrecisionMode::ErrorFree => self.run(z, budget, None),
            PrecisionMode::ArbitraryPrecision => self.run(z, budget, Some(eps)),
            PrecisionMode::FixedPrecision { epsilon } => {
                let e = epsilon.clone();
                self.run(z, budget, Some(&e))
            }
        }
    }

    fn run(&mut self, z: &QueryWord, budget: &SimTime, eps: Option<&Dyadic>) -> Result<QueryResult, OracleError> {
        if !budget.is_positive() {
            return Err(OracleError::NonPositiveBudget);
        }
        let index = self.transcript.count;
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(index);
        let target = z.value();
        let realized = match eps {
            Some(e) if !e.is_zero() => perturb(&target, e, rng.random::<u64>()),
            _ => target,
        };
        let jitter = if self.cfg.jitter.is_zero() {
            BigRational::zero()
        } else {
            let v = ratio_u64(rng.random::<u64>());
            &self.cfg.jitter * (v * BigRational::from_integer(2.into()) - BigRational::one())
        };
        let room = budget.as_rational() - &jitter;
        let (answer, physical) = self.decide(&realized, &room, &jitter);
        let elapsed = match (answer, self.cfg.wait_policy) {
            (Answer::Timeout, _) | (_, WaitPolicy::FullBudget) => budget.clone(),
            (_, WaitPolicy::InterruptDriven) => {
                let t = physical.expect("answered queries carry a time under interrupt-driven waiting");
                let t = if t.is_negative() { BigRational::zero() } else { t };
                SimTime::from_rational(t.min(budget.as_rational().clone()))
            }
        };
        let result = QueryResult { answer, elapsed, realized_mass: realized };
        let setup = SimTime::from_rational(&self.cfg.c_setup * BigRational::from_integer(z.len().into()));
        self.transcript.push(&result.elapsed, &setup, || TranscriptEntry {
            index,
            z: z.clone(),
            budget: budget.clone(),
            result: result.clone(),
        });
        if answer == Answer::Timeout && self.cfg.timeout_reaction == TimeoutReaction::Abort {
            return Err(OracleError::Aborted { index, z: z.to_string() });
        }
        Ok(result)
    }

    /// `t = c / g + jitter <= budget` with `g = |m - mu|`, `c = K` or
    /// `(r/u)(m + mu)`, decided as `c <= room * g` where `room = budget - jitter`.
    fn decide(&mut self, m: &Dyadic, room: &BigRational, jitter: &BigRational) -> (Answer, Option<BigRational>) {
        if !room.is_positive() {
            return (Answer::Timeout, None);
        }
        if self.cfg.timing == TimingModel::Protocol && self.exact.is_some() {
            return self.decide_exact_protocol(m, room, jitter);
        }
        if let Some(mu) = self.exact.as_ref().map(|e| e.value.clone()) {
            let mr = m.to_rational();
            let diff = &mr - &mu;
            if diff.is_zero() {
                return (Answer::Timeout, None);
            }
            let g = diff.abs();
            let c = self.numerator(&mr, &mu);
            if c > room * &g {
                return (Answer::Timeout, None);
            }
            let side = if diff.is_negative() { Answer::Lesser } else { Answer::Greater };
            return (side, Some(c / g + jitter));
        }
        let (decision, depth) = self.decide_stream(m, room);
        match decision {
            Decision::Timeout => (Answer::Timeout, None),
            Decision::Answered(side) => {
                let t = self.time_upper_bound(m, depth + TIME_REFINE_DEPTH) + jitter;
                (side_answer(side), Some(t))
            }
        }
    }

    /// Integer-only comparison for the common case; the hot loop of the
    /// fixed-precision estimator runs through here.
    fn decide_exact_protocol(&mut self, m: &Dyadic, room: &BigRational, jitter: &BigRational) -> (Answer, Option<BigRational>) {
        let ex = self.exact.as_ref().expect("exact mass");
        let d = m.exponent();
        let diff = BigInt::from(m.numerator().clone()) * &ex.q - (&ex.p << d);
        if diff.is_zero() {
            return (Answer::Timeout, None);
        }
        if self.threshold.as_ref().is_none_or(|t| &t.room != room) {
            let k = &self.cfg.k_const;
            let lhs = (k.numer() * room.denom() * &ex.q).magnitude().clone();
            let rhs = (room.numer() * k.denom()).magnitude().clone();
            self.threshold = Some(Threshold { room: room.clone(), lhs, rhs });
        }
        let th = self.threshold.as_ref().expect("threshold just set");
        if (&th.lhs << d) > &th.rhs * diff.magnitude() {
            return (Answer::Timeout, None);
        }
        let side = if diff.is_negative() { Answer::Lesser } else { Answer::Greater };
        if self.cfg.wait_policy == WaitPolicy::FullBudget {
            return (side, None);
        }
        let ex = self.exact.as_ref().expect("exact mass");
        let g = (m.to_rational() - &ex.value).abs();
        (side, Some(&self.cfg.k_const / g + jitter))
    }

    fn numerator(&self, m: &BigRational, mu: &BigRational) -> BigRational {
        match self.cfg.timing {
            TimingModel::Protocol => self.cfg.k_const.clone(),
            TimingModel::Kinematic => &self.cfg.r / &self.cfg.u * (m + mu),
        }
    }

    /// Compare against a digit stream one cell at a time; deeper cells only
    /// tighten the bounds.
    fn decide_stream(&self, m: &Dyadic, room: &BigRational) -> (Decision, u64) {
        let mr = m.to_rational();
        // A gap below c_min / room always times out; look a little deeper.
        let c_min = match self.cfg.timing {
            TimingModel::Protocol => self.cfg.k_const.clone(),
            TimingModel::Kinematic => &self.cfg.r / &self.cfg.u * &mr,
        };
        let scale = if c_min.is_positive() { SimTime::from_rational(room / &c_min).floor_log2().unwrap_or(0).max(0) as u64 } else { 0 };
        let start = m.exponent().max(scale + 2);
        for step in 0..DEPTH_TRIES {
            let depth = start + step * DEPTH_STEP;
            let sep = separation_at(&self.src, m, depth);
            let pow = BigRational::from_integer(BigInt::from(BigUint::one() << depth));
            let mu_lo = BigRational::from_integer(sep.mu_lower.into()) / &pow;
            let mu_hi = BigRational::from_integer(sep.mu_upper.into()) / &pow;
            let c_lo = self.numerator(&mr, &mu_lo);
            let c_hi = self.numerator(&mr, &mu_hi);
            let g_lo = BigRational::from_integer(sep.lower.into()) / &pow;
            let g_hi = BigRational::from_integer(sep.upper.into()) / &pow;
            if c_lo > room * g_hi {
                return (Decision::Timeout, depth);
            }
            if let Some(side) = sep.side {
                if g_lo.is_positive() && c_hi <= room * g_lo {
                    return (Decision::Answered(side), depth);
                }
            }
        }
        // Only a gap sitting on the threshold itself gets here.
        (Decision::Timeout, start + (DEPTH_TRIES - 1) * DEPTH_STEP)
    }

    fn time_upper_bound(&self, m: &Dyadic, depth: u64) -> BigRational {
        let sep = separation_at(&self.src, m, depth);
        let pow = BigRational::from_integer(BigInt::from(BigUint::one() << depth));
        let mu_hi = BigRational::from_integer(sep.mu_upper.into()) / &pow;
        let g_lo = BigRational::from_integer(sep.lower.into()) / &pow;
        self.numerator(&m.to_rational(), &mu_hi) / g_lo
    }
}

fn side_answer(side: Side) -> Answer {
    match side {
        Side::Below => Answer::Lesser,
        Side::Above => Answer::Greater,
    }
}

fn ratio_u64(x: u64) -> BigRational {
    BigRational::new(BigInt::from(x), BigInt::from(BigUint::one() << 64u32))
}

/// `z - eps + 2 eps U` with `U = x / 2^64`, clipped to `[0, 1]`. Stays dyadic.
pub(crate) fn perturb(z: &Dyadic, eps: &Dyadic, x: u64) -> Dyadic {
    let depth = z.exponent().max(eps.exponent() + 63);
    let zn = BigInt::from(z.scaled_numerator(depth));
    // 2 eps U at depth: eps_num * 2^(depth - e_eps) * x / 2^63
    let en = BigInt::from(eps.scaled_numerator(depth));
    let offset = (&en * BigInt::from(x)) >> 63u32;
    let value = zn - &en + offset;
    let one = BigInt::from(BigUint::one() << depth);
    let clipped = if value.is_negative() {
        BigInt::zero()
    } else if value > one {
        one
    } else {
        value
    };
    Dyadic::new(clipped.to_biguint().expect("non-negative"), depth).expect("clipped into [0, 1]")
}

/// Empirical fraction helper used by Monte Carlo checks.
pub fn frequency(count: u64, total: u64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    count.to_f64().unwrap_or(0.0) / total as f64
}
