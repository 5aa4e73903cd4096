//! Text notations for masses and schedules.
//!
//! Masses come in a short form for the command line (`rational:1/3`,
//! `pattern:3,2,4;tail=const:3`) and a line-oriented file form
//! (`kind=rational p=1 q=3`). Schedules use the short form only
//! (`exp:k=2`, `alg:k=2,alpha=4`, `table:1,2,4`, `const:64`).

use std::fmt;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use num_rational::BigRational;
use thiserror::Error;

use crate::advice::{AdviceFunction, Alphabet};
use crate::dyadic::Dyadic;
use crate::mass::{adversarial_mass, MassSource, RunLengths, Tail};
use crate::schedule::{liouville_alpha, Schedule};
use crate::time::{parse_rational, SimTime};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{origin}:{line}:{column}: {msg}")]
pub struct NotationError {
    pub origin: String,
    pub line: usize,
    pub column: usize,
    pub msg: String,
}

impl NotationError {
    fn at(column: usize, msg: impl Into<String>) -> Self {
        Self { origin: "<arg>".into(), line: 1, column, msg: msg.into() }
    }

    fn in_file(mut self, origin: &str, line: usize, offset: usize) -> Self {
        self.origin = origin.to_string();
        self.line = line;
        self.column += offset;
        self
    }
}

/// How run lengths continue after the listed ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TailSpec {
    Finite,
    Const(u64),
    Linear(u64, u64),
    Cycle(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MassSpec {
    Rational {
        p: BigUint,
        q: BigUint,
    },
    Dyadic(Dyadic),
    Pattern {
        head: Vec<u64>,
        tail: TailSpec,
    },
    /// Diagonalizes against the schedule in force.
    Adversarial,
    Advice {
        path: PathBuf,
        alphabet: Alphabet,
    },
    Random(u64),
    Sqrt(u64),
    /// A mass file; resolved by [`MassSpec::resolve`].
    File(PathBuf),
}

impl fmt::Display for MassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MassSpec::Rational { p, q } => write!(f, "rational:{p}/{q}"),
            MassSpec::Dyadic(d) => write!(f, "dyadic:{d}"),
            MassSpec::Pattern { head, tail } => {
                let h: Vec<String> = head.iter().map(u64::to_string).collect();
                write!(f, "pattern:{}", h.join(","))?;
                match tail {
                    TailSpec::Finite => Ok(()),
                    TailSpec::Const(c) => write!(f, ";tail=const:{c}"),
                    TailSpec::Linear(a, b) => write!(f, ";tail=linear:{a},{b}"),
                    TailSpec::Cycle(i) => write!(f, ";tail=cycle:{i}"),
                }
            }
            MassSpec::Adversarial => write!(f, "adversarial:from-schedule"),
            MassSpec::Advice { path, alphabet } => match alphabet {
                Alphabet::Binary => write!(f, "advice:{}", path.display()),
                Alphabet::FixedWidth(w) => write!(f, "advice:{};width={w}", path.display()),
            },
            MassSpec::Random(s) => write!(f, "random:{s}"),
            MassSpec::Sqrt(k) => write!(f, "sqrt:{k}"),
            MassSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

fn number<T: std::str::FromStr>(text: &str, column: usize, what: &str) -> Result<T, NotationError> {
    text.trim().parse().map_err(|_| NotationError::at(column, format!("expected {what}, found {text:?}")))
}

fn list(text: &str, column: usize) -> Result<Vec<u64>, NotationError> {
    let mut out = Vec::new();
    let mut col = column;
    for item in text.split(',') {
        if !item.trim().is_empty() && item.trim() != "..." {
            out.push(number(item, col, "a non-negative integer")?);
        }
        col += item.len() + 1;
    }
    Ok(out)
}

fn tail(text: &str, column: usize) -> Result<TailSpec, NotationError> {
    let (name, arg) = text.split_once(':').unwrap_or((text, ""));
    let acol = column + name.len() + 1;
    match name {
        "finite" => Ok(TailSpec::Finite),
        "const" => Ok(TailSpec::Const(number(arg, acol, "a run length")?)),
        "linear" => {
            let v = list(arg, acol)?;
            match v.as_slice() {
                [a, b] => Ok(TailSpec::Linear(*a, *b)),
                _ => Err(NotationError::at(acol, "linear tail takes slope,offset")),
            }
        }
        "cycle" => Ok(TailSpec::Cycle(number(arg, acol, "a block index")?)),
        other => Err(NotationError::at(column, format!("unknown tail generator {other:?}"))),
    }
}

fn rational_pair(text: &str, column: usize) -> Result<(BigUint, BigUint), NotationError> {
    let (p, q) = text.split_once('/').ok_or_else(|| NotationError::at(column, "expected p/q"))?;
    let p: BigUint = number(p, column, "a numerator")?;
    let q: BigUint = number(q, column + p.to_string().len() + 1, "a denominator")?;
    Ok((p, q))
}

impl MassSpec {
    /// Parse the short form `kind:argument`.
    pub fn parse_short(s: &str) -> Result<Self, NotationError> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| NotationError::at(1, "expected kind:argument"))?;
        let col = kind.len() + 2;
        match kind {
            "rational" => {
                let (p, q) = rational_pair(rest, col)?;
                Ok(MassSpec::Rational { p, q })
            }
            "dyadic" => rest.parse().map(MassSpec::Dyadic).map_err(|e| NotationError::at(col, e.to_string())),
            "pattern" => {
                let mut parts = rest.split(';');
                let head = list(parts.next().unwrap_or(""), col)?;
                let mut t = TailSpec::Finite;
                let mut c = col + rest.split(';').next().map_or(0, str::len) + 1;
                for part in parts {
                    match part.split_once('=') {
                        Some(("tail", v)) => t = tail(v, c + 5)?,
                        _ => return Err(NotationError::at(c, format!("unexpected {part:?}"))),
                    }
                    c += part.len() + 1;
                }
                Ok(MassSpec::Pattern { head, tail: t })
            }
            "adversarial" => match rest {
                "from-schedule" | "" => Ok(MassSpec::Adversarial),
                _ => Err(NotationError::at(col, "only adversarial:from-schedule is supported")),
            },
            "advice" => {
                let (path, opts) = rest.split_once(';').unwrap_or((rest, ""));
                let alphabet = match opts.strip_prefix("width=") {
                    None if opts.is_empty() => Alphabet::Binary,
                    Some(w) => Alphabet::FixedWidth(number(w, col + path.len() + 7, "a letter width")?),
                    None => return Err(NotationError::at(col + path.len() + 1, "expected width=N")),
                };
                Ok(MassSpec::Advice { path: PathBuf::from(path), alphabet })
            }
            "random" => Ok(MassSpec::Random(number(rest, col, "a seed")?)),
            "sqrt" => Ok(MassSpec::Sqrt(number(rest, col, "a non-square integer")?)),
            "file" => Ok(MassSpec::File(PathBuf::from(rest))),
            other => Err(NotationError::at(1, format!("unknown mass kind {other:?}"))),
        }
    }

    /// Parse one `key=value` line of a mass file.
    pub fn parse_line(line: &str) -> Result<Self, NotationError> {
        let mut fields: Vec<(&str, &str, usize)> = Vec::new();
        let mut col = 1;
        for tok in line.split(' ') {
            if !tok.is_empty() {
                let (k, v) = tok.split_once('=').ok_or_else(|| NotationError::at(col, format!("expected key=value, found {tok:?}")))?;
                fields.push((k, v, col));
            }
            col += tok.len() + 1;
        }
        let get = |key: &str| fields.iter().find(|f| f.0 == key).map(|f| (f.1, f.2 + key.len() + 1));
        let need = |key: &str| get(key).ok_or_else(|| NotationError::at(1, format!("missing {key}=")));
        for (k, _, c) in &fields {
            if !["kind", "p", "q", "x", "u", "tail", "file", "width", "seed", "k"].contains(k) {
                return Err(NotationError::at(*c, format!("unknown key {k:?}")));
            }
        }
        let (kind, kcol) = need("kind")?;
        match kind {
            "rational" => {
                let (p, pc) = need("p")?;
                let (q, qc) = need("q")?;
                Ok(MassSpec::Rational { p: number(p, pc, "a numerator")?, q: number(q, qc, "a denominator")? })
            }
            "dyadic" => {
                let (x, xc) = need("x")?;
                x.parse().map(MassSpec::Dyadic).map_err(|e| NotationError::at(xc, e.to_string()))
            }
            "pattern" => {
                let (u, uc) = need("u")?;
                let t = match get("tail") {
                    Some((t, tc)) => tail(t, tc)?,
                    None => TailSpec::Finite,
                };
                Ok(MassSpec::Pattern { head: list(u, uc)?, tail: t })
            }
            "adversarial" => Ok(MassSpec::Adversarial),
            "advice" => {
                let (f, _) = need("file")?;
                let alphabet = match get("width") {
                    Some((w, wc)) => Alphabet::FixedWidth(number(w, wc, "a letter width")?),
                    None => Alphabet::Binary,
                };
                Ok(MassSpec::Advice { path: PathBuf::from(f), alphabet })
            }
            "random" => {
                let (s, sc) = need("seed")?;
                Ok(MassSpec::Random(number(s, sc, "a seed")?))
            }
            "sqrt" => {
                let (k, kc) = need("k")?;
                Ok(MassSpec::Sqrt(number(k, kc, "a non-square integer")?))
            }
            other => Err(NotationError::at(kcol, format!("unknown mass kind {other:?}"))),
        }
    }

    /// Parse a mass file: the first non-blank, non-comment line is the mass.
    pub fn parse_file(text: &str, origin: &str) -> Result<Self, NotationError> {
        for (i, raw) in text.lines().enumerate() {
            let body = raw.split('#').next().unwrap_or("");
            let trimmed = body.trim_start();
            if trimmed.trim().is_empty() {
                continue;
            }
            let offset = body.len() - trimmed.len();
            return MassSpec::parse_line(trimmed.trim_end()).map_err(|e| e.in_file(origin, i + 1, offset));
        }
        Err(NotationError { origin: origin.into(), line: 1, column: 1, msg: "no mass in file".into() })
    }

    /// Replace `file:` references by their contents; relative advice paths
    /// are taken relative to the mass file.
    pub fn resolve(self) -> Result<Self, NotationError> {
        match self {
            MassSpec::File(path) => {
                let origin = path.display().to_string();
                let text = std::fs::read_to_string(&path).map_err(|e| NotationError {
                    origin: origin.clone(),
                    line: 0,
                    column: 0,
                    msg: e.to_string(),
                })?;
                let spec = MassSpec::parse_file(&text, &origin)?;
                Ok(match spec {
                    MassSpec::Advice { path: p, alphabet } if p.is_relative() => {
                        let base = path.parent().unwrap_or(Path::new("."));
                        MassSpec::Advice { path: base.join(p), alphabet }
                    }
                    other => other,
                })
            }
            other => Ok(other),
        }
    }

    /// Build the source; `schedule` and `k_const` feed the adversarial kind.
    pub fn build(&self, schedule: &Schedule, k_const: &BigRational) -> Result<MassSource, NotationError> {
        let fail = |msg: String| NotationError::at(1, msg);
        match self {
            MassSpec::Rational { p, q } => {
                if q == &BigUint::ZERO {
                    return Err(fail("zero denominator".into()));
                }
                let v = BigRational::new(p.clone().into(), q.clone().into());
                MassSource::from_big_rational(&v).map_err(|e| fail(e.to_string()))
            }
            MassSpec::Dyadic(d) => Ok(MassSource::from_dyadic(d.clone())),
            MassSpec::Pattern { head, tail } => {
                let t = match tail {
                    TailSpec::Finite => Tail::Finite,
                    TailSpec::Const(c) => Tail::Const(*c),
                    TailSpec::Linear(a, b) => Tail::Linear { slope: *a, offset: *b },
                    TailSpec::Cycle(i) => Tail::Cycle { from: *i },
                };
                let u = RunLengths::new(head.clone(), t).map_err(|e| fail(e.to_string()))?;
                MassSource::from_run_lengths(u).map_err(|e| fail(e.to_string()))
            }
            MassSpec::Adversarial => {
                let u = adversarial_mass(schedule, k_const).map_err(|e| fail(e.to_string()))?;
                MassSource::from_run_lengths(u).map_err(|e| fail(e.to_string()))
            }
            MassSpec::Advice { path, alphabet } => {
                let origin = path.display().to_string();
                let text = std::fs::read_to_string(path).map_err(|e| NotationError {
                    origin: origin.clone(),
                    line: 0,
                    column: 0,
                    msg: e.to_string(),
                })?;
                let f = AdviceFunction::from_corpus(origin.clone(), &text, *alphabet).map_err(|e| {
                    let line = match e {
                        crate::advice::AdviceError::Corpus { line, .. } => line,
                        _ => 0,
                    };
                    NotationError { origin, line, column: 1, msg: e.to_string() }
                })?;
                Ok(MassSource::from_advice(f))
            }
            MassSpec::Random(s) => Ok(MassSource::pseudo_random(*s)),
            MassSpec::Sqrt(k) => MassSource::sqrt_fraction(*k).map_err(|e| fail(e.to_string())),
            MassSpec::File(_) => self.clone().resolve()?.build(schedule, k_const),
        }
    }
}

/// Parse a schedule. `k_const` is the default scale where one applies.
pub fn parse_schedule(s: &str, k_const: &BigRational) -> Result<Schedule, NotationError> {
    let (kind, rest) = s.split_once(':').ok_or_else(|| NotationError::at(1, "expected kind:parameters"))?;
    let col = kind.len() + 2;
    let k_time = SimTime::from_rational(k_const.clone());
    let params = || -> Result<Vec<(&str, &str, usize)>, NotationError> {
        let mut out = Vec::new();
        let mut c = col;
        for item in rest.split(',').filter(|i| !i.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| NotationError::at(c, format!("expected key=value, found {item:?}")))?;
            out.push((k, v, c + k.len() + 1));
            c += item.len() + 1;
        }
        Ok(out)
    };
    let time = |v: &str, c: usize| -> Result<SimTime, NotationError> {
        parse_rational(v).map(SimTime::from_rational).map_err(|e| NotationError::at(c, e))
    };
    let bad = |e: crate::schedule::ScheduleError| NotationError::at(col, e.to_string());
    match kind {
        "exp" => {
            let ps = params()?;
            let mut scale = k_time;
            let mut base = None;
            for (k, v, c) in ps {
                match k {
                    "k" => {
                        base = Some(
                            1u64.checked_shl(number::<u32>(v, c, "an exponent")?)
                                .filter(|b| *b > 0)
                                .ok_or_else(|| NotationError::at(c, "exponent too large"))?,
                        )
                    }
                    "base" => base = Some(number(v, c, "a base")?),
                    "scale" => scale = time(v, c)?,
                    other => return Err(NotationError::at(c - other.len() - 1, format!("unknown parameter {other:?}"))),
                }
            }
            let base = base.ok_or_else(|| NotationError::at(col, "exp needs k= or base="))?;
            Schedule::exponential(base, scale).map_err(bad)
        }
        "alg" => {
            let ps = params()?;
            let mut order = None;
            let mut alpha = None;
            let mut liouville = None;
            for (k, v, c) in ps {
                match k {
                    "k" => order = Some(number::<u32>(v, c, "an order")?),
                    "alpha" => alpha = Some(time(v, c)?),
                    "R" => liouville = Some(parse_rational(v).map_err(|e| NotationError::at(c, e))?),
                    other => return Err(NotationError::at(c - other.len() - 1, format!("unknown parameter {other:?}"))),
                }
            }
            let order = order.ok_or_else(|| NotationError::at(col, "alg needs k="))?;
            let alpha = match (alpha, liouville) {
                (Some(a), _) => a,
                (None, Some(r)) => liouville_alpha(order, &r, k_const),
                (None, None) => return Err(NotationError::at(col, "alg needs alpha= or R=")),
            };
            Schedule::algebraic(order, alpha).map_err(bad)
        }
        "table" => {
            let mut values = Vec::new();
            let mut c = col;
            for item in rest.split(',') {
                values.push(time(item, c)?);
                c += item.len() + 1;
            }
            Schedule::tabular(values).map_err(bad)
        }
        "const" => Schedule::constant(time(rest, col)?).map_err(bad),
        other => Err(NotationError::at(1, format!("unknown schedule kind {other:?}"))),
    }
}
