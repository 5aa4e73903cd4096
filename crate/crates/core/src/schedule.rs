//! Time schedules `n -> T(n)`: the budget an experimental procedure allots to
//! a query whose word has length `n`.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow};
use thiserror::Error;

use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("schedule parameter {0} must be positive")]
    NonPositive(&'static str),
    #[error("tabular schedule must be non-empty and non-decreasing (entry {0} drops)")]
    NotMonotone(usize),
}

#[derive(Clone)]
pub enum ScheduleKind {
    /// `scale * base^n`
    Exponential {
        base: u64,
        scale: SimTime,
    },
    /// `alpha * n * 2^(order * n)`
    AlgebraicLiouville {
        order: u32,
        alpha: SimTime,
    },
    /// Listed values for `n = 1, 2, ...`; the last entry repeats.
    Tabular(Vec<SimTime>),
    Custom {
        name: String,
        rule: Arc<dyn Fn(u64) -> SimTime + Send + Sync>,
    },
}

#[derive(Clone)]
pub struct Schedule {
    kind: ScheduleKind,
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Schedule({})", self.describe())
    }
}

impl Schedule {
    pub fn exponential(base: u64, scale: SimTime) -> Result<Self, ScheduleError> {
        if base == 0 {
            return Err(ScheduleError::NonPositive("base"));
        }
        if !scale.is_positive() {
            return Err(ScheduleError::NonPositive("scale"));
        }
        Ok(Self { kind: ScheduleKind::Exponential { base, scale } })
    }

    /// `scale * 2^(k n)`.
    pub fn exp2(k: u32, scale: SimTime) -> Result<Self, ScheduleError> {
        Self::exponential(1u64 << k, scale)
    }

    pub fn algebraic(order: u32, alpha: SimTime) -> Result<Self, ScheduleError> {
        if order == 0 {
            return Err(ScheduleError::NonPositive("order"));
        }
        if !alpha.is_positive() {
            return Err(ScheduleError::NonPositive("alpha"));
        }
        Ok(Self { kind: ScheduleKind::AlgebraicLiouville { order, alpha } })
    }

    pub fn tabular(values: Vec<SimTime>) -> Result<Self, ScheduleError> {
        if values.is_empty() {
            return Err(ScheduleError::NotMonotone(0));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(ScheduleError::NotMonotone(i + 2));
        }
        if !values[0].is_positive() {
            return Err(ScheduleError::NonPositive("table entry"));
        }
        Ok(Self { kind: ScheduleKind::Tabular(values) })
    }

    pub fn constant(t: SimTime) -> Result<Self, ScheduleError> {
        Self::tabular(vec![t])
    }

    /// No constructibility check is made for custom rules.
    pub fn custom<F>(name: impl Into<String>, rule: F) -> Self
    where
        F: Fn(u64) -> SimTime + Send + Sync + 'static,
    {
        Self { kind: ScheduleKind::Custom { name: name.into(), rule: Arc::new(rule) } }
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn evaluate(&self, n: u64) -> SimTime {
        match &self.kind {
            ScheduleKind::Exponential { base, scale } => {
                let p: BigUint = Pow::pow(BigUint::from(*base), n);
                scale * &BigRational::from_integer(BigInt::from(p))
            }
            ScheduleKind::AlgebraicLiouville { order, alpha } => {
                let factor = BigInt::from(n) * BigInt::from(BigUint::one() << (*order as u64 * n));
                alpha * &BigRational::from_integer(factor)
            }
            ScheduleKind::Tabular(values) => {
                let i = (n.max(1) as usize).min(values.len()) - 1;
                values[i].clone()
            }
            ScheduleKind::Custom { rule, .. } => rule(n),
        }
    }

    /// Built-in schedules are time-constructible by construction.
    pub fn is_time_constructible(&self) -> bool {
        !matches!(self.kind, ScheduleKind::Custom { .. })
    }

    /// Pointwise multiple `factor * T(n)`.
    pub fn scaled(&self, factor: SimTime) -> Schedule {
        let inner = self.clone();
        let name = format!("{}*({})", factor, self.describe());
        Schedule::custom(name, move |n| inner.evaluate(n) * factor.as_rational())
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            ScheduleKind::Exponential { base, scale } => format!("exp:base={base},scale={scale}"),
            ScheduleKind::AlgebraicLiouville { order, alpha } => format!("alg:k={order},alpha={alpha}"),
            ScheduleKind::Tabular(v) => {
                let items: Vec<String> = v.iter().map(SimTime::to_string).collect();
                format!("table:{}", items.join(","))
            }
            ScheduleKind::Custom { name, .. } => format!("custom:{name}"),
        }
    }
}

/// `alpha` for which `alpha n 2^(k n)` covers a mass with Liouville bound
/// `|x - a/b| >= R / b^k`. The bisection query at stage `i` has denominator
/// `2^i` and word length `i + 1`, so it needs at most `K 2^(k i) / R`; this
/// is covered once `alpha 2^k >= K / R`.
pub fn liouville_alpha(order: u32, liouville_r: &BigRational, k_const: &BigRational) -> SimTime {
    let two_k = BigRational::from_integer(BigInt::from(BigUint::one() << order as u64));
    SimTime::from_rational(k_const / (liouville_r * two_k))
}
