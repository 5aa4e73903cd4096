//! One-dimensional elastic collision between the test mass `m` (moving at
//! speed `u`) and the unknown mass `mu` at rest, with flags at distance `r`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::dyadic::Dyadic;
use crate::mass::{gap_probe, GapProbe, MassSource, Side};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhysicsError {
    #[error("both masses are zero; the collision is undefined")]
    MasslessCollision,
    #[error("equal masses: the experiment never ends and the uncertainty product is undefined")]
    EqualMasses,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

/// Exact rational inputs of one experiment.
#[derive(Debug, Clone)]
pub struct CollisionSetup {
    pub m: Dyadic,
    pub mu: BigRational,
    pub u: BigRational,
    pub r: BigRational,
}

impl CollisionSetup {
    pub fn new(m: Dyadic, mu: BigRational, u: BigRational, r: BigRational) -> Result<Self, PhysicsError> {
        if !u.is_positive() {
            return Err(PhysicsError::NonPositive("speed u"));
        }
        if !r.is_positive() {
            return Err(PhysicsError::NonPositive("flag distance r"));
        }
        Ok(Self { m, mu, u, r })
    }

    pub fn velocities(&self) -> Result<KinematicResult, PhysicsError> {
        post_collision_velocities(&self.m, &self.mu, &self.u)
    }

    pub fn time(&self) -> ExperimentTime {
        experiment_time(&self.m, &self.mu, &self.u, &self.r)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KinematicResult {
    pub v_m: BigRational,
    pub v_mu: BigRational,
}

/// Which flag the test particle crosses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Outcome {
    /// Crossed `P-`: the test particle bounced back, `m < mu`.
    Lesser,
    /// Crossed `P+`: the test particle kept moving, `m > mu`.
    Greater,
    /// Came to rest (`m = mu`) or not separated within the budget.
    NoResult,
}

impl Outcome {
    /// The outcome implied by the test particle's velocity after impact.
    pub fn from_velocity(v_m: &BigRational) -> Self {
        if v_m.is_negative() {
            Outcome::Lesser
        } else if v_m.is_positive() {
            Outcome::Greater
        } else {
            Outcome::NoResult
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExperimentTime {
    Finite(BigRational),
    Infinite,
}

impl ExperimentTime {
    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            ExperimentTime::Finite(t) => Some(t),
            ExperimentTime::Infinite => None,
        }
    }
}

/// `v_m = (m - mu)/(m + mu) u`, `v_mu = 2m/(m + mu) u`.
pub fn post_collision_velocities(m: &Dyadic, mu: &BigRational, u: &BigRational) -> Result<KinematicResult, PhysicsError> {
    let m = m.to_rational();
    let total = &m + mu;
    if total.is_zero() {
        return Err(PhysicsError::MasslessCollision);
    }
    let v_m = (&m - mu) / &total * u;
    let v_mu = BigRational::from_integer(BigInt::from(2)) * &m / &total * u;
    Ok(KinematicResult { v_m, v_mu })
}

/// Time for the test particle to reach a flag after impact:
/// `(r/u) (m + mu) / |m - mu|`, infinite when the masses coincide.
pub fn experiment_time(m: &Dyadic, mu: &BigRational, u: &BigRational, r: &BigRational) -> ExperimentTime {
    let m = m.to_rational();
    let gap = (&m - mu).abs();
    if gap.is_zero() {
        return ExperimentTime::Infinite;
    }
    ExperimentTime::Finite(r / u * (&m + mu) / gap)
}

/// Compare `m` with the stream `src` up to `depth_budget` places.
pub fn classify_outcome(m: &Dyadic, src: &MassSource, depth_budget: u64) -> Outcome {
    match gap_probe(src, m, depth_budget) {
        GapProbe::ProvenGap { side: Side::Below, .. } => Outcome::Lesser,
        GapProbe::ProvenGap { side: Side::Above, .. } => Outcome::Greater,
        GapProbe::Unresolved { .. } => Outcome::NoResult,
    }
}

/// `|m - mu| * t`, which collapses to `(m + mu) r / u`.
pub fn uncertainty_product(m: &Dyadic, mu: &BigRational, u: &BigRational, r: &BigRational) -> Result<BigRational, PhysicsError> {
    let gap = (m.to_rational() - mu).abs();
    match experiment_time(m, mu, u, r) {
        ExperimentTime::Finite(t) => Ok(gap * t),
        ExperimentTime::Infinite => Err(PhysicsError::EqualMasses),
    }
}
