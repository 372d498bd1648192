//! Utilities, link functions and the duel oracle.

use nalgebra::DVector;
use rand::Rng;

use crate::corruption::{adversarial_signed_corruption, BudgetLedger, CorruptionSchedule};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{ActionSpace, ActionVector};
use crate::SimRng;

/// The user's (true) utility over actions.
#[derive(Debug, Clone, PartialEq)]
pub enum UtilityFunction {
    /// `θ·a − ½‖a‖²`, 1-strongly concave with maximizer `θ`.
    QuadraticConcave { theta: DVector<f64> },
    /// `θ·a`.
    Linear { theta: DVector<f64> },
    /// `scale · cos∠(pref, a)`, taking values in `[−scale, scale]`.
    RescaledCosine { pref: DVector<f64>, scale: f64 },
}

impl UtilityFunction {
    pub fn dim(&self) -> usize {
        match self {
            Self::QuadraticConcave { theta } | Self::Linear { theta } => theta.len(),
            Self::RescaledCosine { pref, .. } => pref.len(),
        }
    }

    pub fn value(&self, a: &ActionVector) -> Result<f64> {
        check_dim(self.dim(), a.len())?;
        match self {
            Self::QuadraticConcave { theta } => Ok(theta.dot(a) - 0.5 * a.norm_squared()),
            Self::Linear { theta } => Ok(theta.dot(a)),
            Self::RescaledCosine { pref, scale } => {
                let na = a.norm();
                let np = pref.norm();
                if na == 0.0 || np == 0.0 {
                    return Err(Error::ZeroVector);
                }
                Ok(scale * (pref.dot(a) / (na * np)).clamp(-1.0, 1.0))
            }
        }
    }

    /// Maximizer of the utility over `space`, with its value.
    pub fn maximize(&self, space: &ActionSpace) -> Result<(ActionVector, f64)> {
        check_dim(space.dim(), self.dim())?;
        if let ActionSpace::Discrete(c) = space {
            return best_item(c.rows().map(DVector::from_column_slice), |a| self.value(a), true);
        }
        let best = match (self, space) {
            // argmax of θ·a − ½‖a‖² over a convex set is the projection of θ
            (Self::QuadraticConcave { theta }, _) => space.project(theta)?,
            (Self::Linear { theta }, ActionSpace::Ball { radius, .. })
            | (Self::RescaledCosine { pref: theta, .. }, ActionSpace::Ball { radius, .. }) => {
                let n = theta.norm();
                if n == 0.0 {
                    DVector::zeros(theta.len())
                } else {
                    theta * (*radius / n)
                }
            }
            (Self::Linear { .. }, ActionSpace::Polytope(p)) => {
                return best_item(p.vertices().iter().cloned(), |a| self.value(a), true)
            }
            (Self::RescaledCosine { .. }, ActionSpace::Polytope(_)) => {
                return Err(Error::InvalidParameter(
                    "cosine utility over a polytope has no closed-form maximizer".into(),
                ))
            }
            (_, ActionSpace::Discrete(_)) => unreachable!(),
        };
        let v = self.value(&best)?;
        Ok((best, v))
    }

    /// Minimum of the utility over `space`. Concave utilities attain it on
    /// the boundary (ball) or at a vertex (polytope).
    pub fn minimum(&self, space: &ActionSpace) -> Result<f64> {
        check_dim(space.dim(), self.dim())?;
        match (self, space) {
            (_, ActionSpace::Discrete(c)) => {
                best_item(c.rows().map(DVector::from_column_slice), |a| self.value(a), false).map(|(_, v)| v)
            }
            (_, ActionSpace::Polytope(p)) => {
                best_item(p.vertices().iter().cloned(), |a| self.value(a), false).map(|(_, v)| v)
            }
            (Self::QuadraticConcave { theta }, ActionSpace::Ball { radius, .. }) => {
                Ok(-radius * theta.norm() - 0.5 * radius * radius)
            }
            (Self::Linear { theta }, ActionSpace::Ball { radius, .. }) => Ok(-radius * theta.norm()),
            (Self::RescaledCosine { scale, .. }, ActionSpace::Ball { .. }) => Ok(-scale),
        }
    }
}

fn best_item(
    items: impl Iterator<Item = DVector<f64>>,
    f: impl Fn(&DVector<f64>) -> Result<f64>,
    maximize: bool,
) -> Result<(ActionVector, f64)> {
    let mut best: Option<(ActionVector, f64)> = None;
    for a in items {
        let v = f(&a)?;
        let better = match &best {
            None => true,
            Some((_, bv)) => (maximize && v > *bv) || (!maximize && v < *bv),
        };
        if better {
            best = Some((a, v));
        }
    }
    best.ok_or_else(|| Error::InvalidSpace("no candidate actions".into()))
}

/// Maps a utility difference to a win probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkFunction {
    Logistic,
    /// `(1 + x)/2` with `x` clamped to `[−1, 1]`.
    Linear,
}

impl LinkFunction {
    pub fn prob(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::NanInput);
        }
        Ok(match self {
            Self::Logistic => {
                if x >= 0.0 {
                    1.0 / (1.0 + (-x).exp())
                } else {
                    let e = x.exp();
                    e / (1.0 + e)
                }
            }
            Self::Linear => 0.5 * (1.0 + x.clamp(-1.0, 1.0)),
        })
    }

    /// Derivative of the link (one-sided at the clamp corners of the linear link).
    pub fn slope(&self, x: f64) -> f64 {
        match self {
            Self::Logistic => {
                let p = 1.0 / (1.0 + (-x.abs()).exp());
                p * (1.0 - p)
            }
            Self::Linear => {
                if x.abs() < 1.0 {
                    0.5
                } else {
                    0.0
                }
            }
        }
    }

    /// Largest slope of the link over the real line.
    pub fn max_slope(&self) -> f64 {
        match self {
            Self::Logistic => 0.25,
            Self::Linear => 0.5,
        }
    }

    /// Smallest slope over `[0, range]`. Both links have slopes that are
    /// non-increasing in `|x|`.
    pub fn min_slope_on(&self, range: f64) -> f64 {
        match self {
            Self::Logistic => self.slope(range),
            Self::Linear => {
                if range <= 1.0 {
                    0.5
                } else {
                    0.0
                }
            }
        }
    }
}

/// Result of one duel between `first` (index 0) and `second` (index 1).
#[derive(Debug, Clone, PartialEq)]
pub struct DuelOutcome {
    /// 0 when the first presented action won.
    pub winner: usize,
    /// Probability the first action wins, after corruption.
    pub corrupted_prob: f64,
    /// Probability the first action wins under the true utilities.
    pub clean_prob: f64,
    /// Signed corruption added to the utility difference.
    pub corruption_value: f64,
    /// Whether the outcome was forced (outcome-level corruption).
    pub forced: bool,
    pub round: u64,
}

impl DuelOutcome {
    pub fn first_won(&self) -> bool {
        self.winner == 0
    }
}

/// One duel: sample the user's (possibly corrupted) preference between `a` and `b`.
///
/// The corruption is added adversarially to `μ(a) − μ(b)`. Under `FlipFirst`,
/// the action with the lower true utility wins deterministically during the
/// corrupted stretch (ties go to `a`). Stateful schedules observe the pair
/// after the magnitude is computed.
pub fn duel(
    utility: &UtilityFunction,
    link: LinkFunction,
    schedule: &mut CorruptionSchedule,
    a: &ActionVector,
    b: &ActionVector,
    t: u64,
    rng: &mut SimRng,
) -> Result<DuelOutcome> {
    if t == 0 {
        return Err(Error::InvalidParameter("rounds are numbered from 1".into()));
    }
    let gap = utility.value(a)? - utility.value(b)?;
    let clean_prob = link.prob(gap)?;

    let outcome = if schedule.forces_outcome(t) {
        let winner = if gap <= 0.0 { 0 } else { 1 };
        DuelOutcome {
            winner,
            corrupted_prob: if winner == 0 { 1.0 } else { 0.0 },
            clean_prob,
            corruption_value: 0.0,
            forced: true,
            round: t,
        }
    } else {
        let magnitude = schedule.magnitude(t, a, b)?;
        let signed = adversarial_signed_corruption(gap, magnitude);
        let corrupted_prob = link.prob(gap + signed)?;
        let winner = if rng.random::<f64>() < corrupted_prob { 0 } else { 1 };
        DuelOutcome {
            winner,
            corrupted_prob,
            clean_prob,
            corruption_value: signed,
            forced: false,
            round: t,
        }
    };
    schedule.observe_pair(a, b)?;
    Ok(outcome)
}

/// A simulated user: utility, link, corruption schedule, ledger and its own RNG.
#[derive(Debug, Clone)]
pub struct DuelOracle {
    pub utility: UtilityFunction,
    pub link: LinkFunction,
    pub schedule: CorruptionSchedule,
    pub ledger: BudgetLedger,
    rng: SimRng,
}

impl DuelOracle {
    pub fn new(utility: UtilityFunction, link: LinkFunction, schedule: CorruptionSchedule, rng: SimRng) -> Self {
        Self {
            utility,
            link,
            schedule,
            ledger: BudgetLedger::default(),
            rng,
        }
    }

    pub fn duel(&mut self, a: &ActionVector, b: &ActionVector, t: u64) -> Result<DuelOutcome> {
        let out = duel(&self.utility, self.link, &mut self.schedule, a, b, t, &mut self.rng)?;
        self.ledger.record(out.corruption_value.abs(), out.forced);
        Ok(out)
    }
}
