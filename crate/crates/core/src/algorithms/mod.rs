//! Dueling learners and their parameter schedules.
//!
//! Every learner follows the same two-step protocol per round `t`:
//! [`Learner::propose`] returns the pair shown to the user, and
//! [`Learner::observe`] receives the outcome of that duel.

mod bgd;
mod dbgd;
mod doubler;
mod rosmid;
mod sparring;

pub use bgd::{Bgd, BgdParams};
pub use dbgd::Dbgd;
pub use doubler::Doubler;
pub use rosmid::{RoSmid, RoSmidParams};
pub use sparring::Sparring;

use crate::error::{Error, Result};
use crate::geometry::ActionVector;
use crate::preference::DuelOutcome;

/// Uniform propose/observe protocol shared by all learners.
pub trait Learner: Send {
    /// The pair presented at round `t` (the first element is index 0 in the outcome).
    fn propose(&mut self, t: u64) -> Result<(ActionVector, ActionVector)>;

    /// Feed back the duel outcome for the pair proposed at round `t`.
    fn observe(&mut self, t: u64, outcome: &DuelOutcome) -> Result<()>;

    fn name(&self) -> &'static str;
}

impl<L: Learner + ?Sized> Learner for Box<L> {
    fn propose(&mut self, t: u64) -> Result<(ActionVector, ActionVector)> {
        (**self).propose(t)
    }

    fn observe(&mut self, t: u64, outcome: &DuelOutcome) -> Result<()> {
        (**self).observe(t, outcome)
    }

    fn name(&self) -> &'static str {
        (**self).name()
    }
}

/// How the mirror-descent learning rate is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateMode {
    /// `η = √(ln T) / (d · T^max(½, ρ))`, for a known imperfection level ρ.
    KnownRho(f64),
    /// `η = √(ln T) / (2d) · T^−α`, trading efficiency for robustness, α ∈ [½, 1).
    Alpha(f64),
}

/// Learning rate for [`RoSmid`].
pub fn schedule_rosmid(dim: usize, horizon: u64, mode: RateMode) -> Result<f64> {
    if horizon < 2 || dim == 0 {
        return Err(Error::InvalidParameter(format!(
            "learning-rate schedule needs T >= 2 and d >= 1 (got T={horizon}, d={dim})"
        )));
    }
    let t = horizon as f64;
    let d = dim as f64;
    match mode {
        RateMode::KnownRho(rho) if (0.0..=1.0).contains(&rho) => Ok(t.ln().sqrt() / (d * t.powf(rho.max(0.5)))),
        RateMode::KnownRho(rho) => Err(Error::InvalidParameter(format!("rho must lie in [0, 1], got {rho}"))),
        RateMode::Alpha(alpha) if (0.5..1.0).contains(&alpha) => Ok(t.ln().sqrt() / (2.0 * d) * t.powf(-alpha)),
        RateMode::Alpha(alpha) => Err(Error::InvalidParameter(format!(
            "mirror-descent alpha must lie in [0.5, 1), got {alpha}"
        ))),
    }
}

/// Exploration radius, exploitation rate and step size for [`Dbgd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbgdSchedule {
    pub gamma: f64,
    pub delta: f64,
    /// `γδ/d`.
    pub step: f64,
}

impl DbgdSchedule {
    pub fn new(gamma: f64, delta: f64, dim: usize) -> Result<Self> {
        if !(gamma > 0.0 && delta > 0.0) || dim == 0 {
            return Err(Error::InvalidParameter(format!(
                "gamma and delta must be positive (got {gamma}, {delta})"
            )));
        }
        Ok(Self {
            gamma,
            delta,
            step: gamma * delta / dim as f64,
        })
    }
}

/// `γ = R/√T`, `δ = √(2Rd) / (√(13 L_σ L_μ) T^α)`.
pub fn schedule_dbgd(
    radius: f64,
    dim: usize,
    horizon: u64,
    alpha: f64,
    l_sigma: f64,
    l_mu: f64,
) -> Result<DbgdSchedule> {
    if !(alpha > 0.0 && alpha <= 0.25) {
        return Err(Error::InvalidParameter(format!(
            "DBGD alpha must lie in (0, 1/4], got {alpha}"
        )));
    }
    if !(radius > 0.0 && l_sigma > 0.0 && l_mu > 0.0) || horizon == 0 || dim == 0 {
        return Err(Error::InvalidParameter(
            "DBGD schedule needs positive radius, Lipschitz constants, horizon and dimension".into(),
        ));
    }
    let t = horizon as f64;
    let gamma = radius / t.sqrt();
    let delta = (2.0 * radius * dim as f64).sqrt() / ((13.0 * l_sigma * l_mu).sqrt() * t.powf(alpha));
    DbgdSchedule::new(gamma, delta, dim)
}
