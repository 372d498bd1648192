use crate::error::{Error, Result};
use crate::geometry::{sample_unit_sphere, ActionSpace, ActionVector};
use crate::preference::DuelOutcome;
use crate::SimRng;

use super::Learner;

/// Step sizes of one-point bandit gradient descent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BgdParams {
    /// Exploration radius δ_b.
    pub delta: f64,
    /// Step size η_b.
    pub eta: f64,
}

impl BgdParams {
    /// `δ_b = R·T^{−1/4}`, `η_b = R·T^{−3/4}/d`.
    pub fn default_for(radius: f64, dim: usize, horizon: u64) -> Self {
        let t = horizon.max(1) as f64;
        Self {
            delta: radius * t.powf(-0.25),
            eta: radius * t.powf(-0.75) / dim as f64,
        }
    }
}

/// Single-action bandit gradient descent with one-point gradient estimates
/// (reward maximization, rewards in `[0, 1]`).
///
/// Plays `y = x + δ_b u`, estimates the gradient as `(d/δ_b)·reward·u`, and
/// ascends while staying in the `(1 − ξ)`-shrunk space, `ξ = δ_b/R`, so the
/// played point never leaves the space for a ball.
#[derive(Debug, Clone)]
pub struct Bgd {
    space: ActionSpace,
    params: BgdParams,
    shrink: f64,
    center: ActionVector,
    direction: Option<ActionVector>,
    rng: SimRng,
}

impl Bgd {
    pub fn new(space: ActionSpace, params: BgdParams, rng: SimRng) -> Result<Self> {
        let radius = space.enclosing_radius();
        if !(params.delta > 0.0 && params.delta < radius && params.eta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "BGD needs 0 < delta < R and eta > 0 (delta {}, R {radius}, eta {})",
                params.delta, params.eta
            )));
        }
        let center = ActionVector::zeros(space.dim());
        Ok(Self {
            shrink: 1.0 - params.delta / radius,
            space,
            params,
            center,
            direction: None,
            rng,
        })
    }

    pub fn center(&self) -> &ActionVector {
        &self.center
    }

    /// Scale of the shrunk space the center is kept in.
    pub fn shrink(&self) -> f64 {
        self.shrink
    }

    pub fn params(&self) -> &BgdParams {
        &self.params
    }

    /// Action to play this round.
    pub fn play(&mut self) -> Result<ActionVector> {
        let u = sample_unit_sphere(&mut self.rng, self.space.dim());
        let y = &self.center + &u * self.params.delta;
        self.direction = Some(u);
        // no-op on a ball; keeps polytope plays feasible
        self.space.project(&y)
    }

    /// Reward in `[0, 1]` for the action last returned by [`Bgd::play`].
    pub fn update(&mut self, reward: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&reward) {
            return Err(Error::InvalidParameter(format!(
                "reward must lie in [0, 1], got {reward}"
            )));
        }
        let u = self
            .direction
            .take()
            .ok_or_else(|| Error::InvalidParameter("update called before play".into()))?;
        if reward == 0.0 {
            return Ok(());
        }
        let estimate = u * (self.space.dim() as f64 / self.params.delta * reward);
        let next = &self.center + estimate * self.params.eta;
        self.center = self.space.project_scaled(&next, self.shrink)?;
        Ok(())
    }
}

/// Standalone dueling use: the played action is compared against the origin
/// and rewarded 1 when it wins.
impl Learner for Bgd {
    fn propose(&mut self, _t: u64) -> Result<(ActionVector, ActionVector)> {
        let y = self.play()?;
        Ok((y, ActionVector::zeros(self.space.dim())))
    }

    fn observe(&mut self, _t: u64, outcome: &DuelOutcome) -> Result<()> {
        self.update(if outcome.first_won() { 1.0 } else { 0.0 })
    }

    fn name(&self) -> &'static str {
        "bgd"
    }
}
