use crate::error::{Error, Result};
use crate::geometry::{sample_unit_sphere, ActionSpace, ActionVector};
use crate::preference::DuelOutcome;
use crate::SimRng;

use super::{DbgdSchedule, Learner};

/// Dueling bandit gradient descent.
///
/// Starts at the origin, compares the iterate with a projected perturbation
/// `P(a + δu)`, and steps `γu` toward the perturbation whenever it wins:
/// `ĝ = −(d/δ)·1[perturbed won]·u`, `a ← P(a − (γδ/d) ĝ)`.
///
/// Over a discrete catalog pass the enclosing ball as `space`; the runner
/// presents the nearest catalog items while the iterate keeps moving in the
/// ball.
#[derive(Debug, Clone)]
pub struct Dbgd {
    space: ActionSpace,
    schedule: DbgdSchedule,
    current: ActionVector,
    direction: Option<ActionVector>,
    rng: SimRng,
}

impl Dbgd {
    pub fn new(space: ActionSpace, schedule: DbgdSchedule, rng: SimRng) -> Self {
        let current = ActionVector::zeros(space.dim());
        Self {
            space,
            schedule,
            current,
            direction: None,
            rng,
        }
    }

    pub fn current(&self) -> &ActionVector {
        &self.current
    }

    pub fn schedule(&self) -> &DbgdSchedule {
        &self.schedule
    }

    /// Corrupted gradient estimate for a sampled direction and the feedback bit.
    pub fn gradient_estimate(&self, direction: &ActionVector, perturbed_won: bool) -> ActionVector {
        let f = if perturbed_won { 1.0 } else { 0.0 };
        direction * (-(self.space.dim() as f64) / self.schedule.delta * f)
    }
}

impl Learner for Dbgd {
    fn propose(&mut self, _t: u64) -> Result<(ActionVector, ActionVector)> {
        let u = sample_unit_sphere(&mut self.rng, self.space.dim());
        let perturbed = self.space.project(&(&self.current + &u * self.schedule.delta))?;
        self.direction = Some(u);
        Ok((self.current.clone(), perturbed))
    }

    fn observe(&mut self, _t: u64, outcome: &DuelOutcome) -> Result<()> {
        let u = self
            .direction
            .take()
            .ok_or_else(|| Error::InvalidParameter("observe called before propose".into()))?;
        let perturbed_won = outcome.winner == 1;
        if perturbed_won {
            let g = self.gradient_estimate(&u, true);
            self.current = self.space.project(&(&self.current - g * self.schedule.step))?;
        }
        Ok(())
    }

    fn name(&self) -> &'static str {
        "dbgd"
    }
}
