use rand::Rng;

use crate::error::Result;
use crate::geometry::ActionVector;
use crate::preference::DuelOutcome;
use crate::SimRng;

use super::{Bgd, Learner};

/// Doubler reduction: epoch `j` covers rounds `2^j ..= 2^{j+1} − 1`. The
/// left arm is drawn uniformly from the right arms played during the previous
/// epoch (the zero action during epoch 0); the right arm comes from a bandit
/// learner rewarded when it beats the left arm.
#[derive(Debug, Clone)]
pub struct Doubler {
    bandit: Bgd,
    previous_epoch: Vec<ActionVector>,
    current_epoch: Vec<ActionVector>,
    epoch: u32,
    rng: SimRng,
}

/// Epoch index of round `t >= 1`.
pub fn epoch_of(t: u64) -> u32 {
    63 - t.max(1).leading_zeros()
}

impl Doubler {
    pub fn new(bandit: Bgd, rng: SimRng) -> Self {
        Self {
            bandit,
            previous_epoch: Vec::new(),
            current_epoch: Vec::new(),
            epoch: 0,
            rng,
        }
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    /// Right arms played during the previous epoch.
    pub fn previous_epoch_arms(&self) -> &[ActionVector] {
        &self.previous_epoch
    }

    fn dim(&self) -> usize {
        self.bandit.center().len()
    }
}

impl Learner for Doubler {
    fn propose(&mut self, t: u64) -> Result<(ActionVector, ActionVector)> {
        let epoch = epoch_of(t);
        if epoch != self.epoch {
            self.previous_epoch = std::mem::take(&mut self.current_epoch);
            self.epoch = epoch;
        }
        let left = if self.previous_epoch.is_empty() {
            ActionVector::zeros(self.dim())
        } else {
            self.previous_epoch[self.rng.random_range(0..self.previous_epoch.len())].clone()
        };
        let right = self.bandit.play()?;
        self.current_epoch.push(right.clone());
        Ok((left, right))
    }

    fn observe(&mut self, _t: u64, outcome: &DuelOutcome) -> Result<()> {
        self.bandit.update(if outcome.winner == 1 { 1.0 } else { 0.0 })
    }

    fn name(&self) -> &'static str {
        "doubler"
    }
}
