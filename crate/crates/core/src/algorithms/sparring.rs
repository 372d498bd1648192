use crate::error::Result;
use crate::geometry::ActionVector;
use crate::preference::DuelOutcome;

use super::{Bgd, Learner};

/// Two bandit learners dueling each other; the winner is rewarded with 1.
#[derive(Debug, Clone)]
pub struct Sparring {
    left: Bgd,
    right: Bgd,
    /// When false the losing side receives no update at all instead of reward 0.
    loser_observes: bool,
}

impl Sparring {
    pub fn new(left: Bgd, right: Bgd, loser_observes: bool) -> Self {
        Self {
            left,
            right,
            loser_observes,
        }
    }

    pub fn left(&self) -> &Bgd {
        &self.left
    }

    pub fn right(&self) -> &Bgd {
        &self.right
    }
}

impl Learner for Sparring {
    fn propose(&mut self, _t: u64) -> Result<(ActionVector, ActionVector)> {
        Ok((self.left.play()?, self.right.play()?))
    }

    fn observe(&mut self, _t: u64, outcome: &DuelOutcome) -> Result<()> {
        let (winner, loser) = if outcome.first_won() {
            (&mut self.left, &mut self.right)
        } else {
            (&mut self.right, &mut self.left)
        };
        winner.update(1.0)?;
        if self.loser_observes {
            loser.update(0.0)?;
        }
        Ok(())
    }

    fn name(&self) -> &'static str {
        "sparring"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::BgdParams;
    use crate::geometry::ActionSpace;
    use crate::rng_from_seed;

    fn outcome(winner: usize) -> DuelOutcome {
        DuelOutcome {
            winner,
            corrupted_prob: 0.5,
            clean_prob: 0.5,
            corruption_value: 0.0,
            forced: false,
            round: 1,
        }
    }

    fn pair(seed_left: u64, seed_right: u64, loser_observes: bool) -> Sparring {
        let space = ActionSpace::ball(2, 1.0).unwrap();
        let p = BgdParams { delta: 0.2, eta: 0.05 };
        Sparring::new(
            Bgd::new(space.clone(), p, rng_from_seed(seed_left)).unwrap(),
            Bgd::new(space, p, rng_from_seed(seed_right)).unwrap(),
            loser_observes,
        )
    }

    #[test]
    fn identical_seeds_give_identical_first_actions() {
        let mut s = pair(5, 5, true);
        let (a, b) = s.propose(1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn only_the_winner_moves() {
        let mut s = pair(1, 2, true);
        s.propose(1).unwrap();
        s.observe(1, &outcome(1)).unwrap();
        assert_eq!(s.left().center(), &ActionVector::zeros(2));
        assert!(s.right().center().norm() > 0.0);

        let mut s = pair(1, 2, false);
        s.propose(1).unwrap();
        s.observe(1, &outcome(0)).unwrap();
        assert!(s.left().center().norm() > 0.0);
        // the loser kept its pending direction; its next play resamples anyway
        assert_eq!(s.right().center(), &ActionVector::zeros(2));
    }
}
