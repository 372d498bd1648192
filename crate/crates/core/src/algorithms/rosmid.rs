use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{sample_unit_sphere, ActionVector};
use crate::mirror::{psd_roots, BallBarrier, MirrorState};
use crate::preference::DuelOutcome;
use crate::SimRng;

use super::Learner;

/// Tuning of the robustified mirror-descent learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoSmidParams {
    pub radius: f64,
    pub dim: usize,
    /// Learning rate η.
    pub eta: f64,
    /// Weight λ of the accumulated proximity term.
    pub lambda: f64,
    /// Weight φ of the `‖a‖²` term.
    pub phi: f64,
}

struct Pending {
    direction: ActionVector,
    hess_sqrt: DMatrix<f64>,
    grad: ActionVector,
}

/// Robustified stochastic mirror descent over a ball.
///
/// Each round folds the current iterate into the regularizer `R_t`, duels the
/// iterate against a point on its Dikin ellipsoid, and, when the iterate
/// wins, moves in the dual space by `−η·d·∇²R_t(a_t)^{1/2} u` before mapping
/// back through `∇R_t⁻¹`.
pub struct RoSmid {
    state: MirrorState,
    rng: SimRng,
    pending: Option<Pending>,
}

impl RoSmid {
    pub fn new(params: RoSmidParams, rng: SimRng) -> Result<Self> {
        let barrier = BallBarrier::new(params.radius)?;
        let state = MirrorState::new(barrier, params.dim, params.lambda, params.phi, params.eta)?;
        Ok(Self {
            state,
            rng,
            pending: None,
        })
    }

    pub fn state(&self) -> &MirrorState {
        &self.state
    }

    pub fn current(&self) -> &ActionVector {
        self.state.current()
    }

    /// `ĝ = F·d·∇²R_t(a_t)^{1/2} u`, with `F = 1` when the iterate beat the
    /// Dikin point. Its conditional mean is the gradient of the smoothed
    /// probability that the iterate beats a nearby action.
    pub fn gradient_estimate(hess_sqrt: &DMatrix<f64>, direction: &ActionVector, iterate_won: bool) -> ActionVector {
        if !iterate_won {
            return ActionVector::zeros(direction.len());
        }
        hess_sqrt * direction * direction.len() as f64
    }
}

impl std::fmt::Debug for RoSmid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RoSmid")
            .field("state", &self.state)
            .finish_non_exhaustive()
    }
}

impl Learner for RoSmid {
    fn propose(&mut self, _t: u64) -> Result<(ActionVector, ActionVector)> {
        self.state.accumulate();
        let current = self.state.current().clone();
        let (grad, hess) = self.state.grad_hess(&current)?;
        let roots = psd_roots(&hess)?;
        let u = sample_unit_sphere(&mut self.rng, current.len());
        let dikin = &current + &roots.inv_sqrt * &u;
        self.pending = Some(Pending {
            direction: u,
            hess_sqrt: roots.sqrt,
            grad,
        });
        Ok((current, dikin))
    }

    fn observe(&mut self, _t: u64, outcome: &DuelOutcome) -> Result<()> {
        let p = self
            .pending
            .take()
            .ok_or_else(|| Error::InvalidParameter("observe called before propose".into()))?;
        if !outcome.first_won() {
            // zero gradient: ∇R_t⁻¹(∇R_t(a_t)) = a_t
            return Ok(());
        }
        let g = Self::gradient_estimate(&p.hess_sqrt, &p.direction, true);
        let target = p.grad - g * self.state.eta();
        let next = self.state.mirror_solve(&target)?;
        self.state.set_current(next)
    }

    fn name(&self) -> &'static str {
        "rosmid"
    }
}
