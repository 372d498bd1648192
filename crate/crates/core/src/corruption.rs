//! Corruption schedules, adversarial sign rule and budget accounting.

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::geometry::ActionVector;

/// Running design matrix `V̄_t = λI + Σ_s (a_s − a'_s)(a_s − a'_s)ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnabilityState {
    v_bar: DMatrix<f64>,
    lambda: f64,
    t: u64,
}

impl LearnabilityState {
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(Self {
            v_bar: DMatrix::identity(dim, dim) * lambda,
            lambda,
            t: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.v_bar.nrows()
    }

    pub fn v_bar(&self) -> &DMatrix<f64> {
        &self.v_bar
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn rounds(&self) -> u64 {
        self.t
    }

    /// Rank-one update with the pair difference.
    pub fn update(&mut self, a: &ActionVector, b: &ActionVector) -> Result<()> {
        check_dim(self.dim(), a.len())?;
        check_dim(self.dim(), b.len())?;
        let diff = a - b;
        self.v_bar.ger(1.0, &diff, &diff, 1.0);
        self.t += 1;
        Ok(())
    }

    /// `‖a − b‖²` in the `V̄⁻¹` norm.
    pub fn inverse_norm_sq(&self, a: &ActionVector, b: &ActionVector) -> Result<f64> {
        check_dim(self.dim(), a.len())?;
        check_dim(self.dim(), b.len())?;
        let diff = a - b;
        let chol = self
            .v_bar
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite(self.lambda))?;
        Ok(diff.dot(&chol.solve(&diff)))
    }
}

/// How (and whether) the simulated user's feedback is corrupted.
#[derive(Debug, Clone, PartialEq)]
pub enum CorruptionSchedule {
    None,
    /// Per-round magnitude `c_kappa · t^(ρ−1)`.
    RhoImperfect {
        rho: f64,
        c_kappa: f64,
    },
    /// Magnitude `c0 · (‖a − a'‖²_{V̄⁻¹})^(1−ρ)` with `V̄` built from past pairs.
    GeneralizedLearnability {
        rho: f64,
        c0: f64,
        state: LearnabilityState,
    },
    /// The user reports the worse action in rounds `1..=count`.
    FlipFirst {
        count: u64,
    },
}

impl CorruptionSchedule {
    pub fn rho_imperfect(rho: f64, c_kappa: f64) -> Result<Self> {
        check_rho(rho)?;
        if !(c_kappa > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "c_kappa must be positive, got {c_kappa}"
            )));
        }
        Ok(Self::RhoImperfect { rho, c_kappa })
    }

    pub fn generalized_learnability(dim: usize, rho: f64, lambda: f64, c0: f64) -> Result<Self> {
        check_rho(rho)?;
        if !(c0 > 0.0) {
            return Err(Error::InvalidParameter(format!("c0 must be positive, got {c0}")));
        }
        Ok(Self::GeneralizedLearnability {
            rho,
            c0,
            state: LearnabilityState::new(dim, lambda)?,
        })
    }

    /// Whether round `t` is decided by outcome forcing rather than sampling.
    pub fn forces_outcome(&self, t: u64) -> bool {
        matches!(self, Self::FlipFirst { count } if t <= *count)
    }

    /// Non-negative corruption magnitude at round `t` for the pair `(a, b)`.
    /// Outcome-level schedules report 0.
    pub fn magnitude(&self, t: u64, a: &ActionVector, b: &ActionVector) -> Result<f64> {
        if t == 0 {
            return Err(Error::InvalidParameter("rounds are numbered from 1".into()));
        }
        Ok(match self {
            Self::None | Self::FlipFirst { .. } => 0.0,
            Self::RhoImperfect { rho, c_kappa } => c_kappa * (t as f64).powf(rho - 1.0),
            Self::GeneralizedLearnability { rho, c0, state } => c0 * state.inverse_norm_sq(a, b)?.powf(1.0 - rho),
        })
    }

    /// Let stateful schedules see the pair that was just dueled.
    pub fn observe_pair(&mut self, a: &ActionVector, b: &ActionVector) -> Result<()> {
        if let Self::GeneralizedLearnability { state, .. } = self {
            state.update(a, b)?;
        }
        Ok(())
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("rho must lie in [0, 1], got {rho}")))
    }
}

/// Sign the magnitude so it pushes the preference toward the worse action:
/// `−c` when `gap > 0`, `+c` when `gap < 0`, `−c` on ties.
pub fn adversarial_signed_corruption(gap: f64, magnitude: f64) -> f64 {
    if gap < 0.0 {
        magnitude
    } else {
        -magnitude
    }
}

/// Per-round record of corruption actually applied.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BudgetLedger {
    per_round: Vec<f64>,
    cumulative: f64,
    flips: u64,
}

impl BudgetLedger {
    pub fn record(&mut self, abs_corruption: f64, forced: bool) {
        self.per_round.push(abs_corruption);
        self.cumulative += abs_corruption;
        if forced {
            self.flips += 1;
        }
    }

    pub fn per_round(&self) -> &[f64] {
        &self.per_round
    }

    pub fn cumulative(&self) -> f64 {
        self.cumulative
    }

    /// Number of rounds whose outcome was forced.
    pub fn flips(&self) -> u64 {
        self.flips
    }

    /// `Σ_t |c_t|`.
    pub fn total_budget(&self) -> f64 {
        self.per_round.iter().sum()
    }
}

/// Closed-form ceiling on `Σ_{t≤T} c_kappa · t^(ρ−1)`: `c_kappa (1 + (T^ρ − 1)/ρ)`.
pub fn rho_imperfect_budget_bound(c_kappa: f64, rho: f64, horizon: u64) -> f64 {
    let t = horizon as f64;
    if rho == 0.0 {
        c_kappa * (1.0 + t.ln())
    } else {
        c_kappa * (1.0 + (t.powf(rho) - 1.0) / rho)
    }
}
