//! Self-concordant barrier calculus for the ball and the accumulated
//! regularizer used by mirror descent.
//!
//! The regularizer after `t` rounds is
//!
//! ```text
//! R_t(a) = −log(R² − ‖a‖²) + (λη/2) Σ_{i≤t} ‖a − a_i‖² + φ‖a‖²
//! ```
//!
//! Its gradient only needs the running sum `Σ a_i` and the count `t`, so a
//! round costs O(d²) regardless of how many rounds came before.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_dim, Error, Result};
use crate::geometry::ActionVector;

const EIGEN_FLOOR: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-10;

/// Residual at which the inverse mirror map is accepted.
pub const MIRROR_TOL: f64 = 1e-8;
/// Residual at which Newton stops early.
const NEWTON_TARGET: f64 = 1e-11;
pub const MIRROR_MAX_ITER: usize = 200;

/// `−log(R² − ‖a‖²)` on the open ball of radius `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallBarrier {
    radius: f64,
}

impl BallBarrier {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "barrier radius must be positive, got {radius}"
            )));
        }
        Ok(Self { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn slack(&self, a: &ActionVector) -> Result<f64> {
        let s = self.radius * self.radius - a.norm_squared();
        if s > 0.0 && a.iter().all(|v| v.is_finite()) {
            Ok(s)
        } else {
            Err(Error::OutsideDomain {
                norm: a.norm(),
                radius: self.radius,
            })
        }
    }

    pub fn value(&self, a: &ActionVector) -> Result<f64> {
        Ok(-self.slack(a)?.ln())
    }

    pub fn gradient(&self, a: &ActionVector) -> Result<DVector<f64>> {
        Ok(a * (2.0 / self.slack(a)?))
    }

    /// Gradient `2a/s` and Hessian `2I/s + 4aaᵀ/s²` with `s = R² − ‖a‖²`.
    pub fn grad_hess(&self, a: &ActionVector) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let s = self.slack(a)?;
        let d = a.len();
        let mut h = DMatrix::identity(d, d) * (2.0 / s);
        h.ger(4.0 / (s * s), a, a, 1.0);
        Ok((a * (2.0 / s), h))
    }
}

/// Symmetric square root and inverse square root of a positive-definite matrix.
#[derive(Debug, Clone)]
pub struct PsdRoots {
    pub sqrt: DMatrix<f64>,
    pub inv_sqrt: DMatrix<f64>,
}

pub fn psd_roots(m: &DMatrix<f64>) -> Result<PsdRoots> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let scale = m.amax().max(1.0);
    if (m - m.transpose()).amax() > SYMMETRY_TOL * scale {
        return Err(Error::NotPositiveDefinite(f64::NAN));
    }
    let eig = SymmetricEigen::new(m.clone());
    let min = eig.eigenvalues.min();
    if !(min > EIGEN_FLOOR) {
        return Err(Error::NotPositiveDefinite(min));
    }
    let q = &eig.eigenvectors;
    let rebuild = |f: fn(f64) -> f64| {
        let scaled = DMatrix::from_fn(q.nrows(), q.ncols(), |i, j| q[(i, j)] * f(eig.eigenvalues[j]));
        let out = &scaled * q.transpose();
        (&out + out.transpose()) * 0.5
    };
    Ok(PsdRoots {
        sqrt: rebuild(f64::sqrt),
        inv_sqrt: rebuild(|x| 1.0 / x.sqrt()),
    })
}

/// `M^{-1/2}` for symmetric positive-definite `M`.
pub fn inv_sqrt_psd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    psd_roots(m).map(|r| r.inv_sqrt)
}

/// Accumulated regularizer and current iterate of the mirror-descent learner.
#[derive(Debug, Clone)]
pub struct MirrorState {
    barrier: BallBarrier,
    lambda: f64,
    phi: f64,
    eta: f64,
    t: u64,
    sum_actions: DVector<f64>,
    sum_sq_norms: f64,
    current: ActionVector,
}

impl MirrorState {
    /// Fresh state at the barrier's minimizer (the origin).
    pub fn new(barrier: BallBarrier, dim: usize, lambda: f64, phi: f64, eta: f64) -> Result<Self> {
        if !(lambda >= 0.0 && phi >= 0.0 && eta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mirror parameters need lambda >= 0, phi >= 0, eta > 0 (got {lambda}, {phi}, {eta})"
            )));
        }
        Ok(Self {
            barrier,
            lambda,
            phi,
            eta,
            t: 0,
            sum_actions: DVector::zeros(dim),
            sum_sq_norms: 0.0,
            current: DVector::zeros(dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.current.len()
    }

    pub fn barrier(&self) -> &BallBarrier {
        &self.barrier
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn rounds(&self) -> u64 {
        self.t
    }

    pub fn current(&self) -> &ActionVector {
        &self.current
    }

    pub fn sum_actions(&self) -> &DVector<f64> {
        &self.sum_actions
    }

    /// Move the iterate. It must stay strictly inside the ball.
    pub fn set_current(&mut self, a: ActionVector) -> Result<()> {
        check_dim(self.dim(), a.len())?;
        self.barrier.slack(&a)?;
        self.current = a;
        Ok(())
    }

    /// Fold the current iterate into the regularizer (`t ← t + 1`).
    pub fn accumulate(&mut self) {
        self.sum_actions += &self.current;
        self.sum_sq_norms += self.current.norm_squared();
        self.t += 1;
    }

    /// Override the accumulated history; used to set up specific states.
    pub fn with_history(mut self, t: u64, sum_actions: DVector<f64>, sum_sq_norms: f64) -> Result<Self> {
        check_dim(self.dim(), sum_actions.len())?;
        self.t = t;
        self.sum_actions = sum_actions;
        self.sum_sq_norms = sum_sq_norms;
        Ok(self)
    }

    fn quad_weight(&self) -> f64 {
        self.lambda * self.eta
    }

    pub fn value(&self, a: &ActionVector) -> Result<f64> {
        check_dim(self.dim(), a.len())?;
        let t = self.t as f64;
        // Σ‖a − a_i‖² = t‖a‖² − 2a·Σa_i + Σ‖a_i‖²
        let spread = t * a.norm_squared() - 2.0 * a.dot(&self.sum_actions) + self.sum_sq_norms;
        Ok(self.barrier.value(a)? + 0.5 * self.quad_weight() * spread + self.phi * a.norm_squared())
    }

    pub fn gradient(&self, a: &ActionVector) -> Result<DVector<f64>> {
        check_dim(self.dim(), a.len())?;
        let mut g = self.barrier.gradient(a)?;
        g += (a * (self.t as f64) - &self.sum_actions) * self.quad_weight() + a * (2.0 * self.phi);
        Ok(g)
    }

    pub fn grad_hess(&self, a: &ActionVector) -> Result<(DVector<f64>, DMatrix<f64>)> {
        check_dim(self.dim(), a.len())?;
        let (mut g, mut h) = self.barrier.grad_hess(a)?;
        let curvature = self.quad_weight() * self.t as f64 + 2.0 * self.phi;
        g += (a * (self.t as f64) - &self.sum_actions) * self.quad_weight() + a * (2.0 * self.phi);
        for i in 0..h.nrows() {
            h[(i, i)] += curvature;
        }
        Ok((g, h))
    }

    /// `a_t + ∇²R_t(a_t)^{-1/2} u`: a point on the Dikin ellipsoid of the
    /// current iterate, strictly inside the ball.
    pub fn dikin_point(&self, u: &DVector<f64>) -> Result<ActionVector> {
        check_dim(self.dim(), u.len())?;
        let (_, h) = self.grad_hess(&self.current)?;
        let roots = psd_roots(&h)?;
        Ok(&self.current + roots.inv_sqrt * u)
    }

    /// Inverse mirror map: the interior `a` with `∇R_t(a) = y`.
    ///
    /// Damped Newton on `R_t(a) − y·a` started at the current iterate. Far from
    /// the solution the step is scaled by `1/(1 + decrement)`; any step is then
    /// halved until it stays inside the ball and lowers the objective; near
    /// the solution, where objective differences drown in rounding, a strict
    /// decrease of the residual is accepted instead.
    pub fn mirror_solve(&self, y: &DVector<f64>) -> Result<ActionVector> {
        check_dim(self.dim(), y.len())?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("mirror target must be finite".into()));
        }
        let objective = |a: &ActionVector| -> Option<f64> { self.value(a).ok().map(|v| v - y.dot(a)) };
        let mut a = self.current.clone();
        let mut residual = f64::INFINITY;
        for _ in 0..MIRROR_MAX_ITER {
            let (g, h) = self.grad_hess(&a)?;
            let r = g - y;
            residual = r.norm();
            if residual <= NEWTON_TARGET * (1.0 + y.norm()).min(1e3) {
                return Ok(a);
            }
            let step = h.cholesky().ok_or(Error::NotPositiveDefinite(f64::NAN))?.solve(&r);
            let f0 = objective(&a).expect("iterate is interior");
            // damped step 1/(1 + Newton decrement) keeps the trial point in
            // the Dikin ellipsoid, so it cannot jump onto the boundary
            let decrement = r.dot(&step).max(0.0).sqrt();
            let mut scale = if decrement > 0.25 { 1.0 / (1.0 + decrement) } else { 1.0 };
            let mut accepted = None;
            while scale > 1e-30 {
                let cand = &a - &step * scale;
                if let Some(f) = objective(&cand) {
                    if f < f0 {
                        accepted = Some(cand);
                        break;
                    }
                    if f <= f0 + 1e-12 * f0.abs().max(1.0) {
                        let rc = (self.gradient(&cand)? - y).norm();
                        if rc < residual {
                            accepted = Some(cand);
                            break;
                        }
                    }
                }
                scale *= 0.5;
            }
            match accepted {
                Some(next) => a = next,
                None => break,
            }
        }
        if residual <= MIRROR_TOL {
            return Ok(a);
        }
        let final_residual = (self.gradient(&a)? - y).norm();
        if final_residual <= MIRROR_TOL {
            Ok(a)
        } else {
            Err(Error::MirrorNonConvergence {
                iterations: MIRROR_MAX_ITER,
                residual: final_residual,
            })
        }
    }
}
