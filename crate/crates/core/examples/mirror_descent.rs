//! The mirror-descent machinery behind RoSMID, one round at a time: the
//! accumulated regularizer, its Dikin ellipsoid, and the inverse mirror map.
//!
//! ```bash
//! cargo run --release --example mirror_descent
//! ```

use imperfect_duel::geometry::sample_unit_sphere;
use imperfect_duel::mirror::{psd_roots, BallBarrier, MirrorState};
use imperfect_duel::rng_from_seed;

fn main() -> imperfect_duel::Result<()> {
    let dim = 3;
    let radius = 2.0;
    let mut state = MirrorState::new(BallBarrier::new(radius)?, dim, 0.01, 0.0, 0.05)?;
    let mut rng = rng_from_seed(5);

    for t in 1..=5 {
        state.accumulate();
        let a = state.current().clone();
        let (grad, hess) = state.grad_hess(&a)?;
        let roots = psd_roots(&hess)?;

        // exploration point on the Dikin ellipsoid, always strictly inside the ball
        let u = sample_unit_sphere(&mut rng, dim);
        let dikin = &a + &roots.inv_sqrt * &u;

        // pretend the iterate won: step away from the explored direction in the dual
        let g = &roots.sqrt * &u * dim as f64;
        let target = &grad - g * state.eta();
        let next = state.mirror_solve(&target)?;
        let residual = (state.gradient(&next)? - &target).norm();

        println!(
            "t={t}  |a|={:.4}  |dikin|={:.4} (< {radius})  |next|={:.4}  residual {:.1e}",
            a.norm(),
            dikin.norm(),
            next.norm(),
            residual
        );
        state.set_current(next)?;
    }
    Ok(())
}
