//! Assemble a dueling problem by hand and watch DBGD learn it.
//!
//! ```bash
//! cargo run --release --example quickstart
//! ```

use imperfect_duel::algorithms::{schedule_dbgd, Dbgd};
use imperfect_duel::corruption::CorruptionSchedule;
use imperfect_duel::experiments::fit_order;
use imperfect_duel::experiments::runner::{simulate, Instance};
use imperfect_duel::preference::{DuelOracle, LinkFunction, UtilityFunction};
use imperfect_duel::{mix_seed, rng_from_seed, ActionSpace, ActionVector};

fn main() -> imperfect_duel::Result<()> {
    let dim = 5;
    let horizon = 20_000;
    let seed = 42;

    let space = ActionSpace::ball(dim, 10.0)?;
    let theta = ActionVector::from_vec(vec![6.0, 0.0, 8.0, 0.0, 0.0]);
    let utility = UtilityFunction::QuadraticConcave { theta: theta.clone() };
    let instance = Instance::new(space.clone(), utility.clone(), LinkFunction::Logistic)?;
    println!(
        "optimum {:?}, best utility {}",
        instance.optimum.as_slice(),
        instance.best
    );

    // L_σ = ¼ for the logistic link, L_μ = ‖θ‖ + R on the ball
    let schedule = schedule_dbgd(10.0, dim, horizon, 0.25, 0.25, theta.norm() + 10.0)?;
    println!("gamma {:.4}, delta {:.4}", schedule.gamma, schedule.delta);
    let mut learner = Dbgd::new(space, schedule, rng_from_seed(mix_seed(seed, 1)));

    let corruption = CorruptionSchedule::rho_imperfect(0.5, 1.0)?;
    let mut oracle = DuelOracle::new(
        utility,
        LinkFunction::Logistic,
        corruption,
        rng_from_seed(mix_seed(seed, 2)),
    );

    let trace = simulate(&instance, &mut learner, &mut oracle, horizon, 100)?;
    for i in (0..trace.len()).step_by(trace.len() / 10) {
        println!(
            "t = {:>6}  cumulative dueling regret {:>10.2}",
            trace.rounds[i], trace.cum_dueling[i]
        );
    }
    println!("final iterate {:?}", learner.current().as_slice());
    println!("corruption paid {:.2}", trace.budget.total_budget());

    let fit = fit_order(&trace.rounds, &trace.cum_dueling, 0.05)?;
    println!("fitted order over the last 5%: {:.3}", fit.slope);
    Ok(())
}
