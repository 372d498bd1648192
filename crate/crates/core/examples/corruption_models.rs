//! The three ways feedback gets corrupted, and what each one costs the
//! adversary.
//!
//! ```bash
//! cargo run --release --example corruption_models
//! ```

use imperfect_duel::corruption::{rho_imperfect_budget_bound, CorruptionSchedule};
use imperfect_duel::preference::{DuelOracle, LinkFunction, UtilityFunction};
use imperfect_duel::{rng_from_seed, ActionVector};

fn main() -> imperfect_duel::Result<()> {
    let horizon = 10_000;
    let utility = UtilityFunction::QuadraticConcave {
        theta: ActionVector::from_vec(vec![1.0, 0.0]),
    };
    let better = ActionVector::from_vec(vec![0.9, 0.0]);
    let worse = ActionVector::from_vec(vec![0.0, 0.5]);

    let schedules = [
        ("rho-imperfect (rho=0.5)", CorruptionSchedule::rho_imperfect(0.5, 1.0)?),
        (
            "generalized learnability",
            CorruptionSchedule::generalized_learnability(2, 0.5, 2.0, 1.0)?,
        ),
        (
            "first T^0.5 rounds flipped",
            CorruptionSchedule::FlipFirst { count: 100 },
        ),
    ];
    for (name, schedule) in schedules {
        let mut oracle = DuelOracle::new(utility.clone(), LinkFunction::Logistic, schedule, rng_from_seed(3));
        let mut better_wins = 0;
        for t in 1..=horizon {
            if oracle.duel(&better, &worse, t)?.first_won() {
                better_wins += 1;
            }
        }
        println!(
            "{name:<28} budget {:>8.2}  forced {:>4}  better action won {:>5.1}%",
            oracle.ledger.total_budget(),
            oracle.ledger.flips(),
            100.0 * better_wins as f64 / horizon as f64
        );
    }
    println!(
        "closed-form ceiling for rho-imperfect: {:.2}",
        rho_imperfect_budget_bound(1.0, 0.5, horizon)
    );
    Ok(())
}
