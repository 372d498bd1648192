//! RoSMID with the imperfection level ρ known in advance: the learning rate
//! `√(log T) / (d T^{max(½, ρ)})` slows the learner down just enough for the
//! decaying corruption `c_κ t^{ρ−1}`.
//!
//! ```bash
//! cargo run --release --example known_rho
//! cargo run --release --example known_rho -- horizon=20000
//! ```

use imperfect_duel::cli::expand_sweep;
use imperfect_duel::experiments::{run_experiment, summarize, ExperimentConfig};

const CONFIG: &str = include_str!("rosmid_known_rho.json");

fn main() -> imperfect_duel::Result<()> {
    let overrides: Vec<String> = std::env::args().skip(1).collect();
    let base = ExperimentConfig::from_json_str(CONFIG, &overrides)?;
    let grid = base.sweep.clone().unwrap_or_default();

    println!(
        "{:<20} {:>8} {:>16} {:>14}",
        "cell", "order", "final regret", "corruption"
    );
    for cell in expand_sweep(&base, &grid)? {
        let result = run_experiment(&cell.config)?;
        let (agg, report) = summarize(&result);
        let final_regret = agg
            .map(|a| *a.dueling_mean.last().unwrap_or(&f64::NAN))
            .unwrap_or(f64::NAN);
        println!(
            "{:<20} {:>8.3} {:>16.1} {:>14.2}",
            cell.label,
            report.slope.unwrap_or(f64::NAN),
            final_regret,
            report.total_corruption_budget
        );
    }
    Ok(())
}
