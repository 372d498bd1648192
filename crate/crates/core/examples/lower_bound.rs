//! DBGD on the two-dimensional polytope instance where its regret cannot beat
//! order T^{3/4}: linear utility θ = (½, ½), linear link, no corruption.
//!
//! The iterate is still travelling along the edge toward the optimal vertex
//! `(½, 0)` when the horizon ends, so the fitted order reflects that transient.
//!
//! ```bash
//! cargo run --release --example lower_bound
//! cargo run --release --example lower_bound -- horizon=20000 seeds.n_seeds=10
//! ```

use imperfect_duel::experiments::{run_experiment, summarize, ExperimentConfig};

const CONFIG: &str = include_str!("dbgd_lowerbound.json");

fn main() -> imperfect_duel::Result<()> {
    let overrides: Vec<String> = std::env::args().skip(1).collect();
    let config = ExperimentConfig::from_json_str(CONFIG, &overrides)?;
    let started = std::time::Instant::now();
    let result = run_experiment(&config)?;
    let (agg, report) = summarize(&result);

    if let Some(agg) = agg {
        let last = agg.rounds.len() - 1;
        println!(
            "mean cumulative regret at T = {}: {:.1} (std {:.1})",
            agg.rounds[last], agg.dueling_mean[last], agg.dueling_std[last]
        );
    }
    match report.fit {
        Some(fit) => println!(
            "fitted order {:.3} ± {:.3} over {} seeds ({:.1}s)",
            fit.slope,
            fit.stderr,
            report.seeds.len(),
            started.elapsed().as_secs_f64()
        ),
        None => println!("no fit: {}", report.fit_error.unwrap_or_default()),
    }
    Ok(())
}
