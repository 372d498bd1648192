//! Efficiency against robustness for DBGD. A smaller α explores with a wider
//! perturbation: slower without corruption, but it keeps learning under
//! heavier corruption. The table shows fitted orders over ρ × α.
//!
//! ```bash
//! cargo run --release --example tradeoff
//! ```

use std::collections::BTreeMap;

use imperfect_duel::cli::expand_sweep;
use imperfect_duel::experiments::{run_experiment, summarize, ExperimentConfig};

const CONFIG: &str = include_str!("tradeoff.json");

fn main() -> imperfect_duel::Result<()> {
    let overrides: Vec<String> = std::env::args().skip(1).collect();
    let base = ExperimentConfig::from_json_str(CONFIG, &overrides)?;
    let grid = base.sweep.clone().unwrap_or_default();

    // rho -> alpha -> order, keyed by the printed labels to keep them sorted
    let mut table: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for cell in expand_sweep(&base, &grid)? {
        let result = run_experiment(&cell.config)?;
        let (_, report) = summarize(&result);
        let rho = format!("{:.2}", cell.rho.unwrap_or(f64::NAN));
        let alpha = format!("{:.2}", cell.alpha.unwrap_or(f64::NAN));
        table
            .entry(rho)
            .or_default()
            .insert(alpha, report.slope.unwrap_or(f64::NAN));
    }

    let alphas: Vec<String> = table
        .values()
        .next()
        .map(|r| r.keys().cloned().collect())
        .unwrap_or_default();
    print!("{:>6}", "rho");
    for a in &alphas {
        print!("  alpha={a:<5}");
    }
    println!();
    for (rho, row) in &table {
        print!("{rho:>6}");
        for a in &alphas {
            print!("  {:>11.3}", row.get(a).copied().unwrap_or(f64::NAN));
        }
        println!();
    }
    Ok(())
}
