//! Agnostic corruption: the user reports the worse action for the first
//! C = T^ρ rounds. DBGD (α = ¼) and RoSMID (α = ½) are tuned without knowing
//! ρ; Sparring and Doubler run the same grid as baselines.
//!
//! Each cell is exported as `trace.csv` + `report.json`, the files the
//! plotting front end consumes.
//!
//! ```bash
//! cargo run --release --example agnostic_grid -- /tmp/agnostic
//! cargo run --release --example agnostic_grid -- /tmp/agnostic horizon=20000
//! ```

use std::path::PathBuf;

use imperfect_duel::cli::expand_sweep;
use imperfect_duel::experiments::{export_results, run_experiment, ExperimentConfig};

const CONFIG: &str = include_str!("agnostic_grid.json");

fn main() -> imperfect_duel::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("imperfect-duel-agnostic"));
    let overrides: Vec<String> = args.collect();
    let base = ExperimentConfig::from_json_str(CONFIG, &overrides)?;
    let grid = base.sweep.clone().unwrap_or_default();

    for cell in expand_sweep(&base, &grid)? {
        let result = run_experiment(&cell.config)?;
        let (report, paths) = export_results(&result, &out.join(&cell.label))?;
        let flips = report.seeds.first().map(|s| s.flips).unwrap_or(0);
        println!(
            "{:<18} order {:>6.3}  forced rounds {:>6}  -> {}",
            cell.label,
            report.slope.unwrap_or(f64::NAN),
            flips,
            paths.report.display()
        );
    }
    Ok(())
}
