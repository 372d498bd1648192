//! Recommendation-style pipeline on a synthetic embedding corpus:
//! generate items, standardize, cluster into user types, take a cluster mean
//! as the user's taste and let DBGD recommend items under ρ-imperfect
//! feedback. Proposals are snapped to the nearest catalog item.
//!
//! ```bash
//! cargo run --release --example corpus_pipeline
//! ```

use imperfect_duel::experiments::corpus::ingest_corpus;
use imperfect_duel::experiments::{make_synthetic_corpus, run_experiment, summarize, ExperimentConfig};

const CONFIG: &str = include_str!("corpus_pipeline.json");

fn main() -> imperfect_duel::Result<()> {
    let dir = std::env::temp_dir().join(format!("imperfect-duel-corpus-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let csv = dir.join("synthetic_corpus.csv");
    let labels = make_synthetic_corpus(2000, 15, 5, 0, &csv)?;
    println!("wrote {} items to {}", labels.len(), csv.display());

    let corpus = ingest_corpus(&csv, 5, 1)?;
    for (j, size) in corpus.cluster_sizes().iter().enumerate() {
        println!("user type {j}: {size} items");
    }

    let mut overrides = vec![format!("space.csv={}", csv.display())];
    overrides.extend(std::env::args().skip(1));
    let config = ExperimentConfig::from_json_str(CONFIG, &overrides)?;
    let result = run_experiment(&config)?;
    let (_, report) = summarize(&result);
    for s in &report.seeds {
        println!("seed {:>20}: final regret {:>8.1}", s.seed, s.final_dueling);
    }
    println!("fitted order {:.3}", report.slope.unwrap_or(f64::NAN));

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
