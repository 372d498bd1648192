//! Experiment harness: configuration, simulation, regret accounting,
//! fitted orders, corpus ingestion and result export.

pub mod config;
pub mod corpus;
pub mod export;
pub mod fit;
pub mod regret;
pub mod runner;

pub use config::ExperimentConfig;
pub use corpus::{ingest_corpus, make_synthetic_corpus, Corpus};
pub use export::{export_results, read_trace_csv, summarize, Report};
pub use fit::{fit_order, FittedOrder};
pub use regret::{aggregate, regret_increment, Aggregate, RegretTrace};
pub use runner::{run_experiment, ExperimentResult, Instance, SeedRun};
