//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for configuration or usage errors, 2 when a
//! run fails (any seed aborts, or results cannot be written). The worker
//! thread count comes from `IMPERFECT_DUEL_THREADS`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiments::config::{AlgorithmSpec, CorruptionSpec, ExperimentConfig, SweepSpec};
use crate::experiments::corpus::{ingest_corpus, make_synthetic_corpus};
use crate::experiments::export::{export_results, read_trace_csv, Report};
use crate::experiments::fit::fit_order;
use crate::experiments::runner::run_experiment;

/// `println!` that tolerates a closed stdout (e.g. piped into `head`).
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

pub const THREADS_ENV: &str = "IMPERFECT_DUEL_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUN: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "imperfect-duel",
    version,
    about = "Dueling-bandit regret laboratory under corrupted feedback"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment and write trace.csv and report.json.
    Run(RunArgs),
    /// Run the cross-product of ρ, α and algorithm values.
    Sweep(SweepArgs),
    /// Fit the regret order of an existing trace CSV.
    Fit(FitArgs),
    /// Write a synthetic Gaussian-mixture corpus.
    MakeCorpus(MakeCorpusArgs),
    /// Validate a corpus CSV and print a cluster summary.
    IngestCheck(IngestArgs),
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override a config value, e.g. `--set algorithm.alpha=0.1`. Repeatable; last one wins.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (defaults to the config's `output_dir`, then `results/<name>`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Comma-separated ρ values (replaces the config's sweep grid).
    #[arg(long, value_delimiter = ',')]
    rho: Option<Vec<f64>>,
    /// Comma-separated α values.
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    /// Comma-separated algorithm names.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    fraction: f64,
    /// Fit the functional regret column instead of the dueling one.
    #[arg(long)]
    functional: bool,
    /// Also print intercept, stderr and window size.
    #[arg(long)]
    verbose: bool,
}

#[derive(Debug, Args)]
struct MakeCorpusArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 15)]
    dim: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the true component labels, one per line.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Failure carrying the exit code it maps to.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config { .. } | Error::Corpus(_) | Error::Json(_) | Error::Fit(_) => EXIT_CONFIG,
            _ => EXIT_RUN,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn run_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_RUN,
        message: message.into(),
    }
}

/// Parse `argv` (including the program name), execute, and return the exit code.
pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return f.code;
        }
    };
    let result = pool.install(|| match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Fit(args) => cmd_fit(args),
        Command::MakeCorpus(args) => cmd_make_corpus(args),
        Command::IngestCheck(args) => cmd_ingest(args),
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| Failure {
            code: EXIT_CONFIG,
            message: format!("{THREADS_ENV} must be a positive integer, got `{raw}`"),
        })?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| run_failure(e.to_string()))
}

fn load_config(args: &ConfigArgs) -> Result<ExperimentConfig, Failure> {
    Ok(ExperimentConfig::from_file(&args.config, &args.overrides)?)
}

fn output_dir(args: &ConfigArgs, cfg: &ExperimentConfig) -> PathBuf {
    args.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| {
        let name = if cfg.name.is_empty() {
            cfg.algorithm.kind()
        } else {
            &cfg.name
        };
        Path::new("results").join(name)
    })
}

/// Run, export, and turn seed failures into an exit-2 failure after writing.
fn execute(cfg: &ExperimentConfig, dir: &Path) -> Result<Report, Failure> {
    let result = run_experiment(cfg)?;
    let (report, _) = export_results(&result, dir).map_err(|e| run_failure(e.to_string()))?;
    Ok(report)
}

fn describe(report: &Report) -> String {
    match report.slope {
        Some(s) => format!("{s:.6}"),
        None => "n/a".into(),
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.config)?;
    let dir = output_dir(&args.config, &cfg);
    let report = execute(&cfg, &dir)?;
    out!("fitted order {}", describe(&report));
    if let Some(e) = &report.fit_error {
        out!("fit unavailable: {e}");
    }
    out!("results in {}", dir.display());
    if !report.failures.is_empty() {
        for f in &report.failures {
            eprintln!("seed {} failed: {}", f.seed, f.error);
        }
        return Err(run_failure(format!(
            "{} of {} seeds failed",
            report.failures.len(),
            report.failures.len() + report.seeds.len()
        )));
    }
    Ok(())
}

/// One cell of a sweep grid.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub label: String,
    pub algorithm: String,
    pub rho: Option<f64>,
    pub alpha: Option<f64>,
    pub config: ExperimentConfig,
}

/// Expand a base configuration over the cross-product of a sweep grid.
///
/// Empty lists leave the corresponding setting as in `base`. ρ sets the
/// corruption level (and the known level of a RoSMID configured with one);
/// α applies to algorithms with a tradeoff exponent.
pub fn expand_sweep(base: &ExperimentConfig, grid: &SweepSpec) -> Result<Vec<SweepCell>> {
    let algorithms = if grid.algorithms.is_empty() {
        vec![base.algorithm.kind().to_string()]
    } else {
        grid.algorithms.clone()
    };
    let rhos: Vec<Option<f64>> = if grid.rho.is_empty() {
        vec![None]
    } else {
        grid.rho.iter().copied().map(Some).collect()
    };
    let mut cells = Vec::new();
    for name in &algorithms {
        let algorithm = if base.algorithm.kind() == name {
            base.algorithm.clone()
        } else {
            AlgorithmSpec::by_name(name).ok_or_else(|| Error::Config {
                path: "sweep.algorithms".into(),
                message: format!("unknown algorithm `{name}`"),
            })?
        };
        let alphas: Vec<Option<f64>> = if grid.alpha.is_empty() || algorithm.alpha().is_none() {
            vec![None]
        } else {
            grid.alpha.iter().copied().map(Some).collect()
        };
        for rho in &rhos {
            for alpha in &alphas {
                let mut cfg = base.clone();
                cfg.sweep = None;
                cfg.algorithm = algorithm.clone();
                let mut label = name.clone();
                if let Some(r) = rho {
                    set_rho(&mut cfg, *r)?;
                    write!(label, "_rho{r}").expect("string write");
                }
                if let Some(a) = alpha {
                    cfg.algorithm.set_alpha(*a);
                    write!(label, "_alpha{a}").expect("string write");
                }
                cfg.name = if base.name.is_empty() {
                    label.clone()
                } else {
                    format!("{}/{label}", base.name)
                };
                cfg.validate()?;
                cells.push(SweepCell {
                    label,
                    algorithm: name.clone(),
                    rho: *rho,
                    alpha: cfg.algorithm.alpha(),
                    config: cfg,
                });
            }
        }
    }
    Ok(cells)
}

fn set_rho(cfg: &mut ExperimentConfig, value: f64) -> Result<()> {
    match &mut cfg.corruption {
        CorruptionSpec::RhoImperfect { rho, .. } | CorruptionSpec::GeneralizedLearnability { rho, .. } => *rho = value,
        CorruptionSpec::FlipFirst { count, rho } => {
            *count = None;
            *rho = Some(value);
        }
        CorruptionSpec::None => {
            return Err(Error::Config {
                path: "sweep.rho".into(),
                message: "sweeping ρ needs a corruption model".into(),
            })
        }
    }
    if let AlgorithmSpec::Rosmid { rho: Some(r), .. } = &mut cfg.algorithm {
        *r = value;
    }
    Ok(())
}

pub const SUMMARY_FILE: &str = "summary.csv";
pub const SUMMARY_HEADER: &str = "cell,algorithm,rho,alpha,slope,stderr,failures";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let base = load_config(&args.config)?;
    let mut grid = base.sweep.clone().unwrap_or_default();
    if let Some(r) = args.rho {
        grid.rho = r;
    }
    if let Some(a) = args.alpha {
        grid.alpha = a;
    }
    if let Some(a) = args.algorithms {
        grid.algorithms = a;
    }
    let cells = expand_sweep(&base, &grid)?;
    let root = output_dir(&args.config, &base);
    std::fs::create_dir_all(&root).map_err(|e| run_failure(e.to_string()))?;
    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    let mut failed = 0;
    for cell in &cells {
        let report = execute(&cell.config, &root.join(&cell.label))?;
        failed += report.failures.len();
        out!("{:<32} fitted order {}", cell.label, describe(&report));
        writeln!(
            summary,
            "{},{},{},{},{},{},{}",
            cell.label,
            cell.algorithm,
            opt(cell.rho),
            opt(cell.alpha),
            opt(report.slope),
            opt(report.stderr),
            report.failures.len()
        )
        .expect("string write");
    }
    std::fs::write(root.join(SUMMARY_FILE), summary).map_err(|e| run_failure(e.to_string()))?;
    out!(
        "{} cells, summary in {}",
        cells.len(),
        root.join(SUMMARY_FILE).display()
    );
    if failed > 0 {
        return Err(run_failure(format!("{failed} seed runs failed")));
    }
    Ok(())
}

/// Shortest decimal rendering of `x` rounded to six places.
pub fn format_slope(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn cmd_fit(args: FitArgs) -> Result<(), Failure> {
    let table = read_trace_csv(&args.csv)?;
    let values = if args.functional {
        &table.functional_mean
    } else {
        &table.dueling_mean
    };
    let fit = fit_order(&table.rounds, values, args.fraction)?;
    out!("{}", format_slope(fit.slope));
    if args.verbose {
        out!(
            "intercept {:.6} stderr {:.3e} points {}",
            fit.intercept,
            fit.stderr,
            fit.n_points
        );
    }
    Ok(())
}

fn cmd_make_corpus(args: MakeCorpusArgs) -> Result<(), Failure> {
    let labels = make_synthetic_corpus(args.n, args.dim, args.k, args.seed, &args.out)?;
    if let Some(path) = &args.labels {
        let text: String = labels.iter().map(|l| format!("{l}\n")).collect();
        std::fs::write(path, text).map_err(|e| run_failure(e.to_string()))?;
    }
    out!("wrote {} x {} corpus to {}", args.n, args.dim, args.out.display());
    Ok(())
}

fn cmd_ingest(args: IngestArgs) -> Result<(), Failure> {
    let corpus = ingest_corpus(&args.csv, args.k, args.seed)?;
    out!(
        "{} items, {} columns, k = {}, {} Lloyd iterations",
        corpus.len(),
        corpus.dim(),
        corpus.k,
        corpus.iterations
    );
    for (j, size) in corpus.cluster_sizes().iter().enumerate() {
        out!(
            "cluster {j}: {size} items, centroid norm {:.4}",
            corpus.centroid(j).norm()
        );
    }
    Ok(())
}
