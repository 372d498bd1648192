//! Turning a configuration into simulated runs.
//!
//! Every seed gets independent random streams for instance sampling, the
//! learner and the simulated user, derived with [`mix_seed`]. Seeds run in
//! parallel on the ambient rayon pool; results come back in seed order.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::algorithms::{
    schedule_dbgd, schedule_rosmid, Bgd, BgdParams, Dbgd, DbgdSchedule, Doubler, Learner, RateMode, RoSmid,
    RoSmidParams, Sparring,
};
use crate::corruption::CorruptionSchedule;
use crate::error::{Error, Result};
use crate::geometry::{sample_unit_sphere, ActionSpace, ActionVector, Halfspace};
use crate::preference::{DuelOracle, LinkFunction, UtilityFunction};
use crate::{mix_seed, rng_from_seed, SimRng};

use super::config::{AlgorithmSpec, CorruptionSpec, ExperimentConfig, LinkSpec, SpaceSpec, ThetaSpec, UtilitySpec};
use super::corpus::{ingest_corpus, Corpus};
use super::regret::{record_grid, regret_bracket, regret_increment, RegretTrace};

/// Uniform draws used to estimate the utility range of a continuous space.
pub const RANGE_SAMPLES: usize = 100_000;

/// Slack allowed when checking that proposals lie in the space.
const CONTAINMENT_TOL: f64 = 1e-9;

const STREAM_INSTANCE: u64 = 0;
const STREAM_LEARNER: u64 = 1;
const STREAM_ORACLE: u64 = 2;
const STREAM_SECOND_ARM: u64 = 3;
const STREAM_REFERENCE: u64 = 4;

/// A fully specified problem for one seed.
#[derive(Debug, Clone)]
pub struct Instance {
    /// Actions the user is shown.
    pub space: ActionSpace,
    /// Convex set the learners iterate in (the enclosing ball for catalogs).
    pub learner_space: ActionSpace,
    pub utility: UtilityFunction,
    pub link: LinkFunction,
    pub optimum: ActionVector,
    pub best: f64,
    /// Exact minimum of the utility over `space`.
    pub worst: f64,
    /// `(l₁, L₁)` from [`regret_bracket`].
    pub bracket: (f64, f64),
}

impl Instance {
    pub fn new(space: ActionSpace, utility: UtilityFunction, link: LinkFunction) -> Result<Self> {
        let (optimum, best) = utility.maximize(&space)?;
        let worst = utility.minimum(&space)?;
        let bracket = regret_bracket(link, best - worst);
        Ok(Self {
            learner_space: space.convex_hull_proxy(),
            space,
            utility,
            link,
            optimum,
            best,
            worst,
            bracket,
        })
    }

    /// Map a learner proposal to the action actually shown.
    pub fn present(&self, a: &ActionVector) -> Result<ActionVector> {
        if self.space.is_convex() {
            if !self.space.contains(a, CONTAINMENT_TOL)? {
                return Err(Error::Invariant(format!(
                    "learner proposed an action outside the space (norm {})",
                    a.norm()
                )));
            }
            Ok(a.clone())
        } else {
            self.space.project(a)
        }
    }

    /// `0.1 · (max μ − min μ)`, the default corruption scale. Catalogs use
    /// the exact range; continuous spaces take the minimum over uniform draws.
    pub fn default_corruption_scale(&self, rng: &mut SimRng) -> Result<f64> {
        if !self.space.is_convex() {
            return Ok(0.1 * (self.best - self.worst));
        }
        let mut lo = f64::INFINITY;
        let mut hi = self.best;
        for _ in 0..RANGE_SAMPLES {
            let v = self.utility.value(&self.space.sample_uniform(rng))?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok(0.1 * (hi - lo))
    }

    /// Lipschitz constant of the utility over the learner's space.
    pub fn utility_lipschitz(&self) -> f64 {
        let r = self.learner_space.enclosing_radius();
        match &self.utility {
            UtilityFunction::QuadraticConcave { theta } => theta.norm() + r,
            UtilityFunction::Linear { theta } => theta.norm(),
            // gradient norm of the cosine at radius r
            UtilityFunction::RescaledCosine { scale, .. } => scale / r,
        }
    }
}

/// Configuration plus anything loaded once for all seeds.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub corpus: Option<Corpus>,
}

/// Load shared inputs and check the pieces fit together. Errors here are
/// configuration errors; nothing has been simulated yet.
pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    config.validate()?;
    let corpus = match &config.space {
        SpaceSpec::Catalog {
            csv,
            clusters,
            user_cluster,
            kmeans_seed,
        } => {
            let corpus = ingest_corpus(csv, *clusters, *kmeans_seed).map_err(|e| config_error("space", e))?;
            if *user_cluster >= corpus.k {
                return Err(config_error(
                    "space.user_cluster",
                    format!("cluster {user_cluster} out of range (k = {})", corpus.k),
                ));
            }
            Some(corpus)
        }
        _ => None,
    };
    let prepared = Prepared {
        config: config.clone(),
        corpus,
    };
    // one instance and learner surface every shape and parameter error up front
    let seed = config.seeds()[0];
    let instance = prepared.instance(seed)?;
    build_learner(config, &instance, seed)?;
    build_schedule(config, &instance, seed)?;
    Ok(prepared)
}

fn config_error(path: &str, e: impl std::fmt::Display) -> Error {
    Error::Config {
        path: path.into(),
        message: e.to_string(),
    }
}

impl Prepared {
    /// The problem instance for one seed.
    pub fn instance(&self, seed: u64) -> Result<Instance> {
        let cfg = &self.config;
        let mut rng = rng_from_seed(mix_seed(seed, STREAM_INSTANCE));
        let space = build_space(&cfg.space, self.corpus.as_ref())?;
        let utility = build_utility(&cfg.utility, &space, self.corpus.as_ref(), &cfg.space, &mut rng)?;
        let link = match cfg.link {
            LinkSpec::Logistic => LinkFunction::Logistic,
            LinkSpec::Linear => LinkFunction::Linear,
        };
        Instance::new(space, utility, link).map_err(|e| config_error("utility", e))
    }
}

fn build_space(spec: &SpaceSpec, corpus: Option<&Corpus>) -> Result<ActionSpace> {
    match spec {
        SpaceSpec::Ball { dim, radius } => ActionSpace::ball(*dim, *radius).map_err(|e| config_error("space", e)),
        SpaceSpec::Polytope {
            constraints,
            nonnegative,
        } => {
            let halfspaces = constraints
                .iter()
                .map(|c| Halfspace::new(c.normal.clone(), c.bound))
                .collect();
            ActionSpace::polytope(halfspaces, nonnegative.clone()).map_err(|e| config_error("space", e))
        }
        SpaceSpec::Catalog { .. } => corpus
            .ok_or_else(|| config_error("space", "catalog space without a loaded corpus"))?
            .action_space(),
    }
}

fn build_utility(
    spec: &UtilitySpec,
    space: &ActionSpace,
    corpus: Option<&Corpus>,
    space_spec: &SpaceSpec,
    rng: &mut SimRng,
) -> Result<UtilityFunction> {
    let dim = space.dim();
    let theta = |t: &ThetaSpec, rng: &mut SimRng| -> Result<DVector<f64>> {
        match t {
            ThetaSpec::Fixed(v) if v.len() == dim => Ok(DVector::from_vec(v.clone())),
            ThetaSpec::Fixed(v) => Err(config_error(
                "utility.theta",
                format!("has {} entries but the space has dimension {dim}", v.len()),
            )),
            ThetaSpec::Random(_) => Ok(sample_unit_sphere(rng, dim) * space.enclosing_radius()),
        }
    };
    Ok(match spec {
        UtilitySpec::Quadratic { theta: t } => UtilityFunction::QuadraticConcave { theta: theta(t, rng)? },
        UtilitySpec::Linear { theta: t } => UtilityFunction::Linear { theta: theta(t, rng)? },
        UtilitySpec::Cosine { pref, scale } => {
            if pref.len() != dim {
                return Err(config_error(
                    "utility.pref",
                    format!("has {} entries but the space has dimension {dim}", pref.len()),
                ));
            }
            UtilityFunction::RescaledCosine {
                pref: DVector::from_vec(pref.clone()),
                scale: *scale,
            }
        }
        UtilitySpec::CorpusCosine { scale } => {
            let cluster = match space_spec {
                SpaceSpec::Catalog { user_cluster, .. } => *user_cluster,
                _ => return Err(config_error("utility", "corpus_cosine requires a catalog space")),
            };
            corpus
                .ok_or_else(|| config_error("utility", "no corpus loaded"))?
                .user_utility(cluster, *scale)?
        }
    })
}

/// Corruption schedule for one seed. Default scales are estimated with the
/// instance stream, so they are reproducible per seed.
pub fn build_schedule(cfg: &ExperimentConfig, instance: &Instance, seed: u64) -> Result<CorruptionSchedule> {
    let mut rng = rng_from_seed(mix_seed(seed, STREAM_REFERENCE));
    let schedule = match &cfg.corruption {
        CorruptionSpec::None => CorruptionSchedule::None,
        CorruptionSpec::RhoImperfect { rho, c_kappa } => {
            let c = match c_kappa {
                Some(c) => *c,
                None => instance.default_corruption_scale(&mut rng)?,
            };
            CorruptionSchedule::rho_imperfect(*rho, c).map_err(|e| config_error("corruption", e))?
        }
        CorruptionSpec::GeneralizedLearnability { rho, lambda, c0 } => {
            let c = match c0 {
                Some(c) => *c,
                None => instance.default_corruption_scale(&mut rng)?,
            };
            CorruptionSchedule::generalized_learnability(instance.space.dim(), *rho, *lambda, c)
                .map_err(|e| config_error("corruption", e))?
        }
        CorruptionSpec::FlipFirst { .. } => CorruptionSchedule::FlipFirst {
            count: cfg.flip_count().unwrap_or(0),
        },
    };
    Ok(schedule)
}

fn bgd_params(delta: Option<f64>, eta: Option<f64>, space: &ActionSpace, horizon: u64) -> BgdParams {
    let defaults = BgdParams::default_for(space.enclosing_radius(), space.dim(), horizon);
    BgdParams {
        delta: delta.unwrap_or(defaults.delta),
        eta: eta.unwrap_or(defaults.eta),
    }
}

/// Fresh learner for one seed.
pub fn build_learner(cfg: &ExperimentConfig, instance: &Instance, seed: u64) -> Result<Box<dyn Learner>> {
    let space = &instance.learner_space;
    let (dim, radius, horizon) = (space.dim(), space.enclosing_radius(), cfg.horizon);
    let rng = |stream| rng_from_seed(mix_seed(seed, stream));
    let learner: Box<dyn Learner> = match &cfg.algorithm {
        AlgorithmSpec::Dbgd {
            alpha,
            gamma,
            delta,
            l_sigma,
            l_mu,
        } => {
            let l_sigma = l_sigma.unwrap_or(instance.link.max_slope());
            let l_mu = l_mu.unwrap_or_else(|| instance.utility_lipschitz());
            let base =
                schedule_dbgd(radius, dim, horizon, *alpha, l_sigma, l_mu).map_err(|e| config_error("algorithm", e))?;
            let schedule = DbgdSchedule::new(gamma.unwrap_or(base.gamma), delta.unwrap_or(base.delta), dim)
                .map_err(|e| config_error("algorithm", e))?;
            Box::new(Dbgd::new(space.clone(), schedule, rng(STREAM_LEARNER)))
        }
        AlgorithmSpec::Rosmid {
            rho,
            alpha,
            eta,
            lambda,
            phi,
        } => {
            if !matches!(space, ActionSpace::Ball { .. }) {
                return Err(config_error("algorithm", "rosmid runs on ball action spaces only"));
            }
            let eta = match (rho, alpha, eta) {
                (_, _, Some(e)) => Ok(*e),
                (Some(r), _, _) => schedule_rosmid(dim, horizon, RateMode::KnownRho(*r)),
                (_, Some(a), _) => schedule_rosmid(dim, horizon, RateMode::Alpha(*a)),
                _ => Err(config_error("algorithm", "rosmid needs `rho`, `alpha` or `eta`")),
            }
            .map_err(|e| config_error("algorithm", e))?;
            let params = RoSmidParams {
                radius,
                dim,
                eta,
                lambda: *lambda,
                phi: *phi,
            };
            Box::new(RoSmid::new(params, rng(STREAM_LEARNER)).map_err(|e| config_error("algorithm", e))?)
        }
        AlgorithmSpec::Bgd { delta, eta } => {
            let params = bgd_params(*delta, *eta, space, horizon);
            Box::new(Bgd::new(space.clone(), params, rng(STREAM_LEARNER)).map_err(|e| config_error("algorithm", e))?)
        }
        AlgorithmSpec::Sparring {
            delta,
            eta,
            loser_observes,
        } => {
            let params = bgd_params(*delta, *eta, space, horizon);
            let left =
                Bgd::new(space.clone(), params, rng(STREAM_LEARNER)).map_err(|e| config_error("algorithm", e))?;
            let right = Bgd::new(space.clone(), params, rng(STREAM_SECOND_ARM))?;
            Box::new(Sparring::new(left, right, *loser_observes))
        }
        AlgorithmSpec::Doubler { delta, eta } => {
            let params = bgd_params(*delta, *eta, space, horizon);
            let bandit =
                Bgd::new(space.clone(), params, rng(STREAM_LEARNER)).map_err(|e| config_error("algorithm", e))?;
            Box::new(Doubler::new(bandit, rng(STREAM_SECOND_ARM)))
        }
    };
    Ok(learner)
}

/// Play `horizon` rounds and record cumulative regret on the thinned grid.
///
/// Every round checks that the dueling increment stays within the
/// `(l₁, L₁)` bracket of the functional increment.
pub fn simulate(
    instance: &Instance,
    learner: &mut dyn Learner,
    oracle: &mut DuelOracle,
    horizon: u64,
    record_every: u64,
) -> Result<RegretTrace> {
    let grid = record_grid(horizon, record_every);
    let mut trace = RegretTrace {
        rounds: Vec::with_capacity(grid.len()),
        cum_dueling: Vec::with_capacity(grid.len()),
        cum_functional: Vec::with_capacity(grid.len()),
        budget: Default::default(),
    };
    let (l1, big_l1) = instance.bracket;
    let (mut dueling, mut functional) = (0.0, 0.0);
    let mut next = 0;
    for t in 1..=horizon {
        let (a, b) = learner.propose(t)?;
        let a = instance.present(&a)?;
        let b = instance.present(&b)?;
        let outcome = oracle.duel(&a, &b, t)?;
        learner.observe(t, &outcome)?;
        let (d, f) = regret_increment(&instance.utility, instance.link, instance.best, &a, &b)?;
        let slack = 1e-12 * (1.0 + f);
        if d < l1 * f - slack || d > big_l1 * f + slack {
            return Err(Error::Invariant(format!(
                "round {t}: dueling increment {d} outside [{}, {}]",
                l1 * f,
                big_l1 * f
            )));
        }
        dueling += d;
        functional += f;
        if grid.get(next) == Some(&t) {
            trace.rounds.push(t);
            trace.cum_dueling.push(dueling);
            trace.cum_functional.push(functional);
            next += 1;
        }
    }
    trace.budget = oracle.ledger.clone();
    Ok(trace)
}

/// Run one seed from scratch.
pub fn run_seed(prepared: &Prepared, seed: u64) -> Result<RegretTrace> {
    let cfg = &prepared.config;
    let instance = prepared.instance(seed)?;
    let schedule = build_schedule(cfg, &instance, seed)?;
    let mut learner = build_learner(cfg, &instance, seed)?;
    let mut oracle = DuelOracle::new(
        instance.utility.clone(),
        instance.link,
        schedule,
        rng_from_seed(mix_seed(seed, STREAM_ORACLE)),
    );
    simulate(
        &instance,
        learner.as_mut(),
        &mut oracle,
        cfg.horizon,
        cfg.record_every(),
    )
}

/// Outcome of one seed; failed runs keep their error message.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub index: usize,
    pub seed: u64,
    pub outcome: std::result::Result<RegretTrace, String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub runs: Vec<SeedRun>,
}

impl ExperimentResult {
    pub fn traces(&self) -> Vec<&RegretTrace> {
        self.runs.iter().filter_map(|r| r.outcome.as_ref().ok()).collect()
    }

    pub fn failures(&self) -> Vec<&SeedRun> {
        self.runs.iter().filter(|r| r.outcome.is_err()).collect()
    }
}

/// Run every seed of `config` in parallel. Only configuration problems are
/// returned as errors; a seed that fails mid-run is reported in its
/// [`SeedRun`].
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let prepared = prepare(config)?;
    let seeds = config.seeds();
    let runs = seeds
        .par_iter()
        .enumerate()
        .map(|(index, &seed)| SeedRun {
            index,
            seed,
            outcome: run_seed(&prepared, seed).map_err(|e| e.to_string()),
        })
        .collect();
    Ok(ExperimentResult {
        config: config.clone(),
        runs,
    })
}
