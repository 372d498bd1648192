//! JSON experiment configuration.
//!
//! Unknown keys are rejected; errors carry the dotted path of the offending
//! field. Overrides of the form `a.b.c=value` are applied to the parsed JSON
//! before it is turned into an [`ExperimentConfig`], last one wins.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub space: SpaceSpec,
    pub utility: UtilitySpec,
    pub link: LinkSpec,
    #[serde(default)]
    pub corruption: CorruptionSpec,
    pub algorithm: AlgorithmSpec,
    pub horizon: u64,
    pub seeds: SeedSpec,
    /// Trace thinning; defaults to `max(1, horizon / 1000)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_every: Option<u64>,
    #[serde(default = "default_fit_fraction")]
    pub fit_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Grid used by the `sweep` subcommand; ignored by single runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

fn default_fit_fraction() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    Ball {
        dim: usize,
        radius: f64,
    },
    Polytope {
        /// Rows `normal · a <= bound`.
        constraints: Vec<ConstraintSpec>,
        /// Per-coordinate `a_j >= 0` flags; its length fixes the dimension.
        nonnegative: Vec<bool>,
    },
    /// Items of a headerless numeric CSV, standardized and clustered; the
    /// user prefers the centroid of `user_cluster`.
    Catalog {
        csv: PathBuf,
        clusters: usize,
        #[serde(default)]
        user_cluster: usize,
        #[serde(default)]
        kmeans_seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    pub normal: Vec<f64>,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilitySpec {
    /// `θ·a − ½‖a‖²`.
    Quadratic { theta: ThetaSpec },
    /// `θ·a`.
    Linear { theta: ThetaSpec },
    /// `scale · cos∠(pref, a)`.
    Cosine {
        pref: Vec<f64>,
        #[serde(default = "default_cosine_scale")]
        scale: f64,
    },
    /// Cosine utility around the user cluster's centroid of a catalog space.
    CorpusCosine {
        #[serde(default = "default_cosine_scale")]
        scale: f64,
    },
}

fn default_cosine_scale() -> f64 {
    100.0
}

/// Either an explicit parameter vector or `"random_surface"`: a direction
/// drawn per seed and scaled to the enclosing radius of the space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    Fixed(Vec<f64>),
    Random(RandomTheta),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomTheta {
    RandomSurface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkSpec {
    Logistic,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorruptionSpec {
    #[default]
    None,
    RhoImperfect {
        rho: f64,
        /// Defaults to `0.1 · (μ(a*) − min sampled μ)`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c_kappa: Option<f64>,
    },
    GeneralizedLearnability {
        rho: f64,
        #[serde(default = "default_learnability_lambda")]
        lambda: f64,
        /// Defaults to `0.1 · (max μ − min μ)`, estimated by sampling.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c0: Option<f64>,
    },
    /// Forced losses over the first `C` rounds; give `C` directly or `rho`
    /// for `C = ⌊T^ρ⌋`.
    FlipFirst {
        #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
        count: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho: Option<f64>,
    },
}

fn default_learnability_lambda() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmSpec {
    Dbgd {
        #[serde(default = "default_dbgd_alpha")]
        alpha: f64,
        /// Overrides of the schedule and of the constants it is built from.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        l_sigma: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        l_mu: Option<f64>,
    },
    Rosmid {
        /// Known imperfection level (rate `√ln T / (d T^max(½,ρ))`).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho: Option<f64>,
        /// Tradeoff exponent (rate `√ln T / (2d) T^−α`).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
        /// Explicit learning rate.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
        #[serde(default = "default_rosmid_lambda")]
        lambda: f64,
        #[serde(default)]
        phi: f64,
    },
    /// Bandit gradient descent dueling against the fixed zero action.
    Bgd {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
    },
    Sparring {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
        #[serde(default = "default_true")]
        loser_observes: bool,
    },
    Doubler {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
    },
}

fn default_dbgd_alpha() -> f64 {
    0.25
}

pub(crate) fn default_rosmid_lambda() -> f64 {
    0.01
}

fn default_true() -> bool {
    true
}

impl AlgorithmSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Dbgd { .. } => "dbgd",
            Self::Rosmid { .. } => "rosmid",
            Self::Bgd { .. } => "bgd",
            Self::Sparring { .. } => "sparring",
            Self::Doubler { .. } => "doubler",
        }
    }

    /// Default configuration for an algorithm name.
    pub fn by_name(name: &str) -> Option<Self> {
        Some(match name {
            "dbgd" => Self::Dbgd {
                alpha: default_dbgd_alpha(),
                gamma: None,
                delta: None,
                l_sigma: None,
                l_mu: None,
            },
            "rosmid" => Self::Rosmid {
                rho: None,
                alpha: Some(0.5),
                eta: None,
                lambda: default_rosmid_lambda(),
                phi: 0.0,
            },
            "bgd" => Self::Bgd { delta: None, eta: None },
            "sparring" => Self::Sparring {
                delta: None,
                eta: None,
                loser_observes: true,
            },
            "doubler" => Self::Doubler { delta: None, eta: None },
            _ => return None,
        })
    }

    /// Tradeoff exponent, for algorithms that have one.
    pub fn alpha(&self) -> Option<f64> {
        match self {
            Self::Dbgd { alpha, .. } => Some(*alpha),
            Self::Rosmid { alpha, .. } => *alpha,
            _ => None,
        }
    }

    /// Set the tradeoff exponent; returns false when the algorithm has none.
    pub fn set_alpha(&mut self, value: f64) -> bool {
        match self {
            Self::Dbgd { alpha, .. } => {
                *alpha = value;
                true
            }
            Self::Rosmid { alpha, rho, eta, .. } => {
                *alpha = Some(value);
                *rho = None;
                *eta = None;
                true
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    List(Vec<u64>),
    Master { master_seed: u64, n_seeds: usize },
}

impl SeedSpec {
    /// Concrete per-run seeds. Master mode derives seed `i` as `mix(master, i)`.
    pub fn resolve(&self) -> Vec<u64> {
        match self {
            Self::List(v) => v.clone(),
            Self::Master { master_seed, n_seeds } => {
                (0..*n_seeds as u64).map(|i| crate::mix_seed(*master_seed, i)).collect()
            }
        }
    }
}

/// Cross-product grid for sweeps.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub rho: Vec<f64>,
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub algorithms: Vec<String>,
}

impl ExperimentConfig {
    pub fn record_every(&self) -> u64 {
        self.record_every.unwrap_or_else(|| (self.horizon / 1000).max(1))
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.seeds.resolve()
    }

    /// Structural checks that serde cannot express.
    pub fn validate(&self) -> Result<()> {
        let fail = |path: &str, message: String| {
            Err(Error::Config {
                path: path.into(),
                message,
            })
        };
        if self.horizon < 100 {
            return fail("horizon", format!("must be at least 100, got {}", self.horizon));
        }
        if self.seeds().is_empty() {
            return fail("seeds", "at least one seed is required".into());
        }
        if self.record_every() == 0 {
            return fail("record_every", "must be positive".into());
        }
        if !(self.fit_fraction > 0.0 && self.fit_fraction <= 1.0) {
            return fail("fit_fraction", format!("must lie in (0, 1], got {}", self.fit_fraction));
        }
        match &self.corruption {
            CorruptionSpec::FlipFirst { count, rho } if count.is_some() == rho.is_some() => {
                return fail("corruption", "flip_first needs exactly one of `C` or `rho`".into());
            }
            CorruptionSpec::RhoImperfect { rho, .. } | CorruptionSpec::GeneralizedLearnability { rho, .. }
                if !(0.0..=1.0).contains(rho) =>
            {
                return fail("corruption.rho", format!("must lie in [0, 1], got {rho}"));
            }
            _ => {}
        }
        if let AlgorithmSpec::Rosmid { rho, alpha, eta, .. } = &self.algorithm {
            let set = [rho.is_some(), alpha.is_some(), eta.is_some()]
                .iter()
                .filter(|b| **b)
                .count();
            if set != 1 {
                return fail(
                    "algorithm",
                    "rosmid needs exactly one of `rho`, `alpha` or `eta`".into(),
                );
            }
        }
        if matches!(self.utility, UtilitySpec::CorpusCosine { .. }) && !matches!(self.space, SpaceSpec::Catalog { .. })
        {
            return fail("utility", "corpus_cosine requires a catalog space".into());
        }
        Ok(())
    }

    /// Number of forced-loss rounds for a `flip_first` corruption.
    pub fn flip_count(&self) -> Option<u64> {
        match &self.corruption {
            CorruptionSpec::FlipFirst { count: Some(c), .. } => Some(*c),
            CorruptionSpec::FlipFirst { rho: Some(r), .. } => Some((self.horizon as f64).powf(*r).floor() as u64),
            _ => None,
        }
    }

    /// Parse from JSON text, applying `key.path=value` overrides.
    pub fn from_json_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text).map_err(|e| Error::Config {
            path: "<root>".into(),
            message: e.to_string(),
        })?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        Self::from_value(value)
    }

    pub fn from_file(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text, overrides)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let cfg: Self = serde_path_to_error::deserialize(value).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Apply one `dotted.key=value` override. The value is parsed as JSON and
/// falls back to a plain string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| Error::Config {
        path: assignment.into(),
        message: "override must look like key.path=value".into(),
    })?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        let here = parts[..=i].join(".");
        let obj = node.as_object_mut().ok_or_else(|| Error::Config {
            path: here.clone(),
            message: "cannot descend into a non-object".into(),
        })?;
        if last {
            obj.insert((*part).to_string(), value);
            return Ok(());
        }
        node = obj
            .entry((*part).to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}
