//! The JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{AlgorithmConfig, SmoothnessParams, Sp1Options, Sp2Options, Xi};
use crate::problems::{self, Problem};

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "SZOQQ_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemRef {
    Name(String),
    Spec(ProblemSpec),
}

/// `{"name": "random", "d": 4, "m": 2}`; the seed comes from the top-level
/// `seed` unless given here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub name: String,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Constants {
    Uniform(f64),
    PerConstraint(Vec<f64>),
}

impl Constants {
    fn expand(&self, m: usize, what: &'static str) -> Result<Vec<f64>> {
        match self {
            Constants::Uniform(v) => Ok(vec![*v; m]),
            Constants::PerConstraint(v) if v.len() == m => Ok(v.clone()),
            Constants::PerConstraint(v) => Err(Error::InvalidParameter {
                name: what,
                reason: format!("expected {m} entries (one per constraint the solver sees), got {}", v.len()),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Adaptation {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default = "two")]
    pub growth_factor: f64,
    /// Raise the dual bound when the multipliers exceed it.
    #[serde(default = "yes")]
    pub lambda: bool,
}

fn yes() -> bool {
    true
}

fn two() -> f64 {
    2.0
}

impl Default for Adaptation {
    fn default() -> Self {
        Adaptation { enabled: true, growth_factor: 2.0, lambda: true }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default)]
    pub sp1: Option<f64>,
    #[serde(default)]
    pub sp2: Option<f64>,
    #[serde(default)]
    pub sp1_max_iterations: Option<usize>,
    #[serde(default)]
    pub sp2_max_inner_iterations: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default)]
    pub trace: Option<PathBuf>,
    #[serde(default)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemRef,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
    /// Initial bound on the multipliers.
    #[serde(default)]
    pub lambda_cap: Option<f64>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub xi: Option<Xi>,
    #[serde(default)]
    pub lipschitz: Option<Constants>,
    #[serde(default)]
    pub smoothness: Option<Constants>,
    #[serde(default)]
    pub adaptation: Adaptation,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub parallel_gradients: bool,
}

/// A validated configuration, ready to run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub problem: Problem,
    pub smoothness: SmoothnessParams,
    pub algorithm: AlgorithmConfig,
    pub trace: PathBuf,
    pub report: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter { name: "config", reason: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidParameter {
            name: "config",
            reason: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::from_json(&text)
    }

    /// Full problem name, e.g. `random:7:4:2`.
    pub fn problem_name(&self, seed_override: Option<u64>) -> Result<String> {
        let seed = seed_override.or(self.seed);
        match &self.problem {
            ProblemRef::Name(n) => Ok(n.clone()),
            ProblemRef::Spec(s) if s.name == "random" => {
                let missing = |what| Error::InvalidParameter {
                    name: "problem",
                    reason: format!("random problems need '{what}'"),
                };
                let seed = seed_override.or(s.seed).or(seed).ok_or_else(|| missing("seed"))?;
                let d = s.d.ok_or_else(|| missing("d"))?;
                let m = s.m.ok_or_else(|| missing("m"))?;
                Ok(format!("random:{seed}:{d}:{m}"))
            }
            ProblemRef::Spec(s) => {
                if s.d.is_some() || s.m.is_some() || s.seed.is_some() {
                    return Err(Error::InvalidParameter {
                        name: "problem",
                        reason: format!("'{}' takes no parameters", s.name),
                    });
                }
                Ok(s.name.clone())
            }
        }
    }

    /// Validate everything and fill in defaults. Relative output paths are
    /// taken relative to `base` (normally the config file's directory).
    pub fn resolve(&self, base: &Path, seed_override: Option<u64>) -> Result<Resolved> {
        let problem = problems::by_name(&self.problem_name(seed_override)?)?;
        let (_, m) = problem.solver_shape();
        let lipschitz = match &self.lipschitz {
            Some(c) => c.expand(m, "lipschitz")?,
            None => problem.lipschitz.clone(),
        };
        let smoothness = match &self.smoothness {
            Some(c) => c.expand(m, "smoothness")?,
            None => problem.smoothness.clone(),
        };
        let smoothness =
            SmoothnessParams::new(lipschitz, smoothness)?.with_growth_factor(self.adaptation.growth_factor)?;

        let d = AlgorithmConfig::default();
        let algorithm = AlgorithmConfig {
            mu: self.mu.unwrap_or(d.mu),
            eta: self.eta.unwrap_or(d.eta),
            lambda_bound: self.lambda_cap.unwrap_or(d.lambda_bound),
            kappa: self.kappa.unwrap_or(d.kappa),
            xi: self.xi.unwrap_or(d.xi),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            adapt_lambda: self.adaptation.lambda,
            adapt_constants: self.adaptation.enabled,
            parallel_gradients: self.parallel_gradients,
            sp1: Sp1Options {
                tol: self.tolerances.sp1.unwrap_or(d.sp1.tol),
                max_iterations: self.tolerances.sp1_max_iterations.unwrap_or(d.sp1.max_iterations),
            },
            sp2: Sp2Options {
                tol: self.tolerances.sp2.unwrap_or(d.sp2.tol),
                max_inner_iterations: self.tolerances.sp2_max_inner_iterations.unwrap_or(d.sp2.max_inner_iterations),
            },
        };
        algorithm.validate()?;

        let place = |p: &Option<PathBuf>, default: &str| {
            let p = p.clone().unwrap_or_else(|| PathBuf::from(default));
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        let trace = place(&self.output.trace, "trace.csv");
        let report = match &self.output.report {
            Some(_) => place(&self.output.report, ""),
            None => super::trace::report_path(&trace),
        };
        Ok(Resolved { problem, smoothness, algorithm, trace, report })
    }
}

/// `SZOQQ_SEED`, if set.
pub fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| Error::InvalidParameter {
            name: "seed",
            reason: format!("{SEED_ENV}={v} is not an unsigned integer"),
        }),
        Err(_) => Ok(None),
    }
}
