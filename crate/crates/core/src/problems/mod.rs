//! Benchmark problems with hidden ground truth.
//!
//! Problems are addressed by name: `toy`, `control`, `control-relaxed` and
//! `random:SEED:D:M`. [`prepare`] turns a problem into the oracle the solver
//! runs on (lifting it to epigraph form when its objective is a black box)
//! together with matching ground truth for grading.

pub mod control;
pub mod control_data;
pub mod random;
pub mod toy;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::oracle::{lift_initial_point, Benchmark, BlackBox, Epigraph, ProblemOracle, Verification};
use crate::params::SmoothnessParams;

pub use control::{ControlProblem, Rollout};
pub use random::RandomSmoothInstance;
pub use toy::ToyProblem;

/// Initial epigraph slack: `gamma_0 = f_0(x_0) + EPIGRAPH_SLACK`.
pub const EPIGRAPH_SLACK: f64 = 0.1;

/// A benchmark plus the data needed to run it.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub benchmark: Arc<dyn Benchmark>,
    pub x0: Vec<f64>,
    /// Default constants, one per constraint of the solver-facing problem
    /// (the epigraph row first when the objective is lifted).
    pub lipschitz: Vec<f64>,
    pub smoothness: Vec<f64>,
    /// A value no larger than the optimal objective.
    pub f0_lower_bound: Option<f64>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dim", &self.benchmark.dim())
            .field("constraints", &self.benchmark.num_constraints())
            .finish()
    }
}

/// `(name, d, m)` of every fixed problem.
pub fn registry() -> Vec<(&'static str, usize, usize)> {
    vec![
        ("toy", 2, 3),
        ("control", ControlProblem::DIM, ControlProblem::CONSTRAINTS),
        ("control-relaxed", ControlProblem::DIM, ControlProblem::CONSTRAINTS),
    ]
}

fn control(name: &str, p: ControlProblem) -> Problem {
    let m = ControlProblem::CONSTRAINTS + 1;
    Problem {
        name: name.into(),
        benchmark: Arc::new(p),
        x0: p.initial_inputs(),
        lipschitz: vec![ControlProblem::LIPSCHITZ; m],
        smoothness: vec![ControlProblem::SMOOTHNESS; m],
        f0_lower_bound: Some(control_data::OPTIMAL_COST),
    }
}

/// Look a problem up by name.
pub fn by_name(name: &str) -> Result<Problem> {
    let unknown = || Error::InvalidParameter { name: "problem", reason: format!("unknown problem '{name}'") };
    match name {
        "toy" => Ok(Problem {
            name: name.into(),
            benchmark: Arc::new(ToyProblem),
            x0: ToyProblem::INITIAL_POINT.to_vec(),
            lipschitz: vec![ToyProblem::LIPSCHITZ; 4],
            smoothness: vec![ToyProblem::SMOOTHNESS; 4],
            f0_lower_bound: Some(0.0),
        }),
        "control" => Ok(control(name, ControlProblem::default())),
        "control-relaxed" => Ok(control(name, ControlProblem::relaxed())),
        _ => {
            let parts: Vec<&str> = name.split(':').collect();
            let [prefix, seed, d, m] = parts[..] else { return Err(unknown()) };
            if prefix != "random" {
                return Err(unknown());
            }
            let parse = |s: &str| s.parse::<u64>().map_err(|_| unknown());
            let (seed, d, m) = (parse(seed)?, parse(d)? as usize, parse(m)? as usize);
            if d == 0 || m == 0 {
                return Err(unknown());
            }
            Ok(random_problem(seed, d, m))
        }
    }
}

/// A random instance with constants 10% above the exact ones.
pub fn random_problem(seed: u64, d: usize, m: usize) -> Problem {
    let inst = RandomSmoothInstance::generate(seed, d, m);
    let scale = |v: Vec<f64>| v.into_iter().map(|x| x * random::CONSTANT_MARGIN).collect();
    Problem {
        name: format!("random:{seed}:{d}:{m}"),
        x0: inst.initial_point(),
        lipschitz: scale(inst.exact_lipschitz()),
        smoothness: scale(inst.exact_smoothness()),
        f0_lower_bound: Some(inst.objective_lower_bound()),
        benchmark: Arc::new(inst),
    }
}

/// What the solver runs on, with ground truth in the same coordinates.
pub struct Prepared {
    pub oracle: ProblemOracle,
    pub truth: Arc<dyn Verification + Send + Sync>,
    pub x0: Vec<f64>,
    pub smoothness: SmoothnessParams,
    /// The objective was lifted into an extra epigraph variable (the last
    /// coordinate).
    pub lifted: bool,
}

impl Problem {
    pub fn lifted(&self) -> bool {
        self.benchmark.known_objective().is_none()
    }

    /// Dimension and constraint count the solver sees.
    pub fn solver_shape(&self) -> (usize, usize) {
        let lift = usize::from(self.lifted());
        (self.benchmark.dim() + lift, self.benchmark.num_constraints() + lift)
    }

    /// Ground truth in the solver's coordinates.
    pub fn truth(&self) -> Arc<dyn Verification + Send + Sync> {
        if self.lifted() {
            Arc::new(Epigraph::new(self.benchmark.clone()))
        } else {
            self.benchmark.clone()
        }
    }

    /// True objective of the original problem at a solver-space point.
    pub fn objective_at(&self, z: &[f64]) -> f64 {
        self.benchmark.true_values(&z[..self.benchmark.dim()])[0]
    }

    pub fn default_smoothness(&self) -> Result<SmoothnessParams> {
        SmoothnessParams::new(self.lipschitz.clone(), self.smoothness.clone())
    }

    /// Build the solver-facing oracle. `smoothness` has one entry per
    /// solver-facing constraint.
    pub fn prepare(&self, smoothness: SmoothnessParams) -> Result<Prepared> {
        crate::error::check_dim(self.solver_shape().1, smoothness.len())?;
        let base: Arc<dyn BlackBox> = self.benchmark.clone();
        if !self.lifted() {
            return Ok(Prepared {
                oracle: ProblemOracle::new(base),
                truth: self.benchmark.clone(),
                x0: self.x0.clone(),
                smoothness,
                lifted: false,
            });
        }
        // gamma_0 comes from a separate oracle so the run's log starts empty
        let x0 = lift_initial_point(&ProblemOracle::new(base), &self.x0, EPIGRAPH_SLACK)?;
        Ok(Prepared {
            oracle: ProblemOracle::new(Arc::new(Epigraph::new(self.benchmark.clone()))),
            truth: self.truth(),
            x0,
            smoothness,
            lifted: true,
        })
    }
}
