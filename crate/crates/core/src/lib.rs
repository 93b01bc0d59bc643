//! Safe zeroth-order optimization of black-box smooth constrained problems.
//!
//! Every point the solver queries is strictly feasible: local feasible sets
//! are built from finite-difference gradient estimates and known smoothness
//! constants, and each iteration solves a small convex QCQP over them.

pub mod cli;
pub mod driver;
pub mod error;
pub mod feasible_set;
pub mod gradient;
pub mod kkt;
pub mod linalg;
pub mod oracle;
pub mod params;
pub mod problems;
pub mod qcqp;

pub use driver::{
    adapt_constants, iteration_bound, run, run_with_observer, threshold_xi, AdaptationState, Event, IterationRecord,
    RunOutcome, TerminationReason, TerminationReport,
};
pub use error::{Error, OracleError, Result};
pub use feasible_set::{ball_containment, build_safe_set, lipschitz_set, Ball, LocalFeasibleSet};
pub use gradient::{estimate_gradient, safe_radius, GradientEstimate};
pub use kkt::{kkt_residual, KktResidual};
pub use oracle::{
    epigraph_reformulate, lift_initial_point, Benchmark, BlackBox, Epigraph, LinearObjective, ProblemOracle, Sample,
    Verification,
};
pub use params::{AlgorithmConfig, SmoothnessParams, Sp1Options, Sp2Options, Xi};
