//! The outer loop: probe, estimate, build the local set, step, certify.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasible_set::build_safe_set;
use crate::gradient::{difference_quotient, initial_step, perturbed_values, safe_radius, step_size};
use crate::kkt::{kkt_residual, KktResidual};
use crate::linalg::{dist, norm_inf, sub};
use crate::oracle::{ProblemOracle, Verification};
use crate::params::{AlgorithmConfig, SmoothnessParams, Xi};
use crate::qcqp::{solve_sp1, solve_sp2, Sp1Instance, Sp2Instance};

/// Step threshold that makes the returned pair `eta`-KKT:
///
/// ```text
/// min( eta / (60 Lambda sum_i M_i),  eta / (12 mu),  1,
///      eta / (4 Lambda (alpha_max + 2 L_max + 2 M_max)) )
/// ```
/// with `alpha_max = sqrt(d) M_max / 2`.
pub fn threshold_xi(eta: f64, lambda: f64, mu: f64, lipschitz: &[f64], smoothness: &[f64], d: usize) -> f64 {
    let sum_m: f64 = smoothness.iter().sum();
    let l_max = lipschitz.iter().copied().fold(0.0, f64::max);
    let m_max = smoothness.iter().copied().fold(0.0, f64::max);
    let alpha_max = (d as f64).sqrt() * m_max / 2.0;
    (eta / (60.0 * lambda * sum_m))
        .min(eta / (12.0 * mu))
        .min(1.0)
        .min(eta / (4.0 * lambda * (alpha_max + 2.0 * l_max + 2.0 * m_max)))
}

/// Worst-case iteration count `(f_0(x_0) - inf f_0) / (mu xi^2)`; the run
/// stops within this many iterations plus one.
pub fn iteration_bound(f0_x0: f64, f0_inf: f64, mu: f64, xi: f64) -> Result<f64> {
    if f0_x0 < f0_inf {
        return Err(Error::InvalidParameter {
            name: "f0_x0",
            reason: format!("initial value {f0_x0} is below the infimum {f0_inf}"),
        });
    }
    Ok((f0_x0 - f0_inf) / (mu * xi * xi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Event {
    /// Constants multiplied by the growth factor; `infeasible` is false
    /// when the new point merely touched a constraint.
    ConstantsGrown { constraint: usize, infeasible: bool, l_max: f64, m_max: f64 },
    LambdaBoundRaised { from: f64, to: f64 },
    RadiusClamped { constraints: Vec<usize> },
    /// The subproblem's multipliers did not certify the step; the
    /// termination test was skipped this iteration.
    WarmStartRejected,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::ConstantsGrown { constraint, infeasible, l_max, m_max } => write!(
                f,
                "grow_constants(constraint={constraint},infeasible={infeasible},L_max={l_max},M_max={m_max})"
            ),
            Event::LambdaBoundRaised { from, to } => write!(f, "raise_lambda({from}->{to})"),
            Event::RadiusClamped { constraints } => {
                let list: Vec<String> = constraints.iter().map(|c| c.to_string()).collect();
                write!(f, "radius_clamp({})", list.join("|"))
            }
            Event::WarmStartRejected => write!(f, "warm_start_rejected"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub x_k: Vec<f64>,
    pub f0: f64,
    /// Objective at the subproblem solution `x_{k+1}`.
    pub f0_next: f64,
    pub step_norm: f64,
    pub nu: f64,
    pub lambda_inf: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2_max: Option<f64>,
    pub samples_cumulative: usize,
    pub wall_time_ms: f64,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminationReason {
    BothConditionsMet,
    MaxIterations,
    OracleError,
    /// An infeasible sample was observed with constant adaptation disabled.
    InfeasibleSample,
    /// A subproblem solve failed to converge.
    SubproblemFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminationReport {
    pub x_tilde: Vec<f64>,
    pub lambda_tilde: Vec<f64>,
    pub k_tilde: usize,
    /// Filled in by [`TerminationReport::grade`]; the solver itself has no
    /// access to ground truth.
    pub residual: Option<KktResidual>,
    pub reason: TerminationReason,
    /// Dual bound active at termination.
    pub lambda_bound: f64,
    pub xi: f64,
    pub message: Option<String>,
}

impl TerminationReport {
    pub fn grade(&mut self, truth: &(impl Verification + ?Sized)) -> Result<&KktResidual> {
        self.residual = Some(kkt_residual(truth, &self.x_tilde, &self.lambda_tilde)?);
        Ok(self.residual.as_ref().expect("just set"))
    }
}

/// Quantities adapted during a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationState {
    pub smoothness: SmoothnessParams,
    pub lambda_current: f64,
    pub lambda_updates: usize,
    pub last_feasible_iterate: Vec<f64>,
}

/// Response to an infeasible (or boundary) sample: every `L_i` and `M_i` is
/// multiplied by the growth factor and the loop resumes from the last
/// feasible iterate.
pub fn adapt_constants(mut state: AdaptationState, _violation: usize) -> AdaptationState {
    state.smoothness.grow();
    state
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub report: TerminationReport,
    pub trace: Vec<IterationRecord>,
    pub state: AdaptationState,
}

fn resolve_xi(config: &AlgorithmConfig, lambda: f64, smooth: &SmoothnessParams, d: usize) -> f64 {
    match config.xi {
        Xi::Auto => threshold_xi(config.eta, lambda, config.mu, smooth.lipschitz(), smooth.smoothness(), d),
        Xi::Fixed(v) => v,
    }
}

/// Run the solver from the strictly feasible point `x0`.
pub fn run(
    oracle: &ProblemOracle,
    smoothness: SmoothnessParams,
    config: &AlgorithmConfig,
    x0: &[f64],
) -> Result<RunOutcome> {
    run_with_observer(oracle, smoothness, config, x0, |_| {})
}

/// As [`run`], calling `observe` on every record as soon as it is complete.
pub fn run_with_observer(
    oracle: &ProblemOracle,
    smoothness: SmoothnessParams,
    config: &AlgorithmConfig,
    x0: &[f64],
    mut observe: impl FnMut(&IterationRecord),
) -> Result<RunOutcome> {
    config.validate()?;
    let objective = oracle.known_objective().ok_or(Error::ObjectiveNotLinear)?.clone();
    let d = oracle.dim();
    let m = oracle.num_constraints();
    crate::error::check_dim(d, x0.len())?;
    crate::error::check_dim(m, smoothness.len())?;

    let started = Instant::now();
    let elapsed_ms = || {
        let t = started.elapsed().saturating_sub(oracle.excluded_time());
        t.as_secs_f64() * 1e3
    };

    let mut state = AdaptationState {
        smoothness,
        lambda_current: config.lambda_bound,
        lambda_updates: 0,
        last_feasible_iterate: x0.to_vec(),
    };
    let mut xi = resolve_xi(config, state.lambda_current, &state.smoothness, d);
    let mut trace = Vec::new();
    let mut last_lambda = vec![0.0; m];

    let finish = |state: AdaptationState,
                  trace: Vec<IterationRecord>,
                  x: Vec<f64>,
                  lambda: Vec<f64>,
                  k: usize,
                  reason: TerminationReason,
                  xi: f64,
                  message: Option<String>| {
        Ok(RunOutcome {
            report: TerminationReport {
                x_tilde: x,
                lambda_tilde: lambda,
                k_tilde: k,
                residual: None,
                reason,
                lambda_bound: state.lambda_current,
                xi,
                message,
            },
            trace,
            state,
        })
    };

    let mut fvals = match oracle.query_point(x0, 0) {
        Ok(v) => v[1..].to_vec(),
        Err(e) => {
            return finish(state, trace, x0.to_vec(), last_lambda, 0, TerminationReason::OracleError, xi, Some(e.to_string()))
        }
    };
    if let Some((index, &value)) = fvals.iter().enumerate().find(|(_, f)| !(**f < 0.0)) {
        return Err(Error::StrictFeasibilityLost { index, value });
    }
    let mut x = x0.to_vec();
    let mut k = 0usize;
    let mut pending: Vec<Event> = Vec::new();

    loop {
        if k >= config.max_iterations {
            return finish(state, trace, x, last_lambda, k, TerminationReason::MaxIterations, xi, None);
        }
        let mut events = std::mem::take(&mut pending);
        let f0 = objective.value(&x);
        let l_star = safe_radius(&fvals, state.smoothness.l_max())?;
        let nu = if k == 0 {
            initial_step(l_star, d)
        } else {
            step_size(l_star, k, config.eta, state.smoothness.alpha_max(d), m, state.lambda_current, d)
        };

        let perturbed = match perturbed_values(oracle, &x, nu, k, config.parallel_gradients, true) {
            Ok(p) => p,
            Err(e) => {
                return finish(state, trace, x, last_lambda, k, TerminationReason::OracleError, xi, Some(e.to_string()))
            }
        };
        let violation = perturbed
            .iter()
            .find_map(|v| v[1..].iter().position(|f| *f > 0.0));
        if let Some(constraint) = violation {
            if !config.adapt_constants {
                return finish(state, trace, x, last_lambda, k, TerminationReason::InfeasibleSample, xi, None);
            }
            state = adapt_constants(state, constraint);
            if matches!(config.xi, Xi::Auto) {
                xi = resolve_xi(config, state.lambda_current, &state.smoothness, d);
            }
            events.push(Event::ConstantsGrown {
                constraint,
                infeasible: true,
                l_max: state.smoothness.l_max(),
                m_max: state.smoothness.m_max(),
            });
            let record = IterationRecord {
                k,
                x_k: x.clone(),
                f0,
                f0_next: f0,
                step_norm: 0.0,
                nu,
                lambda_inf: None,
                delta1: None,
                delta2_max: None,
                samples_cumulative: oracle.sample_count(),
                wall_time_ms: elapsed_ms(),
                events,
            };
            observe(&record);
            trace.push(record);
            k += 1;
            continue;
        }

        let gradients: Vec<Vec<f64>> = (0..m).map(|i| difference_quotient(fvals[i], &perturbed, i + 1, nu)).collect();
        let set = build_safe_set(&x, &fvals, &gradients, state.smoothness.smoothness())?;
        if !set.clamped.is_empty() {
            events.push(Event::RadiusClamped { constraints: set.clamped.clone() });
        }
        let sp1 = match solve_sp1(&Sp1Instance { c: &objective.c, mu: config.mu, set: &set }, &config.sp1) {
            Ok(s) => s,
            Err(e) => {
                return finish(state, trace, x, last_lambda, k, TerminationReason::SubproblemFailure, xi, Some(e.to_string()))
            }
        };
        let x_next = sp1.x.clone();
        let step_norm = dist(&x_next, &x);
        let f0_next = objective.value(&x_next);
        last_lambda = sp1.lambda.clone();

        let mut record = IterationRecord {
            k,
            x_k: x.clone(),
            f0,
            f0_next,
            step_norm,
            nu,
            lambda_inf: None,
            delta1: None,
            delta2_max: None,
            samples_cumulative: oracle.sample_count(),
            wall_time_ms: 0.0,
            events: Vec::new(),
        };

        if step_norm <= xi {
            let inst = Sp2Instance {
                grad_f0_next: objective.c.clone(),
                step: sub(&x_next, &x),
                gradients,
                fvals: fvals.clone(),
                smoothness: state.smoothness.smoothness().to_vec(),
                mu: config.mu,
                eta: config.eta,
            };
            match solve_sp2(&inst, &config.sp2, &sp1.lambda) {
                Ok(sp2) => {
                    let lambda_inf = norm_inf(&sp2.lambda);
                    record.lambda_inf = Some(lambda_inf);
                    record.delta1 = Some(sp2.delta1);
                    record.delta2_max = Some(sp2.delta2_max());
                    if sp2.feasible && lambda_inf <= 2.0 * state.lambda_current {
                        record.events = events;
                        record.wall_time_ms = elapsed_ms();
                        observe(&record);
                        trace.push(record);
                        return finish(
                            state,
                            trace,
                            x_next,
                            sp2.lambda,
                            k + 1,
                            TerminationReason::BothConditionsMet,
                            xi,
                            None,
                        );
                    }
                    if config.adapt_lambda && lambda_inf > 2.0 * state.lambda_current {
                        let from = state.lambda_current;
                        state.lambda_current = config.kappa * lambda_inf;
                        state.lambda_updates += 1;
                        events.push(Event::LambdaBoundRaised { from, to: state.lambda_current });
                        xi = resolve_xi(config, state.lambda_current, &state.smoothness, d);
                    }
                }
                Err(Error::Sp2WarmStartInvalid { .. }) => events.push(Event::WarmStartRejected),
                Err(e) => return Err(e),
            }
        }
        record.events = events;
        record.wall_time_ms = elapsed_ms();
        observe(&record);
        trace.push(record);
        k += 1;

        let values = match oracle.query_point(&x_next, k) {
            Ok(v) => v,
            Err(e) => {
                return finish(state, trace, x, last_lambda, k, TerminationReason::OracleError, xi, Some(e.to_string()))
            }
        };
        let next_fvals = &values[1..];
        if let Some(constraint) = next_fvals.iter().position(|f| !(*f < 0.0)) {
            let infeasible = next_fvals[constraint] > 0.0;
            if infeasible && !config.adapt_constants {
                return finish(state, trace, x, last_lambda, k, TerminationReason::InfeasibleSample, xi, None);
            }
            // stay at the last feasible iterate with larger constants
            state = adapt_constants(state, constraint);
            if matches!(config.xi, Xi::Auto) {
                xi = resolve_xi(config, state.lambda_current, &state.smoothness, d);
            }
            pending.push(Event::ConstantsGrown {
                constraint,
                infeasible,
                l_max: state.smoothness.l_max(),
                m_max: state.smoothness.m_max(),
            });
            x = state.last_feasible_iterate.clone();
        } else {
            x = x_next;
            fvals = next_fvals.to_vec();
            state.last_feasible_iterate = x.clone();
        }
    }
}
