//! Forward finite differences with a step that keeps every perturbed sample
//! feasible.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, OracleError, Result};
use crate::oracle::ProblemOracle;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate {
    pub g: Vec<f64>,
    pub nu: f64,
    /// `sqrt(d) * M_i / 2 * nu`, the worst-case distance to the true gradient.
    pub error_bound: f64,
    /// Point queries spent, the shared base point included.
    pub samples_used: usize,
}

/// Largest radius around the current point inside which every constraint
/// stays negative: `min_i (-f_i) / L_max`.
pub fn safe_radius(fvals: &[f64], l_max: f64) -> Result<f64> {
    if let Some((index, &value)) = fvals.iter().enumerate().find(|(_, f)| !(**f < 0.0)) {
        return Err(Error::StrictFeasibilityLost { index, value });
    }
    if !(l_max > 0.0) {
        return Err(Error::InvalidParameter { name: "l_max", reason: format!("must be positive, got {l_max}") });
    }
    let slack = fvals.iter().fold(f64::INFINITY, |m, &f| m.min(-f));
    Ok(slack / l_max)
}

/// Step used when building the very first local set: `l* / sqrt(d)`.
pub fn initial_step(l_star: f64, d: usize) -> f64 {
    l_star / (d as f64).sqrt()
}

/// Finite-difference step at iteration `k >= 1`:
/// `min(l*/sqrt(d), 1/k, eta / (12 alpha_max m Lambda))`.
pub fn step_size(l_star: f64, k: usize, eta: f64, alpha_max: f64, m: usize, lambda: f64, d: usize) -> f64 {
    debug_assert!(k >= 1, "iterations are counted from 1 here");
    let certificate = eta / (12.0 * alpha_max * m as f64 * lambda);
    initial_step(l_star, d).min(1.0 / k as f64).min(certificate)
}

/// Values at `x + nu e_j` for `j = 0..d`, in coordinate order.
///
/// With `stop_on_violation`, sequential probing stops right after the first
/// point with a positive constraint value, so the result is shorter than `d`
/// only when an infeasible sample was seen. Concurrent probing always
/// evaluates all `d`.
pub(crate) fn perturbed_values(
    oracle: &ProblemOracle,
    x: &[f64],
    nu: f64,
    tag: usize,
    parallel: bool,
    stop_on_violation: bool,
) -> Result<Vec<Vec<f64>>, OracleError> {
    let probe = |j: usize| {
        let mut p = x.to_vec();
        p[j] += nu;
        oracle.query_point(&p, tag)
    };
    if parallel && oracle.concurrent() {
        (0..x.len()).into_par_iter().map(probe).collect()
    } else {
        let mut out = Vec::with_capacity(x.len());
        for j in 0..x.len() {
            let v = probe(j)?;
            let infeasible = v[1..].iter().any(|f| *f > 0.0);
            out.push(v);
            if stop_on_violation && infeasible {
                break;
            }
        }
        Ok(out)
    }
}

pub(crate) fn difference_quotient(base: f64, perturbed: &[Vec<f64>], index: usize, nu: f64) -> Vec<f64> {
    perturbed.iter().map(|v| (v[index] - base) / nu).collect()
}

pub(crate) fn error_bound(d: usize, smoothness: f64, nu: f64) -> f64 {
    (d as f64).sqrt() * smoothness / 2.0 * nu
}

/// Forward-difference gradient of constraint `i` at `x`.
///
/// `base` is the already known value `f_i(x)`; only the `d` perturbed
/// points are queried.
pub fn estimate_gradient(
    oracle: &ProblemOracle,
    x: &[f64],
    i: usize,
    base: f64,
    nu: f64,
    smoothness: f64,
    tag: usize,
) -> Result<GradientEstimate> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter { name: "nu", reason: format!("must be positive, got {nu}") });
    }
    crate::error::check_dim(oracle.dim(), x.len())?;
    let perturbed = perturbed_values(oracle, x, nu, tag, false, false)?;
    Ok(GradientEstimate {
        g: difference_quotient(base, &perturbed, i, nu),
        nu,
        error_bound: error_bound(x.len(), smoothness, nu),
        samples_used: x.len() + 1,
    })
}
