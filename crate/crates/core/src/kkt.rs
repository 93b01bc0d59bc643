//! Approximate-KKT residuals, evaluated against ground truth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, norm};
use crate::oracle::Verification;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktResidual {
    /// `|| grad f_0(x) + sum_i lambda_i grad f_i(x) ||`
    pub stationarity: f64,
    /// `|lambda_i f_i(x)|` per constraint.
    pub complementarity: Vec<f64>,
    pub primal_feasible: bool,
    pub max_residual: f64,
}

impl KktResidual {
    /// `(x, lambda)` is an `eta`-KKT pair.
    pub fn is_eta_kkt(&self, eta: f64) -> bool {
        self.primal_feasible && self.max_residual <= eta
    }
}

/// Exact residuals of the approximate-KKT conditions at `(x, lambda)`.
///
/// `lambda` must be elementwise nonnegative.
pub fn kkt_residual(truth: &(impl Verification + ?Sized), x: &[f64], lambda: &[f64]) -> Result<KktResidual> {
    if let Some((index, &value)) = lambda.iter().enumerate().find(|(_, l)| **l < 0.0) {
        return Err(Error::NegativeMultiplier { index, value });
    }
    let values = truth.true_values(x);
    let grads = truth.true_gradients(x);
    let m = values.len() - 1;
    crate::error::check_dim(m, lambda.len())?;

    let mut r = grads[0].clone();
    for (i, &l) in lambda.iter().enumerate() {
        axpy(l, &grads[i + 1], &mut r);
    }
    let stationarity = norm(&r);
    let complementarity: Vec<f64> = lambda.iter().zip(&values[1..]).map(|(l, f)| (l * f).abs()).collect();
    let primal_feasible = values[1..].iter().all(|&f| f <= 0.0);
    let max_residual = complementarity.iter().copied().fold(stationarity, f64::max);
    Ok(KktResidual { stationarity, complementarity, primal_feasible, max_residual })
}
