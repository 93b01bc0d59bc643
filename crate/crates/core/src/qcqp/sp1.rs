use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasible_set::LocalFeasibleSet;
use crate::linalg::{axpy, dot, norm, norm_sq};
use crate::params::Sp1Options;

const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct Sp1Instance<'a> {
    /// Gradient of the (linear) objective.
    pub c: &'a [f64],
    pub mu: f64,
    /// Balls around the anchor `x_k`; must carry the quadratic model.
    pub set: &'a LocalFeasibleSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubproblemSolution {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    /// `c'(x - x_k) + mu ||x - x_k||^2`
    pub objective: f64,
    pub duality_gap: f64,
    /// Norm of the Lagrangian gradient at `(x, lambda)`.
    pub stationarity_residual: f64,
    /// `max_i |lambda_i q_i(x)|`
    pub complementarity: f64,
    pub iterations: usize,
}

/// Gram-matrix form of the dual, so each evaluation costs `O(m^2)`.
struct Dual<'a> {
    fvals: &'a [f64],
    smoothness: &'a [f64],
    mu: f64,
    gram: Vec<f64>,
    cg: Vec<f64>,
    cc: f64,
}

struct DualPoint {
    value: f64,
    grad: Vec<f64>,
}

impl<'a> Dual<'a> {
    fn new(inst: &Sp1Instance<'a>, gradients: &'a [Vec<f64>], smoothness: &'a [f64]) -> Self {
        let m = gradients.len();
        let mut gram = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let v = dot(&gradients[i], &gradients[j]);
                gram[i * m + j] = v;
                gram[j * m + i] = v;
            }
        }
        Dual {
            fvals: &inst.set.fvals,
            smoothness,
            mu: inst.mu,
            gram,
            cg: gradients.iter().map(|g| dot(inst.c, g)).collect(),
            cc: norm_sq(inst.c),
        }
    }

    fn m(&self) -> usize {
        self.fvals.len()
    }

    /// Dual value (minus the constant `c'x_k`) and its gradient, which is the
    /// vector of model constraint values at the Lagrangian minimizer.
    fn eval(&self, lambda: &[f64]) -> DualPoint {
        let m = self.m();
        let s = self.mu + 2.0 * dot(lambda, self.smoothness);
        // u_i = v'g_i with v = c + sum_j lambda_j g_j
        let u: Vec<f64> = (0..m)
            .map(|i| self.cg[i] + dot(&self.gram[i * m..(i + 1) * m], lambda))
            .collect();
        let vv = self.cc + dot(lambda, &self.cg) + dot(lambda, &u);
        let value = dot(lambda, self.fvals) - vv / (4.0 * s);
        let grad = (0..m)
            .map(|i| self.fvals[i] - u[i] / (2.0 * s) + self.smoothness[i] * vv / (2.0 * s * s))
            .collect();
        DualPoint { value, grad }
    }
}

fn project(lambda: &mut [f64]) {
    for l in lambda {
        if *l < 0.0 {
            *l = 0.0;
        }
    }
}

/// Model feasibility violation, complementarity and gap at `lambda`.
fn optimality(lambda: &[f64], q: &[f64]) -> (f64, f64, f64) {
    let viol = q.iter().fold(0.0f64, |a, &v| a.max(v));
    let compl = lambda.iter().zip(q).fold(0.0f64, |a, (l, v)| a.max((l * v).abs()));
    let gap = -dot(lambda, q);
    (viol, compl, gap)
}

/// `x(lambda) = x_k - (c + sum lambda_i g_i) / (2 (mu + 2 sum lambda_i M_i))`
fn primal_point(inst: &Sp1Instance<'_>, gradients: &[Vec<f64>], smoothness: &[f64], lambda: &[f64]) -> Vec<f64> {
    let s = inst.mu + 2.0 * dot(lambda, smoothness);
    let mut v = inst.c.to_vec();
    for (l, g) in lambda.iter().zip(gradients) {
        if *l != 0.0 {
            axpy(*l, g, &mut v);
        }
    }
    inst.set.anchor.iter().zip(&v).map(|(a, vi)| a - vi / (2.0 * s)).collect()
}

/// Solve the proximal subproblem over the local ball intersection.
///
/// Runs projected gradient ascent with an Armijo backtracking line search on
/// the concave dual, starting from `lambda = 0`, and maps the dual optimum
/// back through the closed-form Lagrangian minimizer. The returned point is
/// always inside every ball (retracted toward the anchor if rounding left it
/// a hair outside).
pub fn solve_sp1(inst: &Sp1Instance<'_>, opts: &Sp1Options) -> Result<SubproblemSolution> {
    let model = inst.set.model.as_ref().ok_or(Error::InvalidParameter {
        name: "set",
        reason: "the subproblem needs the quadratic model behind the balls".into(),
    })?;
    crate::error::check_dim(inst.set.dim(), inst.c.len())?;
    if !(inst.mu > 0.0) {
        return Err(Error::InvalidParameter { name: "mu", reason: format!("must be positive, got {}", inst.mu) });
    }
    let gradients = &model.gradients;
    let smoothness = &model.smoothness;
    let dual = Dual::new(inst, gradients, smoothness);
    let m = dual.m();
    let tol = opts.tol;

    let mut lambda = vec![0.0; m];
    let mut point = dual.eval(&lambda);
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iterations {
        let (viol, compl, gap) = optimality(&lambda, &point.grad);
        if viol <= tol && compl <= tol && gap.abs() <= tol {
            converged = true;
            break;
        }
        iterations += 1;

        // Barzilai-Borwein trial step, then halve until Armijo holds.
        let mut step = match &prev {
            Some((dl, dg)) => {
                let sy = -dot(dl, dg);
                let ss = norm_sq(dl);
                if sy > 0.0 && ss > 0.0 {
                    ss / sy
                } else {
                    1.0
                }
            }
            None => 1.0,
        };
        let mut accepted = None;
        for _ in 0..200 {
            let mut trial: Vec<f64> = lambda.iter().zip(&point.grad).map(|(l, g)| l + step * g).collect();
            project(&mut trial);
            let moved: Vec<f64> = trial.iter().zip(&lambda).map(|(a, b)| a - b).collect();
            let ascent = dot(&point.grad, &moved);
            if ascent <= 0.0 {
                break;
            }
            let cand = dual.eval(&trial);
            if cand.value >= point.value + ARMIJO * ascent {
                accepted = Some((trial, cand));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, cand)) = accepted else {
            // no ascent possible at machine precision
            converged = true;
            break;
        };
        let dl: Vec<f64> = trial.iter().zip(&lambda).map(|(a, b)| a - b).collect();
        let dg: Vec<f64> = cand.grad.iter().zip(&point.grad).map(|(a, b)| a - b).collect();
        prev = Some((dl, dg));
        lambda = trial;
        point = cand;
    }

    let (viol, compl, gap) = optimality(&lambda, &point.grad);
    if !converged && !(viol <= tol && compl <= tol && gap.abs() <= tol) {
        return Err(Error::NonConvergence { iterations, residual: viol.max(compl).max(gap.abs()) });
    }

    let raw = primal_point(inst, gradients, smoothness, &lambda);
    let x = inst.set.retract(&raw);
    let step: Vec<f64> = x.iter().zip(&inst.set.anchor).map(|(a, b)| a - b).collect();
    let objective = dot(inst.c, &step) + inst.mu * norm_sq(&step);
    let q = inst.set.model_values(&x).expect("model present");

    let mut r: Vec<f64> = inst.c.to_vec();
    axpy(2.0 * inst.mu, &step, &mut r);
    for ((l, g), mi) in lambda.iter().zip(gradients).zip(smoothness) {
        axpy(*l, g, &mut r);
        axpy(4.0 * l * mi, &step, &mut r);
    }
    let dual_value = dual.eval(&lambda).value;
    Ok(SubproblemSolution {
        objective,
        duality_gap: (objective - dual_value).max(0.0),
        stationarity_residual: norm(&r),
        complementarity: lambda.iter().zip(&q).fold(0.0f64, |a, (l, v)| a.max((l * v).abs())),
        x,
        lambda,
        iterations,
    })
}
