use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, norm_inf, norm_sq};
use crate::params::Sp2Options;

/// Data of the multiplier-recovery problem at iteration `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sp2Instance {
    /// Gradient of the objective at `x_{k+1}`.
    pub grad_f0_next: Vec<f64>,
    /// `x_{k+1} - x_k`
    pub step: Vec<f64>,
    /// Estimated constraint gradients at `x_k`.
    pub gradients: Vec<Vec<f64>>,
    /// Constraint values at `x_k`.
    pub fvals: Vec<f64>,
    pub smoothness: Vec<f64>,
    pub mu: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sp2Solution {
    pub lambda: Vec<f64>,
    /// Whether `lambda` satisfies the certificate constraints.
    pub feasible: bool,
    pub delta1: f64,
    pub delta2: Vec<f64>,
    pub bisection_steps: usize,
}

impl Sp2Solution {
    pub fn lambda_inf(&self) -> f64 {
        norm_inf(&self.lambda)
    }

    pub fn delta2_max(&self) -> f64 {
        self.delta2.iter().copied().fold(0.0, f64::max)
    }
}

/// Linear structure: `delta1(lambda) = ||A lambda + b||`,
/// `delta2_i(lambda) = |lambda_i s_i|`.
struct Certificate {
    /// Column `i` is `g_i + 4 M_i step`.
    columns: Vec<Vec<f64>>,
    /// `grad f_0(x_{k+1}) + 2 mu step`
    b: Vec<f64>,
    /// `f_i + g_i' step + 2 M_i ||step||^2`
    s: Vec<f64>,
}

impl Certificate {
    fn new(inst: &Sp2Instance) -> Self {
        let ss = norm_sq(&inst.step);
        let columns = inst
            .gradients
            .iter()
            .zip(&inst.smoothness)
            .map(|(g, m)| {
                let mut col = g.clone();
                axpy(4.0 * m, &inst.step, &mut col);
                col
            })
            .collect();
        let mut b = inst.grad_f0_next.clone();
        axpy(2.0 * inst.mu, &inst.step, &mut b);
        let s = inst
            .fvals
            .iter()
            .zip(&inst.gradients)
            .zip(&inst.smoothness)
            .map(|((f, g), m)| f + dot(g, &inst.step) + 2.0 * m * ss)
            .collect();
        Certificate { columns, b, s }
    }

    fn residual(&self, lambda: &[f64]) -> Vec<f64> {
        let mut r = self.b.clone();
        for (l, col) in lambda.iter().zip(&self.columns) {
            axpy(*l, col, &mut r);
        }
        r
    }
}

/// `(delta1, [delta2_i])` of the approximate-KKT certificate for the
/// proximal subproblem at `(x_{k+1}, lambda)`.
pub fn certificate_residuals(inst: &Sp2Instance, lambda: &[f64]) -> (f64, Vec<f64>) {
    let cert = Certificate::new(inst);
    let delta1 = norm(&cert.residual(lambda));
    let delta2 = lambda.iter().zip(&cert.s).map(|(l, s)| (l * s).abs()).collect();
    (delta1, delta2)
}

enum Probe {
    Feasible(Vec<f64>),
    Infeasible,
}

/// Box-constrained least squares `min ||A lambda + b||^2, 0 <= lambda <= upper`,
/// stopped as soon as the optimum is known to be on one side of `bound^2`.
///
/// Feasibility is witnessed by an iterate; infeasibility by the linearization
/// lower bound `phi(l) + min_{y in box} grad'(y - l)`, which is valid for the
/// convex objective over the bounded box.
fn probe_level(
    gram: &[f64],
    atb: &[f64],
    bb: f64,
    upper: &[f64],
    start: &[f64],
    bound: f64,
    lipschitz: f64,
    max_iter: usize,
    accept: impl Fn(&[f64]) -> bool,
) -> Probe {
    let m = upper.len();
    let target = bound * bound;
    // a hair inside, so rounding in the direct evaluation cannot flip it
    let inner = target * (1.0 - 1e-10);
    let mut lambda: Vec<f64> = start.iter().zip(upper).map(|(l, u)| l.clamp(0.0, *u)).collect();
    let eval = |l: &[f64]| -> (f64, Vec<f64>) {
        // phi = l'Gl + 2 h'l + b'b, grad = 2 (G l + h)
        let gl: Vec<f64> = (0..m).map(|i| dot(&gram[i * m..(i + 1) * m], l)).collect();
        let phi = dot(l, &gl) + 2.0 * dot(atb, l) + bb;
        let grad = gl.iter().zip(atb).map(|(a, h)| 2.0 * (a + h)).collect();
        (phi, grad)
    };
    // FISTA with gradient-based restart
    let mut y = lambda.clone();
    let mut t = 1.0f64;
    for _ in 0..max_iter {
        let (phi, grad) = eval(&lambda);
        if phi <= inner && accept(&lambda) {
            return Probe::Feasible(lambda);
        }
        let lower = phi
            + grad
                .iter()
                .zip(&lambda)
                .zip(upper)
                .map(|((g, l), u)| (g * (0.0 - l)).min(g * (u - l)))
                .sum::<f64>();
        if lower > target {
            return Probe::Infeasible;
        }
        let (_, gy) = eval(&y);
        let next: Vec<f64> = y
            .iter()
            .zip(&gy)
            .zip(upper)
            .map(|((yi, gi), u)| (yi - gi / lipschitz).clamp(0.0, *u))
            .collect();
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let restart = dot(
            &gy,
            &next.iter().zip(&lambda).map(|(a, b)| a - b).collect::<Vec<_>>(),
        ) > 0.0;
        if restart {
            t = 1.0;
            y = next.clone();
        } else {
            y = next
                .iter()
                .zip(&lambda)
                .map(|(n, l)| n + (t - 1.0) / t_next * (n - l))
                .collect();
            t = t_next;
        }
        lambda = next;
    }
    // undecided: treat as infeasible, which only loosens minimality
    Probe::Infeasible
}

/// Minimum infinity-norm multipliers satisfying the approximate-KKT
/// certificate `max(delta1, delta2_i) <= eta / 2`.
///
/// Bisection on the level `t` in `[0, ||warm||_inf]`; each level is a
/// box-constrained least-squares feasibility problem with bounds
/// `min(t, eta / (2 |s_i|))`.
pub fn solve_sp2(inst: &Sp2Instance, opts: &Sp2Options, warm: &[f64]) -> Result<Sp2Solution> {
    let m = inst.gradients.len();
    crate::error::check_dim(m, warm.len())?;
    crate::error::check_dim(m, inst.fvals.len())?;
    crate::error::check_dim(m, inst.smoothness.len())?;
    if !(inst.eta > 0.0) {
        return Err(Error::InvalidParameter { name: "eta", reason: format!("must be positive, got {}", inst.eta) });
    }
    let half = inst.eta / 2.0;
    let cert = Certificate::new(inst);
    let finish = |lambda: Vec<f64>, steps: usize| {
        let (delta1, delta2) = certificate_residuals(inst, &lambda);
        let feasible = delta1 <= half && delta2.iter().all(|d| *d <= half);
        Sp2Solution { lambda, feasible, delta1, delta2, bisection_steps: steps }
    };

    let warm: Vec<f64> = warm.iter().map(|l| l.max(0.0)).collect();
    let (d1, d2) = certificate_residuals(inst, &warm);
    let worst = d2.iter().copied().fold(d1, f64::max);
    if worst > half {
        return Err(Error::Sp2WarmStartInvalid { residual: worst, bound: half });
    }
    if norm(&cert.b) <= half {
        return Ok(finish(vec![0.0; m], 0));
    }

    let caps: Vec<f64> =
        cert.s.iter().map(|s| if *s == 0.0 { f64::INFINITY } else { half * (1.0 - 1e-12) / s.abs() }).collect();
    let accept = |l: &[f64]| {
        let (d1, d2) = certificate_residuals(inst, l);
        d1 <= half && d2.iter().all(|d| *d <= half)
    };
    let mut gram = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let v = dot(&cert.columns[i], &cert.columns[j]);
            gram[i * m + j] = v;
            gram[j * m + i] = v;
        }
    }
    let atb: Vec<f64> = cert.columns.iter().map(|c| dot(c, &cert.b)).collect();
    let bb = norm_sq(&cert.b);
    // 2 ||G||_F bounds the gradient's Lipschitz constant
    let lipschitz = (2.0 * gram.iter().map(|v| v * v).sum::<f64>().sqrt()).max(f64::MIN_POSITIVE);

    let mut lo = 0.0;
    let mut hi = norm_inf(&warm);
    let mut best = warm;
    let mut steps = 0;
    while hi - lo > opts.tol * hi.max(1.0) {
        steps += 1;
        let t = 0.5 * (lo + hi);
        let upper: Vec<f64> = caps.iter().map(|c| c.min(t)).collect();
        match probe_level(&gram, &atb, bb, &upper, &best, half, lipschitz, opts.max_inner_iterations, accept) {
            Probe::Feasible(lambda) => {
                hi = norm_inf(&lambda).min(t);
                best = lambda;
            }
            Probe::Infeasible => lo = t,
        }
    }
    Ok(finish(best, steps))
}
