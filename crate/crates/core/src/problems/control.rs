use crate::error::OracleError;
use crate::oracle::{BlackBox, Verification};

use super::control_data;

pub const HORIZON: usize = 6;
const A: [[f64; 2]; 2] = [[1.1, 1.0], [-0.5, 1.1]];
const X_INIT: [f64; 2] = [1.0, 1.0];
const STATE_WEIGHT: f64 = 0.5;
const INPUT_WEIGHT: f64 = 2.0;

/// Open-loop control of `x+ = A x + u + 0.1 x2^2 e1` over six steps, with
/// the inputs as decision variables and the dynamics hidden.
///
/// Box bounds `|x_k[j]| <= state_bound` and `|u_k[j]| <= input_bound` are
/// split into smooth one-sided rows: the 24 state rows come first
/// (`+x_1[0], -x_1[0], +x_1[1], -x_1[1], +x_2[0], ...`), then the 24 input
/// rows in the same order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlProblem {
    pub state_bound: f64,
    pub input_bound: f64,
}

/// States, cost and constraint values of one rollout.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    /// `x_1, ..., x_6`.
    pub states: Vec<[f64; 2]>,
    pub cost: f64,
    pub constraints: Vec<f64>,
}

impl Default for ControlProblem {
    fn default() -> Self {
        ControlProblem { state_bound: 0.7, input_bound: 1.5 }
    }
}

fn step(x: [f64; 2], u: &[f64]) -> [f64; 2] {
    [
        A[0][0] * x[0] + A[0][1] * x[1] + u[0] + 0.1 * x[1] * x[1],
        A[1][0] * x[0] + A[1][1] * x[1] + u[1],
    ]
}

impl ControlProblem {
    pub const DIM: usize = 2 * HORIZON;
    pub const CONSTRAINTS: usize = 8 * HORIZON;
    /// Constants used for every row in the reference runs.
    pub const LIPSCHITZ: f64 = 20.0;
    pub const SMOOTHNESS: f64 = 20.0;

    /// Input bound 1.6 instead of 1.5. The first state row forces
    /// `u_0[0] <= -1.5`, so the tighter bound leaves no strictly feasible
    /// input sequence; this variant has one and the same optimum.
    pub fn relaxed() -> Self {
        ControlProblem { state_bound: 0.7, input_bound: 1.6 }
    }

    /// Frozen starting sequence for this bound (cost about 6.81).
    pub fn initial_inputs(&self) -> Vec<f64> {
        if self.input_bound > 1.5 {
            control_data::RELAXED_INIT.to_vec()
        } else {
            control_data::LITERAL_INIT.to_vec()
        }
    }

    pub fn rollout(&self, u: &[f64]) -> Rollout {
        let mut x = X_INIT;
        let mut states = Vec::with_capacity(HORIZON);
        let mut cost = 0.0;
        for k in 0..HORIZON {
            let uk = &u[2 * k..2 * k + 2];
            x = step(x, uk);
            cost += STATE_WEIGHT * (x[0] * x[0] + x[1] * x[1]) + INPUT_WEIGHT * (uk[0] * uk[0] + uk[1] * uk[1]);
            states.push(x);
        }
        let mut constraints = Vec::with_capacity(Self::CONSTRAINTS);
        for s in &states {
            for v in s {
                constraints.push(v - self.state_bound);
                constraints.push(-v - self.state_bound);
            }
        }
        for v in u {
            constraints.push(v - self.input_bound);
            constraints.push(-v - self.input_bound);
        }
        Rollout { states, cost, constraints }
    }

    /// Sensitivities `d x_{k+1} / d u`, each a 2 x 12 matrix.
    fn sensitivities(&self, u: &[f64]) -> (Vec<[f64; 2]>, Vec<[Vec<f64>; 2]>) {
        let mut x = X_INIT;
        let mut s: [Vec<f64>; 2] = [vec![0.0; Self::DIM], vec![0.0; Self::DIM]];
        let mut states = Vec::with_capacity(HORIZON);
        let mut sens = Vec::with_capacity(HORIZON);
        for k in 0..HORIZON {
            // Jacobian of the step in x
            let j = [[A[0][0], A[0][1] + 0.2 * x[1]], [A[1][0], A[1][1]]];
            let mut next: [Vec<f64>; 2] = [vec![0.0; Self::DIM], vec![0.0; Self::DIM]];
            for r in 0..2 {
                for c in 0..Self::DIM {
                    next[r][c] = j[r][0] * s[0][c] + j[r][1] * s[1][c];
                }
                next[r][2 * k + r] += 1.0;
            }
            x = step(x, &u[2 * k..2 * k + 2]);
            s = next;
            states.push(x);
            sens.push(s.clone());
        }
        (states, sens)
    }
}

impl BlackBox for ControlProblem {
    fn dim(&self) -> usize {
        Self::DIM
    }

    fn num_constraints(&self) -> usize {
        Self::CONSTRAINTS
    }

    fn evaluate(&self, u: &[f64]) -> Result<Vec<f64>, OracleError> {
        if u.len() != Self::DIM {
            return Err(OracleError::DimensionMismatch { expected: Self::DIM, got: u.len() });
        }
        let r = self.rollout(u);
        let mut out = Vec::with_capacity(Self::CONSTRAINTS + 1);
        out.push(r.cost);
        out.extend(r.constraints);
        Ok(out)
    }
}

impl Verification for ControlProblem {
    fn true_values(&self, u: &[f64]) -> Vec<f64> {
        let r = self.rollout(u);
        let mut out = vec![r.cost];
        out.extend(r.constraints);
        out
    }

    fn true_gradients(&self, u: &[f64]) -> Vec<Vec<f64>> {
        let (states, sens) = self.sensitivities(u);
        let mut cost = vec![0.0; Self::DIM];
        for (x, s) in states.iter().zip(&sens) {
            for c in 0..Self::DIM {
                cost[c] += 2.0 * STATE_WEIGHT * (x[0] * s[0][c] + x[1] * s[1][c]);
            }
        }
        for (c, v) in u.iter().enumerate() {
            cost[c] += 2.0 * INPUT_WEIGHT * v;
        }
        let mut out = vec![cost];
        for s in &sens {
            for row in s {
                out.push(row.clone());
                out.push(row.iter().map(|v| -v).collect());
            }
        }
        for c in 0..Self::DIM {
            let mut e = vec![0.0; Self::DIM];
            e[c] = 1.0;
            out.push(e.clone());
            e[c] = -1.0;
            out.push(e);
        }
        out
    }
}
