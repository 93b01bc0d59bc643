use crate::error::OracleError;
use crate::oracle::{BlackBox, Verification};

/// Two-dimensional test problem with a unique optimum at the origin:
///
/// ```text
/// min  0.1 x1^2 + x2
/// s.t. 0.5 - ||x + (0.5, -0.5)||^2 <= 0
///      x2 - 1 <= 0
///      x1^2 - x2 <= 0
/// ```
#[derive(Debug, Clone, Copy, Default)]
pub struct ToyProblem;

impl ToyProblem {
    pub const INITIAL_POINT: [f64; 2] = [0.9, 0.9];
    pub const OPTIMUM: [f64; 2] = [0.0, 0.0];
    /// Constants the toy runs use for every constraint.
    pub const LIPSCHITZ: f64 = 5.0;
    pub const SMOOTHNESS: f64 = 3.0;
    /// Exact gradient-Lipschitz constants of `f_1, f_2, f_3`.
    pub const EXACT_SMOOTHNESS: [f64; 3] = [2.0, 0.0, 2.0];

    fn values(x: &[f64]) -> Vec<f64> {
        let (a, b) = (x[0], x[1]);
        vec![
            0.1 * a * a + b,
            0.5 - ((a + 0.5).powi(2) + (b - 0.5).powi(2)),
            b - 1.0,
            a * a - b,
        ]
    }
}

impl BlackBox for ToyProblem {
    fn dim(&self) -> usize {
        2
    }

    fn num_constraints(&self) -> usize {
        3
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        if x.len() != 2 {
            return Err(OracleError::DimensionMismatch { expected: 2, got: x.len() });
        }
        Ok(Self::values(x))
    }
}

impl Verification for ToyProblem {
    fn true_values(&self, x: &[f64]) -> Vec<f64> {
        Self::values(x)
    }

    fn true_gradients(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let (a, b) = (x[0], x[1]);
        vec![
            vec![0.2 * a, 1.0],
            vec![-2.0 * (a + 0.5), -2.0 * (b - 0.5)],
            vec![0.0, 1.0],
            vec![2.0 * a, -1.0],
        ]
    }
}
