use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::OracleError;
use crate::linalg::{dot, norm};
use crate::oracle::{BlackBox, LinearObjective, Verification};

/// Margin by which configured constants exceed the exact ones.
pub const CONSTANT_MARGIN: f64 = 1.1;

/// `f_i(x) = 0.5 (x - a_i)' P_i (x - a_i) - rho_i`, convex and strictly
/// negative at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticConstraint {
    /// Row-major `d x d`.
    pub hessian: Vec<f64>,
    pub center: Vec<f64>,
    pub rho: f64,
    pub eig_min: f64,
    pub eig_max: f64,
}

impl QuadraticConstraint {
    fn apply(&self, y: &[f64]) -> Vec<f64> {
        let d = y.len();
        (0..d).map(|r| dot(&self.hessian[r * d..(r + 1) * d], y)).collect()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let y: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        0.5 * dot(&y, &self.apply(&y)) - self.rho
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let y: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        self.apply(&y)
    }

    /// Largest gradient norm over the sublevel set `f_i <= 0`.
    pub fn exact_lipschitz(&self) -> f64 {
        (2.0 * self.rho * self.eig_max).sqrt()
    }

    pub fn exact_smoothness(&self) -> f64 {
        self.eig_max
    }
}

/// Seeded random instance: linear objective `c'x` over an intersection of
/// ellipsoids that all contain the origin in their interior.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSmoothInstance {
    pub seed: u64,
    pub objective: LinearObjective,
    pub constraints: Vec<QuadraticConstraint>,
}

impl RandomSmoothInstance {
    pub fn generate(seed: u64, d: usize, m: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = |rng: &mut ChaCha8Rng| loop {
            let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = norm(&v);
            if n > 1e-3 {
                break v.into_iter().map(|x| x / n).collect::<Vec<f64>>();
            }
        };
        let c = unit(&mut rng);
        let constraints = (0..m)
            .map(|_| {
                // Householder reflection H = I - 2 v v', P = H diag(e) H
                let v = unit(&mut rng);
                let eig: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..2.0)).collect();
                let mut hessian = vec![0.0; d * d];
                for r in 0..d {
                    for col in 0..d {
                        let mut s = 0.0;
                        for (k, e) in eig.iter().enumerate() {
                            let hr = f64::from(u8::from(r == k)) - 2.0 * v[r] * v[k];
                            let hc = f64::from(u8::from(col == k)) - 2.0 * v[col] * v[k];
                            s += hr * e * hc;
                        }
                        hessian[r * d + col] = s;
                    }
                }
                let dir = unit(&mut rng);
                let dist = rng.gen_range(0.2..1.0);
                let center: Vec<f64> = dir.iter().map(|x| x * dist).collect();
                let margin = rng.gen_range(0.05..0.5);
                let mut q = QuadraticConstraint {
                    hessian,
                    center,
                    rho: 0.0,
                    eig_min: eig.iter().copied().fold(f64::INFINITY, f64::min),
                    eig_max: eig.iter().copied().fold(0.0, f64::max),
                };
                q.rho = q.value(&vec![0.0; d]) + margin;
                q
            })
            .collect();
        RandomSmoothInstance { seed, objective: LinearObjective { c, offset: 0.0 }, constraints }
    }

    pub fn initial_point(&self) -> Vec<f64> {
        vec![0.0; self.objective.c.len()]
    }

    pub fn exact_lipschitz(&self) -> Vec<f64> {
        self.constraints.iter().map(|q| q.exact_lipschitz()).collect()
    }

    pub fn exact_smoothness(&self) -> Vec<f64> {
        self.constraints.iter().map(|q| q.exact_smoothness()).collect()
    }

    /// Valid lower bound on the objective over the feasible set: each
    /// ellipsoid lies in the ball of radius `sqrt(2 rho / eig_min)` around
    /// its center.
    pub fn objective_lower_bound(&self) -> f64 {
        let c = &self.objective.c;
        let cn = norm(c);
        self.constraints
            .iter()
            .map(|q| dot(c, &q.center) - cn * (2.0 * q.rho / q.eig_min).sqrt())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl BlackBox for RandomSmoothInstance {
    fn dim(&self) -> usize {
        self.objective.c.len()
    }

    fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        if x.len() != self.dim() {
            return Err(OracleError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(self.true_values(x))
    }

    fn known_objective(&self) -> Option<LinearObjective> {
        Some(self.objective.clone())
    }
}

impl Verification for RandomSmoothInstance {
    fn true_values(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![self.objective.value(x)];
        out.extend(self.constraints.iter().map(|q| q.value(x)));
        out
    }

    fn true_gradients(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut out = vec![self.objective.c.clone()];
        out.extend(self.constraints.iter().map(|q| q.gradient(x)));
        out
    }
}
