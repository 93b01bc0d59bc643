//! Local feasible sets as intersections of Euclidean balls.
//!
//! Around a strictly feasible anchor `x_k`, constraint `i` is replaced by the
//! quadratic upper model
//!
//! ```text
//! q_i(x) = f_i(x_k) + g_i'(x - x_k) + 2 M_i ||x - x_k||^2 <= 0
//! ```
//!
//! whose zero sublevel set is a ball. With `g_i` a forward-difference
//! gradient taken with a step no larger than `l*/sqrt(d)`, every point of the
//! intersection is strictly feasible for the true constraints.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist, dot, norm, norm_sq};

/// Radii that would come out negative (only through rounding) are clamped
/// to this multiple of the anchor's scale.
pub const MIN_RADIUS_FACTOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::InvalidParameter { name: "radius", reason: format!("must be nonnegative, got {radius}") });
        }
        Ok(Ball { center, radius })
    }

    /// The sublevel set `{x : f + g'(x - a) + curvature ||x - a||^2 <= 0}`:
    /// center `a - g / (2 curvature)`, squared radius
    /// `-f / curvature + ||g||^2 / (4 curvature^2)`.
    ///
    /// Returns the ball and whether its radius had to be clamped.
    pub fn from_quadratic(anchor: &[f64], f: f64, g: &[f64], curvature: f64) -> (Ball, bool) {
        let center: Vec<f64> = anchor.iter().zip(g).map(|(a, gi)| a - gi / (2.0 * curvature)).collect();
        let r2 = -f / curvature + norm_sq(g) / (4.0 * curvature * curvature);
        let floor = MIN_RADIUS_FACTOR * norm(anchor).max(1.0);
        if r2.is_finite() && r2.sqrt() >= floor {
            (Ball { center, radius: r2.sqrt() }, false)
        } else {
            (Ball { center, radius: floor }, true)
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        dist(x, &self.center) <= self.radius
    }

    /// `||x - center|| - radius`; negative inside.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        dist(x, &self.center) - self.radius
    }
}

/// Whether `inner` lies entirely inside `outer`.
pub fn ball_containment(inner: &Ball, outer: &Ball) -> bool {
    dist(&inner.center, &outer.center) + inner.radius <= outer.radius
}

/// Function values and estimated gradients the balls were built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticModel {
    pub gradients: Vec<Vec<f64>>,
    pub smoothness: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalFeasibleSet {
    pub anchor: Vec<f64>,
    pub fvals: Vec<f64>,
    pub balls: Vec<Ball>,
    /// Present for sets built from gradient estimates; absent for the
    /// Lipschitz-only comparison set.
    pub model: Option<QuadraticModel>,
    /// Indices whose radius was clamped to the numerical floor.
    pub clamped: Vec<usize>,
}

fn require_strict(fvals: &[f64]) -> Result<()> {
    match fvals.iter().enumerate().find(|(_, f)| !(**f < 0.0)) {
        Some((index, &value)) => Err(Error::StrictFeasibilityLost { index, value }),
        None => Ok(()),
    }
}

/// Quadratic-model safe set around `anchor`.
pub fn build_safe_set(
    anchor: &[f64],
    fvals: &[f64],
    gradients: &[Vec<f64>],
    smoothness: &[f64],
) -> Result<LocalFeasibleSet> {
    check_dim(fvals.len(), gradients.len())?;
    check_dim(fvals.len(), smoothness.len())?;
    for g in gradients {
        check_dim(anchor.len(), g.len())?;
    }
    require_strict(fvals)?;
    let mut clamped = Vec::new();
    let balls = fvals
        .iter()
        .zip(gradients)
        .zip(smoothness)
        .enumerate()
        .map(|(i, ((&f, g), &m))| {
            let (ball, was_clamped) = Ball::from_quadratic(anchor, f, g, 2.0 * m);
            if was_clamped {
                clamped.push(i);
            }
            ball
        })
        .collect();
    Ok(LocalFeasibleSet {
        anchor: anchor.to_vec(),
        fvals: fvals.to_vec(),
        balls,
        model: Some(QuadraticModel { gradients: gradients.to_vec(), smoothness: smoothness.to_vec() }),
        clamped,
    })
}

/// Lipschitz-only safe set: balls of radius `-f_i / L_i` around `anchor`.
pub fn lipschitz_set(anchor: &[f64], fvals: &[f64], lipschitz: &[f64]) -> Result<LocalFeasibleSet> {
    check_dim(fvals.len(), lipschitz.len())?;
    require_strict(fvals)?;
    let balls = fvals
        .iter()
        .zip(lipschitz)
        .map(|(&f, &l)| Ball { center: anchor.to_vec(), radius: -f / l })
        .collect();
    Ok(LocalFeasibleSet { anchor: anchor.to_vec(), fvals: fvals.to_vec(), balls, model: None, clamped: Vec::new() })
}

impl LocalFeasibleSet {
    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        Ok(self.balls.iter().all(|b| b.contains(x)))
    }

    /// `q_i(x)` for every constraint; `None` for Lipschitz-only sets.
    pub fn model_values(&self, x: &[f64]) -> Option<Vec<f64>> {
        let model = self.model.as_ref()?;
        let step: Vec<f64> = x.iter().zip(&self.anchor).map(|(a, b)| a - b).collect();
        let s2 = norm_sq(&step);
        Some(
            self.fvals
                .iter()
                .zip(&model.gradients)
                .zip(&model.smoothness)
                .map(|((f, g), m)| f + dot(g, &step) + 2.0 * m * s2)
                .collect(),
        )
    }

    /// Index of the ball with the smallest radius.
    pub fn smallest_ball(&self) -> usize {
        self.balls
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.radius.total_cmp(&b.1.radius))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Pull `x` back along the segment from the anchor until it lies in
    /// every ball. Points already inside are returned unchanged.
    pub fn retract(&self, x: &[f64]) -> Vec<f64> {
        if self.balls.iter().all(|b| b.contains(x)) {
            return x.to_vec();
        }
        let dir: Vec<f64> = x.iter().zip(&self.anchor).map(|(a, b)| a - b).collect();
        let dd = norm_sq(&dir);
        let mut t: f64 = 1.0;
        for ball in &self.balls {
            // ||anchor - c + t dir||^2 <= r^2
            let off: Vec<f64> = self.anchor.iter().zip(&ball.center).map(|(a, c)| a - c).collect();
            let b = dot(&off, &dir);
            let c = norm_sq(&off) - ball.radius * ball.radius;
            if c >= 0.0 {
                // anchor itself on or outside this ball
                t = 0.0;
                break;
            }
            let root = (-b + (b * b - dd * c).sqrt()) / dd;
            t = t.min(root);
        }
        let mut t = t.max(0.0);
        loop {
            let y: Vec<f64> = self.anchor.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            if t == 0.0 || self.balls.iter().all(|b| b.contains(&y)) {
                return y;
            }
            t *= 1.0 - 1e-12;
            if t < 1e-300 {
                t = 0.0;
            }
        }
    }
}
