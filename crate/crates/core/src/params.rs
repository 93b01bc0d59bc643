use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-constraint Lipschitz (`L_i`) and gradient-Lipschitz (`M_i`) constants.
///
/// Overestimates keep every sample feasible; underestimates may produce an
/// infeasible sample, after which all constants are multiplied by
/// `growth_factor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessParams {
    lipschitz: Vec<f64>,
    smoothness: Vec<f64>,
    growth_factor: f64,
    infeasible_sample_count: usize,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be positive and finite, got {v}") })
    }
}

impl SmoothnessParams {
    pub fn new(lipschitz: Vec<f64>, smoothness: Vec<f64>) -> Result<Self> {
        if lipschitz.len() != smoothness.len() || lipschitz.is_empty() {
            return Err(Error::InvalidParameter {
                name: "smoothness",
                reason: format!(
                    "need one Lipschitz and one smoothness constant per constraint ({} vs {})",
                    lipschitz.len(),
                    smoothness.len()
                ),
            });
        }
        for &l in &lipschitz {
            positive("lipschitz", l)?;
        }
        for &m in &smoothness {
            positive("smoothness", m)?;
        }
        Ok(SmoothnessParams { lipschitz, smoothness, growth_factor: 2.0, infeasible_sample_count: 0 })
    }

    pub fn uniform(m: usize, lipschitz: f64, smoothness: f64) -> Result<Self> {
        Self::new(vec![lipschitz; m], vec![smoothness; m])
    }

    pub fn with_growth_factor(mut self, growth_factor: f64) -> Result<Self> {
        if !(growth_factor > 1.0 && growth_factor.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "growth_factor",
                reason: format!("must exceed 1, got {growth_factor}"),
            });
        }
        self.growth_factor = growth_factor;
        Ok(self)
    }

    /// Constants for a new first constraint, followed by the existing ones.
    pub fn prepend(&self, lipschitz: f64, smoothness: f64) -> Result<Self> {
        positive("lipschitz", lipschitz)?;
        positive("smoothness", smoothness)?;
        let mut out = self.clone();
        out.lipschitz.insert(0, lipschitz);
        out.smoothness.insert(0, smoothness);
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.lipschitz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lipschitz.is_empty()
    }

    pub fn lipschitz(&self) -> &[f64] {
        &self.lipschitz
    }

    pub fn smoothness(&self) -> &[f64] {
        &self.smoothness
    }

    pub fn growth_factor(&self) -> f64 {
        self.growth_factor
    }

    pub fn infeasible_sample_count(&self) -> usize {
        self.infeasible_sample_count
    }

    pub fn l_max(&self) -> f64 {
        self.lipschitz.iter().copied().fold(0.0, f64::max)
    }

    pub fn m_max(&self) -> f64 {
        self.smoothness.iter().copied().fold(0.0, f64::max)
    }

    /// Largest finite-difference error coefficient, `sqrt(d) * M_max / 2`.
    pub fn alpha_max(&self, d: usize) -> f64 {
        (d as f64).sqrt() * self.m_max() / 2.0
    }

    /// Multiply every constant by the growth factor after an infeasible sample.
    pub(crate) fn grow(&mut self) {
        let beta = self.growth_factor;
        self.lipschitz.iter_mut().for_each(|l| *l *= beta);
        self.smoothness.iter_mut().for_each(|m| *m *= beta);
        self.infeasible_sample_count += 1;
    }
}

/// Step threshold for the first termination test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Xi {
    /// Derived from `eta` (and the active dual bound) so the output is an
    /// `eta`-KKT pair.
    Auto,
    Fixed(f64),
}

impl Serialize for Xi {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Xi::Auto => s.serialize_str("auto"),
            Xi::Fixed(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Xi {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(Xi::Fixed(v)),
            Raw::Text(t) if t == "auto" => Ok(Xi::Auto),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("xi must be \"auto\" or a number, got {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sp1Options {
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for Sp1Options {
    fn default() -> Self {
        Sp1Options { tol: 1e-9, max_iterations: 10_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sp2Options {
    /// Width of the final bisection bracket on the infinity-norm level.
    pub tol: f64,
    /// Projected-gradient iterations per feasibility probe.
    pub max_inner_iterations: usize,
}

impl Default for Sp2Options {
    fn default() -> Self {
        Sp2Options { tol: 1e-9, max_inner_iterations: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    /// Proximal weight of the per-iteration subproblem.
    pub mu: f64,
    /// Target KKT accuracy.
    pub eta: f64,
    /// Initial guess for the bound on the optimal multipliers.
    pub lambda_bound: f64,
    /// Growth factor applied to the dual bound when it proves too small.
    pub kappa: f64,
    pub xi: Xi,
    pub max_iterations: usize,
    /// Grow the dual bound instead of iterating with a bound that keeps failing.
    pub adapt_lambda: bool,
    /// Grow `L_i`, `M_i` after an infeasible sample instead of stopping.
    pub adapt_constants: bool,
    /// Evaluate the coordinate perturbations of one gradient estimate concurrently.
    pub parallel_gradients: bool,
    pub sp1: Sp1Options,
    pub sp2: Sp2Options,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        AlgorithmConfig {
            mu: 1e-3,
            eta: 1e-2,
            lambda_bound: 1.0,
            kappa: 2.0,
            xi: Xi::Auto,
            max_iterations: 100_000,
            adapt_lambda: true,
            adapt_constants: true,
            parallel_gradients: false,
            sp1: Sp1Options::default(),
            sp2: Sp2Options::default(),
        }
    }
}

impl AlgorithmConfig {
    pub fn validate(&self) -> Result<()> {
        positive("mu", self.mu)?;
        positive("eta", self.eta)?;
        positive("lambda_bound", self.lambda_bound)?;
        if !(self.kappa > 1.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParameter { name: "kappa", reason: format!("must exceed 1, got {}", self.kappa) });
        }
        if let Xi::Fixed(xi) = self.xi {
            positive("xi", xi)?;
        }
        positive("sp1.tol", self.sp1.tol)?;
        positive("sp2.tol", self.sp2.tol)?;
        Ok(())
    }
}
