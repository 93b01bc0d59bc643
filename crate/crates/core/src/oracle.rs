//! The black-box query contract, the sample log and the epigraph lift.
//!
//! A [`BlackBox`] answers point queries with the values of the objective and
//! every constraint. The solver only ever sees a [`ProblemOracle`], which
//! wraps the black box and records every point it is asked about. Exact
//! derivatives live behind [`Verification`], which the solver never takes,
//! so test harnesses can grade a run against ground truth without the
//! optimizer being able to peek.

use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, OracleError, Result};
use crate::linalg::dot;
use crate::params::SmoothnessParams;

/// A noiseless, deterministic function evaluator.
///
/// `evaluate(x)` returns `[f_0(x), f_1(x), ..., f_m(x)]`: the objective in
/// slot 0 followed by the `m` constraint functions (feasible iff `f_i <= 0`).
/// Repeated queries at the same point must return identical values.
pub trait BlackBox: Send + Sync {
    fn dim(&self) -> usize;
    fn num_constraints(&self) -> usize;
    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, OracleError>;

    /// Set when `f_0` is known in closed form and affine.
    fn known_objective(&self) -> Option<LinearObjective> {
        None
    }

    /// Whether several points may be evaluated at the same time.
    fn concurrent(&self) -> bool {
        true
    }

    /// Whether the time spent inside `evaluate` is the cost of running an
    /// experiment (and therefore excluded from solver wall time).
    fn self_timed(&self) -> bool {
        false
    }
}

/// Ground truth for grading runs. Never handed to the solver.
pub trait Verification {
    /// `[f_0(x), ..., f_m(x)]`.
    fn true_values(&self, x: &[f64]) -> Vec<f64>;
    /// Gradients of `f_0, ..., f_m`, one row per function.
    fn true_gradients(&self, x: &[f64]) -> Vec<Vec<f64>>;
}

/// A benchmark exposes both faces.
pub trait Benchmark: BlackBox + Verification {}
impl<T: BlackBox + Verification + ?Sized> Benchmark for T {}

/// `f_0(x) = c'x + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearObjective {
    pub c: Vec<f64>,
    pub offset: f64,
}

impl LinearObjective {
    pub fn value(&self, x: &[f64]) -> f64 {
        dot(&self.c, x) + self.offset
    }
}

/// One point query: where, what came back, and during which iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub point: Vec<f64>,
    /// `[f_0, f_1, ..., f_m]` as returned to the solver.
    pub values: Vec<f64>,
    pub tag: usize,
}

impl Sample {
    /// Largest constraint value (the objective slot is skipped).
    pub fn max_constraint(&self) -> f64 {
        self.values[1..].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Default)]
pub struct SampleLog {
    entries: Mutex<Vec<Sample>>,
}

impl SampleLog {
    fn push(&self, sample: Sample) {
        self.entries.lock().expect("sample log poisoned").push(sample);
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("sample log poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn snapshot(&self) -> Vec<Sample> {
        self.entries.lock().expect("sample log poisoned").clone()
    }
}

/// The solver's view of a problem.
pub struct ProblemOracle {
    inner: Arc<dyn BlackBox>,
    known_objective: Option<LinearObjective>,
    log: SampleLog,
    oracle_time: Mutex<Duration>,
}

impl std::fmt::Debug for ProblemOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemOracle")
            .field("dim", &self.dim())
            .field("num_constraints", &self.num_constraints())
            .field("known_objective", &self.known_objective)
            .field("samples", &self.log.len())
            .finish()
    }
}

impl ProblemOracle {
    pub fn new(inner: Arc<dyn BlackBox>) -> Self {
        let known_objective = inner.known_objective();
        if let Some(obj) = &known_objective {
            assert_eq!(obj.c.len(), inner.dim(), "known objective has the wrong dimension");
        }
        ProblemOracle {
            inner,
            known_objective,
            log: SampleLog::default(),
            oracle_time: Mutex::new(Duration::ZERO),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn num_constraints(&self) -> usize {
        self.inner.num_constraints()
    }

    pub fn known_objective(&self) -> Option<&LinearObjective> {
        self.known_objective.as_ref()
    }

    pub fn concurrent(&self) -> bool {
        self.inner.concurrent()
    }

    pub fn black_box(&self) -> &Arc<dyn BlackBox> {
        &self.inner
    }

    /// Query every function at `x`; the point is logged before returning.
    pub fn query_point(&self, x: &[f64], tag: usize) -> Result<Vec<f64>, OracleError> {
        if x.len() != self.dim() {
            return Err(OracleError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let start = Instant::now();
        let result = self.inner.evaluate(x);
        *self.oracle_time.lock().expect("timer poisoned") += start.elapsed();
        let mut values = result?;
        if values.len() != self.num_constraints() + 1 {
            return Err(OracleError::Failed(format!(
                "expected {} values, got {}",
                self.num_constraints() + 1,
                values.len()
            )));
        }
        if let Some(obj) = &self.known_objective {
            values[0] = obj.value(x);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(OracleError::NonFinite { index });
        }
        self.log.push(Sample { point: x.to_vec(), values: values.clone(), tag });
        Ok(values)
    }

    /// `f_i(x)` for `i` in `0..=m`.
    pub fn query(&self, x: &[f64], i: usize, tag: usize) -> Result<f64, OracleError> {
        let values = self.query_point(x, tag)?;
        values
            .get(i)
            .copied()
            .ok_or_else(|| OracleError::Failed(format!("no function with index {i}")))
    }

    pub fn sample_log(&self) -> &SampleLog {
        &self.log
    }

    pub fn samples(&self) -> Vec<Sample> {
        self.log.snapshot()
    }

    pub fn sample_count(&self) -> usize {
        self.log.len()
    }

    /// Time spent inside the black box that should not count as solver time.
    pub fn excluded_time(&self) -> Duration {
        if self.inner.self_timed() {
            *self.oracle_time.lock().expect("timer poisoned")
        } else {
            Duration::ZERO
        }
    }
}

/// Rewrites `min f_0(x) s.t. f_i(x) <= 0` as
/// `min gamma s.t. f_0(x) - gamma <= 0, f_i(x) <= 0` over `(x, gamma)`.
pub struct Epigraph<P: ?Sized> {
    inner: Arc<P>,
}

impl<P: ?Sized> Epigraph<P> {
    pub fn new(inner: Arc<P>) -> Self {
        Epigraph { inner }
    }

    pub fn inner(&self) -> &Arc<P> {
        &self.inner
    }
}

impl<P: BlackBox + ?Sized> BlackBox for Epigraph<P> {
    fn dim(&self) -> usize {
        self.inner.dim() + 1
    }

    fn num_constraints(&self) -> usize {
        self.inner.num_constraints() + 1
    }

    fn evaluate(&self, z: &[f64]) -> Result<Vec<f64>, OracleError> {
        let d = self.inner.dim();
        if z.len() != d + 1 {
            return Err(OracleError::DimensionMismatch { expected: d + 1, got: z.len() });
        }
        let gamma = z[d];
        let values = self.inner.evaluate(&z[..d])?;
        let mut out = Vec::with_capacity(values.len() + 1);
        out.push(gamma);
        out.push(values[0] - gamma);
        out.extend_from_slice(&values[1..]);
        Ok(out)
    }

    fn known_objective(&self) -> Option<LinearObjective> {
        let mut c = vec![0.0; self.dim()];
        c[self.inner.dim()] = 1.0;
        Some(LinearObjective { c, offset: 0.0 })
    }

    fn concurrent(&self) -> bool {
        self.inner.concurrent()
    }

    fn self_timed(&self) -> bool {
        self.inner.self_timed()
    }
}

impl<P: Verification + BlackBox + ?Sized> Verification for Epigraph<P> {
    fn true_values(&self, z: &[f64]) -> Vec<f64> {
        let d = self.inner.dim();
        let gamma = z[d];
        let values = self.inner.true_values(&z[..d]);
        let mut out = vec![gamma, values[0] - gamma];
        out.extend_from_slice(&values[1..]);
        out
    }

    fn true_gradients(&self, z: &[f64]) -> Vec<Vec<f64>> {
        let d = self.inner.dim();
        let grads = self.inner.true_gradients(&z[..d]);
        let lift = |g: &[f64], last: f64| {
            let mut v = g.to_vec();
            v.push(last);
            v
        };
        let mut objective = vec![0.0; d + 1];
        objective[d] = 1.0;
        let mut out = vec![objective, lift(&grads[0], -1.0)];
        out.extend(grads[1..].iter().map(|g| lift(g, 0.0)));
        out
    }
}

/// Epigraph reformulation of an oracle whose objective is not known.
///
/// The new first constraint `f_0(x) - gamma` gets Lipschitz constant
/// `l0 + 1` and smoothness constant `m0`; the original constraints keep
/// theirs. Oracles that already carry a known linear objective are
/// returned unchanged.
pub fn epigraph_reformulate(
    oracle: ProblemOracle,
    smoothness: SmoothnessParams,
    l0: f64,
    m0: f64,
) -> Result<(ProblemOracle, SmoothnessParams)> {
    if oracle.dim() == 0 {
        return Err(Error::InvalidParameter { name: "dimension", reason: "must be positive".into() });
    }
    if oracle.known_objective().is_some() {
        return Ok((oracle, smoothness));
    }
    let lifted = Epigraph::new(Arc::clone(oracle.black_box()));
    let smoothness = smoothness.prepend(l0 + 1.0, m0)?;
    Ok((ProblemOracle::new(Arc::new(lifted)), smoothness))
}

/// Initial point `(x0, f_0(x0) + slack)` for an epigraph-reformulated run.
///
/// Queries the original oracle once at `x0`.
pub fn lift_initial_point(original: &ProblemOracle, x0: &[f64], slack: f64) -> Result<Vec<f64>> {
    if !(slack > 0.0) {
        return Err(Error::InvalidParameter { name: "slack", reason: "must be positive".into() });
    }
    let f0 = original.query(x0, 0, 0)?;
    let mut z = x0.to_vec();
    z.push(f0 + slack);
    Ok(z)
}
