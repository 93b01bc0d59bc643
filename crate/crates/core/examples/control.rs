//! Open-loop control with unknown dynamics: improve a safe input sequence
//! using only rollouts.
//!
//! Runs the variant with input bound 1.6 by default. Pass `control` as the
//! first argument for the 1.5 bound, which has no strictly feasible start
//! and is rejected up front.

use szoqq::problems::{by_name, control_data, ControlProblem};
use szoqq::{run, AlgorithmConfig, Xi};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "control-relaxed".into());
    let problem = by_name(&name)?;
    let prep = problem.prepare(problem.default_smoothness()?)?;
    // The automatic threshold here is about 1.7e-6, small enough that finite
    // differences hit rounding before the stop test fires.
    let config =
        AlgorithmConfig { eta: 0.1, mu: 1e-4, lambda_bound: 1.0, xi: Xi::Fixed(2e-5), ..AlgorithmConfig::default() };

    let started = std::time::Instant::now();
    let out = match run(&prep.oracle, prep.smoothness.clone(), &config, &prep.x0) {
        Ok(out) => out,
        Err(e) => {
            println!("{name}: {e}");
            return Ok(());
        }
    };
    let u = &out.report.x_tilde[..ControlProblem::DIM];
    let plant = if name == "control" { ControlProblem::default() } else { ControlProblem::relaxed() };
    let r = plant.rollout(u);
    let worst = r.constraints.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!("reason          {:?} after {} iterations", out.report.reason, out.report.k_tilde);
    println!("xi              {:.3e}", out.report.xi);
    println!("samples         {}", prep.oracle.sample_count());
    println!("initial cost    {:.4}", plant.rollout(&plant.initial_inputs()).cost);
    println!("final cost      {:.4} (model-based optimum {:.4})", r.cost, control_data::OPTIMAL_COST);
    println!("max constraint  {worst:.3e}");
    println!("elapsed         {:.2?}", started.elapsed());
    Ok(())
}
