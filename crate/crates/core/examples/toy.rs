//! Solve the two-dimensional toy problem and grade the result against the
//! exact gradients.

use szoqq::problems::by_name;
use szoqq::{run, AlgorithmConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = by_name("toy")?;
    let prep = problem.prepare(problem.default_smoothness()?)?;
    let config = AlgorithmConfig { eta: 1e-2, mu: 1e-3, lambda_bound: 1.5, ..AlgorithmConfig::default() };

    let started = std::time::Instant::now();
    let mut out = run(&prep.oracle, prep.smoothness.clone(), &config, &prep.x0)?;
    let residual = out.report.grade(prep.truth.as_ref())?.clone();

    let x = &out.report.x_tilde;
    println!("reason          {:?}", out.report.reason);
    println!("iterations      {}", out.report.k_tilde);
    println!("samples         {}", prep.oracle.sample_count());
    println!("xi              {:.4e}", out.report.xi);
    println!("x               ({:.5}, {:.5})", x[0], x[1]);
    println!("f0              {:.3e}", out.report.x_tilde[2]);
    println!("|lambda|_inf    {:.4}", szoqq::linalg::norm_inf(&out.report.lambda_tilde));
    println!("KKT residual    {:.3e}", residual.max_residual);
    println!("elapsed         {:.2?}", started.elapsed());
    Ok(())
}
