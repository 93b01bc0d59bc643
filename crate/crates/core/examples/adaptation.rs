//! Start the toy problem with constants that are far too small. Infeasible
//! samples trigger constant growth until the constants are safe.

use szoqq::problems::by_name;
use szoqq::{run, AlgorithmConfig, Event, SmoothnessParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = by_name("toy")?;
    let (_, m) = problem.solver_shape();
    let smoothness = SmoothnessParams::uniform(m, 0.2, 0.2)?.with_growth_factor(2.0)?;
    let prep = problem.prepare(smoothness)?;
    let config = AlgorithmConfig { eta: 1e-2, mu: 1e-3, lambda_bound: 1.5, ..AlgorithmConfig::default() };
    let out = run(&prep.oracle, prep.smoothness.clone(), &config, &prep.x0)?;

    for rec in &out.trace {
        for e in &rec.events {
            if let Event::ConstantsGrown { .. } = e {
                println!("k = {:>4}: {e}", rec.k);
            }
        }
    }
    let infeasible = prep.oracle.samples().iter().filter(|s| s.max_constraint() > 0.0).count();
    let truth = prep.truth.true_values(&out.report.x_tilde);
    println!("infeasible samples  {infeasible}");
    println!("final constants     L = {:?}", out.state.smoothness.lipschitz());
    println!("                    M = {:?}", out.state.smoothness.smoothness());
    println!("reason              {:?} after {} iterations", out.report.reason, out.report.k_tilde);
    println!("f0                  {:.3e}", truth[0] + truth[1]);
    Ok(())
}
