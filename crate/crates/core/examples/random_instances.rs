//! Batch of seeded random convex instances: every run is audited for
//! infeasible samples and graded against exact gradients.

use szoqq::problems::random_problem;
use szoqq::{run, AlgorithmConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = AlgorithmConfig { eta: 1e-2, mu: 1e-3, lambda_bound: 1.0, ..AlgorithmConfig::default() };
    println!("{:<16} {:>6} {:>8} {:>10} {:>11} {:>10}", "instance", "k", "samples", "reason", "kkt", "infeasible");
    for seed in 0..10u64 {
        let d = 2 + (seed % 4) as usize;
        let m = 1 + (seed % 3) as usize;
        let problem = random_problem(seed, d, m);
        let prep = problem.prepare(problem.default_smoothness()?)?;
        let mut out = run(&prep.oracle, prep.smoothness.clone(), &config, &prep.x0)?;
        let kkt = out.report.grade(prep.truth.as_ref())?.max_residual;
        let infeasible = prep
            .oracle
            .samples()
            .iter()
            .filter(|s| prep.truth.true_values(&s.point)[1..].iter().any(|f| *f > 0.0))
            .count();
        println!(
            "{:<16} {:>6} {:>8} {:>10} {:>11.3e} {:>10}",
            problem.name,
            out.report.k_tilde,
            prep.oracle.sample_count(),
            format!("{:?}", out.report.reason).chars().take(10).collect::<String>(),
            kkt,
            infeasible
        );
    }
    Ok(())
}
