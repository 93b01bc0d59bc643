//! Forward-difference gradients against the exact ones, across step sizes.

use std::sync::Arc;

use szoqq::problems::ToyProblem;
use szoqq::{estimate_gradient, ProblemOracle, Verification};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let toy = Arc::new(ToyProblem);
    let oracle = ProblemOracle::new(toy.clone());
    let x = [0.4, -0.3];
    let exact = toy.true_gradients(&x);
    // exact smoothness of the toy's constraints
    let m = ToyProblem::EXACT_SMOOTHNESS;

    println!("{:>4} {:>9} {:>12} {:>12}", "row", "nu", "error", "bound");
    for i in 1..=3 {
        let base = oracle.query(&x, i, 0)?;
        for nu in [1e-1, 1e-3, 1e-5, 1e-7] {
            let est = estimate_gradient(&oracle, &x, i, base, nu, m[i - 1], 0)?;
            let err = est.g.iter().zip(&exact[i]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            println!("{i:>4} {nu:>9.0e} {err:>12.3e} {:>12.3e}", est.error_bound);
        }
    }
    println!("queries: {}", oracle.sample_count());
    Ok(())
}
