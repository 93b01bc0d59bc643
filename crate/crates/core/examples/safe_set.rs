//! Build the local feasible set around the toy's starting point and check
//! it against the true constraints by sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use szoqq::gradient::{initial_step, safe_radius};
use szoqq::problems::{by_name, ToyProblem};
use szoqq::{ball_containment, build_safe_set, estimate_gradient, lipschitz_set, BlackBox, ProblemOracle, Verification};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = by_name("toy")?;
    let smooth = problem.default_smoothness()?;
    let oracle = ProblemOracle::new(std::sync::Arc::new(ToyProblem));
    let x0 = problem.x0.clone();

    let values = oracle.query_point(&x0, 0)?;
    let fvals = &values[1..];
    // the toy's own rows (the epigraph row comes first in the solver's list)
    let l = &smooth.lipschitz()[1..];
    let m = &smooth.smoothness()[1..];
    let nu = initial_step(safe_radius(fvals, l.iter().copied().fold(0.0, f64::max))?, x0.len());
    let mut grads = Vec::new();
    for i in 0..fvals.len() {
        grads.push(estimate_gradient(&oracle, &x0, i + 1, fvals[i], nu, m[i], 0)?.g);
    }
    let s = build_safe_set(&x0, fvals, &grads, m)?;
    let t = lipschitz_set(&x0, fvals, l)?;

    for (i, (sb, tb)) in s.balls.iter().zip(&t.balls).enumerate() {
        println!(
            "constraint {}: S-ball r={:.4} at ({:.4}, {:.4}), T-ball r={:.4}, T inside S: {}",
            i + 1,
            sb.radius,
            sb.center[0],
            sb.center[1],
            tb.radius,
            ball_containment(tb, sb)
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let small = &s.balls[s.smallest_ball()];
    let (mut kept, mut worst) = (0, f64::NEG_INFINITY);
    while kept < 10_000 {
        let x: Vec<f64> = small.center.iter().map(|c| c + rng.gen_range(-small.radius..small.radius)).collect();
        if !s.contains(&x)? {
            continue;
        }
        kept += 1;
        let v = ToyProblem.true_values(&x);
        worst = v[1..].iter().copied().fold(worst, f64::max);
    }
    println!("{kept} points in the set, largest true constraint value {worst:.4e}");
    println!("oracle queries: {} (toy has d={})", oracle.sample_count(), ToyProblem.dim());
    Ok(())
}
