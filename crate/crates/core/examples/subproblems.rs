//! The two convex subproblems on a hand-made instance: the step problem
//! over a ball intersection, then multiplier recovery at the new point.

use szoqq::qcqp::{certificate_residuals, solve_sp1, solve_sp2, Sp1Instance, Sp2Instance};
use szoqq::{build_safe_set, Sp1Options, Sp2Options};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // min x0 + x1 near two constraints, anchored at the origin
    let anchor = [0.0, 0.0];
    let fvals = [-0.05, -0.08];
    let grads = vec![vec![1.0, 0.2], vec![0.1, 1.0]];
    let curvature = [2.0, 2.0];
    let c = [1.0, 1.0];
    let mu = 1e-3;

    let set = build_safe_set(&anchor, &fvals, &grads, &curvature)?;
    let step = solve_sp1(&Sp1Instance { c: &c, mu, set: &set }, &Sp1Options::default())?;
    println!("step problem");
    println!("  x            ({:.6}, {:.6})", step.x[0], step.x[1]);
    println!("  objective    {:.6e}", step.objective);
    println!("  multipliers  {:?}", step.lambda);
    println!("  duality gap  {:.2e} after {} iterations", step.duality_gap, step.iterations);

    let inst = Sp2Instance {
        grad_f0_next: c.to_vec(),
        step: step.x.clone(),
        gradients: grads,
        fvals: fvals.to_vec(),
        smoothness: curvature.to_vec(),
        mu,
        eta: 0.1,
    };
    // with a linear objective the step problem's multipliers already
    // satisfy the stationarity part of the certificate
    let warm = step.lambda.clone();
    let (d1, _) = certificate_residuals(&inst, &warm);
    println!("multiplier recovery (warm start residual {d1:.3e}, bound {})", inst.eta / 2.0);
    match solve_sp2(&inst, &Sp2Options::default(), &warm) {
        Ok(sol) => {
            println!("  lambda       {:?}", sol.lambda);
            println!("  certified    {}", sol.feasible);
            println!("  delta1       {:.3e}", sol.delta1);
            println!("  delta2       {:?}", sol.delta2);
        }
        Err(e) => println!("  {e}"),
    }
    Ok(())
}
