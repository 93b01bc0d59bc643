//! The two convex subproblems solved at every outer iteration.
//!
//! * [`solve_sp1`]: minimize `c'x + mu ||x - x_k||^2` over the local ball
//!   intersection, solved through its `m`-dimensional concave dual.
//! * [`solve_sp2`]: the smallest (infinity-norm) multiplier vector that
//!   certifies the new point as an approximate KKT point of that subproblem.

mod sp1;
mod sp2;

pub use sp1::{solve_sp1, Sp1Instance, SubproblemSolution};
pub use sp2::{certificate_residuals, solve_sp2, Sp2Instance, Sp2Solution};
