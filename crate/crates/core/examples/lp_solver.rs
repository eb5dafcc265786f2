//! Solves a small bounded LP with the built-in simplex and checks the duals.

use syncvrp::lp::{dual_bound, solve_lp, LpProblem, LpRow, Relation, INFINITY};

fn main() -> syncvrp::Result<()> {
    // min -3x - 2y  s.t.  x + y <= 4,  x + 3y <= 6,  x <= 3
    let problem = LpProblem::new(
        vec![-3.0, -2.0],
        vec![
            LpRow::new(vec![1.0, 1.0], Relation::Le, 4.0),
            LpRow::new(vec![1.0, 3.0], Relation::Le, 6.0),
        ],
        vec![(0.0, 3.0), (0.0, INFINITY)],
    )?;
    let out = solve_lp(&problem);
    println!("status {:?} after {} pivots", out.status, out.iterations);
    println!("x = {:.3}, y = {:.3}, objective {:.3}", out.values[0], out.values[1], out.objective);
    println!("duals {:?}, dual bound {:.3}", out.duals, dual_bound(&problem, &out.duals));
    Ok(())
}
