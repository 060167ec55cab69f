// Solve the all-followers game for one population size and show that the
// incentive gain makes the team profile every follower's best response.

use stacklab::solvers::pn::{pn_residuals, pn_solve};
use stacklab::{PnGameSpec, Result};

pub fn run() -> Result<String> {
    let spec = PnGameSpec::new(2.0, 1.0, 2.0, 1.0, 10)?;
    let sol = pn_solve(&spec)?;
    let worst = pn_residuals(&spec, &sol)?.values().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(format!(
        "n = {}: alpha0 = {:.6}, alpha = {:.6}, beta = {:.6}, gain = {:.6}, energy = {:.3}, max residual = {:.1e}",
        sol.n,
        sol.alpha0,
        sol.alpha,
        sol.beta,
        sol.gain.unwrap_or(f64::NAN),
        sol.energy.unwrap_or(f64::NAN),
        worst
    ))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    println!("{}", run()?);
    Ok(())
}
