// When minors only want to conform and share the major's observation, the
// leader loses nothing by incentivizing the major alone.

use stacklab::solvers::zero_loss::{zero_loss_leader_optimal, zero_loss_loss, zero_loss_residuals, zero_loss_solve};
use stacklab::{Result, ZeroLossSpec};

pub fn run() -> Result<String> {
    let mut out = String::new();
    for n in [1, 5, 50] {
        let spec = ZeroLossSpec::new(2.0, 1.0, 1.0, 1.0, n)?;
        let loss = zero_loss_loss(&spec)?;
        let sol = zero_loss_solve(&spec).or_else(|_| zero_loss_leader_optimal(&spec))?;
        let worst = zero_loss_residuals(&spec, &sol)?.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        let gain = sol.gain.map_or("none (L = 0)".to_string(), |g| format!("{g:.6}"));
        out += &format!(
            "n = {n:<3} theta = {:.6} thetaM = {:.6} beta = {:.6} gain = {gain} loss = {:.1e} max residual = {:.1e}\n",
            sol.theta, sol.theta_m, sol.beta, loss.loss, worst
        );
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    print!("{}", run()?);
    Ok(())
}
