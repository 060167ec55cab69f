// Certify both incentive equilibria exactly and cross-check the leader's
// cost by simulation; then drop the gain and watch certification fail.

use stacklab::solvers::major::maj_solve;
use stacklab::solvers::pn::pn_solve;
use stacklab::verify::{certify_incentive, Certifiable, CertifyOptions, Epsilons, MonteCarloConfig};
use stacklab::{MajGameSpec, PnGameSpec, Result};

pub fn run() -> Result<String> {
    let pn = PnGameSpec::new(2.0, 1.0, 2.0, 1.0, 5)?;
    let pn_sol = pn_solve(&pn)?;
    let mut opts = CertifyOptions::new(7);
    opts.monte_carlo = Some(MonteCarloConfig::new(100_000, 7, 10)?);
    let a = certify_incentive(Certifiable::Pn(&pn, &pn_sol), Epsilons::ZERO, opts)?;

    let maj = MajGameSpec::loss_curve_reference(5);
    let maj_sol = maj_solve(&maj)?;
    let b = certify_incentive(Certifiable::Major(&maj, &maj_sol), Epsilons::ZERO, CertifyOptions::new(7))?;
    let no_gain = CertifyOptions { gain_override: Some(0.0), ..CertifyOptions::new(7) };
    let c = certify_incentive(Certifiable::Major(&maj, &maj_sol), Epsilons::ZERO, no_gain)?;

    let mc = a.monte_carlo.as_ref().expect("requested");
    Ok(format!(
        "all followers: pass = {}, leader cost {:.6} (simulated {:.6} +/- {:.6})\n\
         major/minor:   pass = {}, improvements {:?}\n\
         without gain:  pass = {}, major could save {:.6}",
        a.verdict.pass,
        a.leader_cost,
        mc.estimate.estimate,
        mc.estimate.standard_error,
        b.verdict.pass,
        b.per_player_improvement,
        c.verdict.pass,
        c.per_player_improvement["major"]
    ))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    println!("{}", run()?);
    Ok(())
}
