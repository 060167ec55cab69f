// Use the generic stationarity assembler directly: pose a small game by
// listing unknown coefficients and first-order conditions, and let it find
// the equilibrium without any closed form.

use stacklab::gaussian::{expected_cost, solve_linear_policies, Coefficient, Condition, Mover, Setting, Unknown};
use stacklab::model::{build_maj_costs, Channel};
use stacklab::{LeaderPolicy, LinearPolicy, MajGameSpec, Profile, Result};

pub fn run() -> Result<String> {
    // Followers' Nash equilibrium given a fixed leader and major.
    let spec = MajGameSpec::loss_curve_reference(8);
    let costs = build_maj_costs(&spec);
    let setting = Setting::major(spec.n);
    let start = Profile::new(
        LeaderPolicy::Linear(LinearPolicy::single(Channel::LeaderObs, -0.1)),
        Some(LinearPolicy::single(Channel::MajorObs, -0.2)),
        LinearPolicy::zero(),
    );
    let unknowns = [
        Unknown::new("alpha", Coefficient::Followers(Channel::OwnObs)),
        Unknown::new("alphaM", Coefficient::Followers(Channel::MajorObs)),
    ];
    let conditions = [Condition::new("minor", costs.minor.clone(), Mover::follower())];
    let eq = solve_linear_policies(&setting, &start, &unknowns, &conditions)?;
    let cost = expected_cost(&setting, &eq.profile, &costs.minor)?;
    Ok(format!(
        "minor response: alpha = {:.6}, alphaM = {:.6}; expected minor cost {:.6}; max residual {:.1e}; condition {:.2}",
        eq.value("alpha").unwrap_or(f64::NAN),
        eq.value("alphaM").unwrap_or(f64::NAN),
        cost,
        eq.max_residual(),
        eq.condition_number
    ))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    println!("{}", run()?);
    Ok(())
}
