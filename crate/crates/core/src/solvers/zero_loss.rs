//! A major/minor variant in which the leader loses nothing by controlling
//! only the major.
//!
//! The major and every minor see one common observation `y`, minors only
//! want to conform (`(u^i - ubar)^2 + (u^i - uM)^2`), so they copy whatever
//! the major plays and the leader reaches her team optimum through him.

use serde::Serialize;

use super::major::MajLoss;
use super::pn::GAIN_DENOMINATOR_TOLERANCE;
use crate::error::{Error, Result};
use crate::gaussian::{
    expected_cost, residual_vector, solve_linear_policies, Assembled, Coefficient, Condition, Mover, Setting, Unknown,
};
use crate::model::{
    build_zero_loss_costs, Channel, IncentivePolicy, LeaderPolicy, LinearPolicy, Monitored, Profile, ZeroLossSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroLossSolution {
    pub theta: f64,
    #[serde(rename = "thetaM")]
    pub theta_m: f64,
    /// Shared by the major and every minor.
    pub beta: f64,
    pub gain: Option<f64>,
    /// The major's conditional aggregate coefficient `E[u0 + uM + ubar + omega0 | y] / y`.
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
}

/// Leader-optimal coefficients, reached with the major and minors sharing
/// one policy.
pub fn zero_loss_leader_optimal(spec: &ZeroLossSpec) -> Result<ZeroLossSolution> {
    spec.validate()?;
    let ZeroLossSpec { r0, q0, n, .. } = *spec;
    let nf = n as f64;
    let theta = -q0 / (3.0 * (q0 + r0));
    let theta_m = q0 / (6.0 * (r0 + q0));
    let aggregate = -(theta + 1.0 + 2.0 * theta_m) / 2.0;
    let beta = nf * aggregate / (nf + 1.0);
    let l = theta / 2.0 + theta_m + 2.0 * beta + 0.5;
    Ok(ZeroLossSolution { theta, theta_m, beta, gain: None, l, n })
}

/// Gain on the major's deviation. With a single minor the major's aggregate
/// coincides with the leader's tracking term, `L` vanishes and no affine
/// incentive of this form exists.
pub fn zero_loss_gain(spec: &ZeroLossSpec, sol: &ZeroLossSolution) -> Result<f64> {
    if sol.l.abs() < GAIN_DENOMINATOR_TOLERANCE {
        return Err(Error::DegenerateGain(format!(
            "major's conditional aggregate vanishes (L = {:e}) at n = {}",
            sol.l, sol.n
        )));
    }
    Ok(-1.0 - spec.r_m * sol.beta / (spec.q_m * sol.l))
}

pub fn zero_loss_solve(spec: &ZeroLossSpec) -> Result<ZeroLossSolution> {
    let mut sol = zero_loss_leader_optimal(spec)?;
    sol.gain = Some(zero_loss_gain(spec, &sol)?);
    Ok(sol)
}

pub fn zero_loss_profile(sol: &ZeroLossSolution, gain: f64) -> Profile {
    Profile::new(
        LeaderPolicy::Incentive(IncentivePolicy {
            base: LinearPolicy::from_pairs([(Channel::LeaderObs, sol.theta), (Channel::MajorObs, sol.theta_m)]),
            gain,
            reference: LinearPolicy::single(Channel::MajorObs, sol.beta),
            monitored: Monitored::MajorAction,
        }),
        Some(LinearPolicy::single(Channel::MajorObs, sol.beta)),
        LinearPolicy::single(Channel::OwnObs, sol.beta),
    )
}

/// Every first-order condition at the solution: the leader and the major
/// (anticipating that minors copy him) on the leader's cost, the minors on
/// their own cost, and the major on his own cost under the incentive when a
/// gain is present.
pub fn zero_loss_residuals(spec: &ZeroLossSpec, sol: &ZeroLossSolution) -> Result<Vec<(String, f64)>> {
    let costs = build_zero_loss_costs(spec);
    let setting = Setting::shared_major(sol.n);
    let mut out = residual_vector(
        &setting,
        &zero_loss_profile(sol, 0.0),
        &[
            Condition::new("leader", costs.leader.clone(), Mover::leader()),
            Condition::new("major_for_leader", costs.leader, Mover::major_anticipating(1.0)),
        ],
    )?;
    let gain = sol.gain.unwrap_or(0.0);
    let mut conds = vec![Condition::new("minor", costs.minor, Mover::follower())];
    if sol.gain.is_some() {
        conds.push(Condition::new("major", costs.major, Mover::major()));
    }
    out.extend(residual_vector(&setting, &zero_loss_profile(sol, gain), &conds)?);
    Ok(out)
}

/// Team optimum of the leader's cost. Her cost sees the followers only
/// through `uM/n + ubar`, so the optimum is reached with the major idle and
/// the minors carrying the whole aggregate.
pub fn zero_loss_team_optimum(spec: &ZeroLossSpec) -> Result<Assembled> {
    spec.validate()?;
    let leader = build_zero_loss_costs(spec).leader;
    let start =
        Profile::new(LeaderPolicy::Linear(LinearPolicy::zero()), Some(LinearPolicy::zero()), LinearPolicy::zero());
    solve_linear_policies(
        &Setting::shared_major(spec.n),
        &start,
        &[
            Unknown::new("theta", Coefficient::Leader(Channel::LeaderObs)),
            Unknown::new("thetaM", Coefficient::Leader(Channel::MajorObs)),
            Unknown::new("aggregate", Coefficient::Followers(Channel::OwnObs)),
        ],
        &[
            Condition::new("leader", leader.clone(), Mover::leader()),
            Condition::new("minor_for_leader", leader, Mover::follower()),
        ],
    )
}

pub fn zero_loss_loss(spec: &ZeroLossSpec) -> Result<MajLoss> {
    let sol = zero_loss_leader_optimal(spec)?;
    let team = zero_loss_team_optimum(spec)?;
    let setting = Setting::shared_major(spec.n);
    let leader = build_zero_loss_costs(spec).leader;
    let j_leader_major = expected_cost(&setting, &zero_loss_profile(&sol, 0.0), &leader)?;
    let j_leader_opt = expected_cost(&setting, &team.profile, &leader)?;
    Ok(MajLoss { n: spec.n, loss: j_leader_major - j_leader_opt, j_leader_major, j_leader_opt })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_value() {
        let sol = zero_loss_solve(&ZeroLossSpec::new(2.0, 1.0, 1.0, 1.0, 5).unwrap()).unwrap();
        assert!((sol.theta + 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn stationary_and_lossless() {
        for n in [1, 5, 50] {
            let spec = ZeroLossSpec::new(2.0, 1.0, 1.0, 1.0, n).unwrap();
            let sol = match n {
                1 => zero_loss_leader_optimal(&spec).unwrap(),
                _ => zero_loss_solve(&spec).unwrap(),
            };
            let res = zero_loss_residuals(&spec, &sol).unwrap();
            assert!(res.iter().all(|(_, v)| v.abs() < 1e-12), "{res:?}");
            let loss = zero_loss_loss(&spec).unwrap();
            assert!(loss.loss.abs() < 1e-12, "{loss:?}");
        }
    }

    #[test]
    fn single_minor_has_no_gain() {
        let spec = ZeroLossSpec::new(2.0, 1.0, 1.0, 1.0, 1).unwrap();
        assert!(matches!(zero_loss_solve(&spec), Err(Error::DegenerateGain(_))));
    }

    #[test]
    fn unit_weight_sum_is_regular() {
        let spec = ZeroLossSpec::new(0.4, 0.6, 1.0, 2.0, 3).unwrap();
        let sol = zero_loss_solve(&spec).unwrap();
        assert!(zero_loss_residuals(&spec, &sol).unwrap().iter().all(|(_, v)| v.abs() < 1e-12));
    }
}
