//! The game with a leader, one major follower and `n` minor followers.
//!
//! Only the major is incentivized: the leader plays
//! `theta y0 + thetaM yM + Q (uM - beta yM)`, the major `beta yM` and each
//! minor `alpha y^i + alphaM yM`. Minors respond to the major through the
//! mean-field coupling, which keeps the gain bounded as `n` grows.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{
    expected_cost, minor_reaction, residual_vector, solve_linear_policies, Assembled, Coefficient, Condition, Mover,
    Setting, Unknown,
};
use crate::linalg;
use crate::model::{
    build_maj_costs, Channel, EquilibriumSolution, IncentivePolicy, LeaderPolicy, LinearPolicy, MajGameSpec, Monitored,
    Profile,
};

use super::pn::GAIN_DENOMINATOR_TOLERANCE;

/// Population size, or the mean-field limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Population {
    Finite(usize),
    Infinite,
}

impl Population {
    pub fn finite(&self) -> Option<usize> {
        match self {
            Population::Finite(n) => Some(*n),
            Population::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Ratios {
    /// `r n/(n+1)`
    rprime: f64,
    /// `(n-1)/n`
    others: f64,
    /// `(2n+1)/n`
    spread: f64,
}

fn ratios(spec: &MajGameSpec, pop: Population) -> Ratios {
    match pop {
        Population::Finite(n) => {
            let nf = n as f64;
            Ratios { rprime: spec.r * nf / (nf + 1.0), others: (nf - 1.0) / nf, spread: (2.0 * nf + 1.0) / nf }
        }
        Population::Infinite => Ratios { rprime: spec.r, others: 1.0, spread: 2.0 },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MajSolution {
    pub theta: f64,
    #[serde(rename = "thetaM")]
    pub theta_m: f64,
    pub beta: f64,
    pub alpha: f64,
    #[serde(rename = "alphaM")]
    pub alpha_m: f64,
    pub gain: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub population: Population,
    pub rprime: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MajHatSolution {
    pub theta_hat: f64,
    #[serde(rename = "thetaM_hat")]
    pub theta_m_hat: f64,
    pub beta_hat: f64,
    pub alpha_hat: f64,
    #[serde(rename = "alphaM_hat")]
    pub alpha_m_hat: f64,
    pub n: usize,
}

/// Minor response slope `dp = dalphaM/dbeta` and intercept `kappa`, with
/// `alpha` itself.
fn minor_response_parts(spec: &MajGameSpec, pop: Population) -> (f64, f64, f64) {
    let Ratios { rprime, others, spread } = ratios(spec, pop);
    let q = spec.q;
    let alpha = -q / (3.0 * rprime + 2.0 * q * spread);
    let dp = -q / (rprime + 2.0 * q);
    let kappa = dp / 3.0 * (1.0 + others * alpha);
    (alpha, dp, kappa)
}

/// Minors' Nash response `(alpha, alphaM)` to a major playing `beta yM`.
pub fn maj_minor_response(spec: &MajGameSpec, beta: f64) -> Result<(f64, f64)> {
    spec.validate()?;
    let (alpha, dp, kappa) = minor_response_parts(spec, Population::Finite(spec.n));
    Ok((alpha, dp * beta + kappa))
}

fn leader_major_system(spec: &MajGameSpec, pop: Population) -> Result<MajSolution> {
    spec.validate()?;
    let ratios = ratios(spec, pop);
    let (alpha, dp, kappa) = minor_response_parts(spec, pop);
    let MajGameSpec { r0, q0, qhat0, .. } = *spec;
    let big_r = r0 + q0 + qhat0;
    let d = 1.0 + dp;
    let w = q0 * d + qhat0;
    let a = vec![
        vec![3.0 * big_r, 0.0, 0.0, 0.0],
        vec![0.0, big_r, qhat0 + q0, q0],
        vec![w / 2.0, w, w, q0 * d],
        vec![0.0, 0.0, -dp, 1.0],
    ];
    let b = [-q0 * (alpha + 1.0), -q0 * (alpha + 1.0) / 3.0, -q0 * d * (alpha + 1.0) / 2.0, kappa];
    let x = linalg::solve(&a, &b, "leader-major optimality system")?.x;
    Ok(MajSolution {
        theta: x[0],
        theta_m: x[1],
        beta: x[2],
        alpha,
        alpha_m: x[3],
        gain: None,
        l: None,
        population: pop,
        rprime: ratios.rprime,
        d,
    })
}

/// Best the leader can do controlling herself and the major while minors
/// respond in Nash equilibrium.
pub fn maj_leader_major_optimal(spec: &MajGameSpec) -> Result<MajSolution> {
    leader_major_system(spec, Population::Finite(spec.n))
}

/// Incentive gain and the major's conditional aggregate coefficient `L`.
pub fn maj_gain(spec: &MajGameSpec, sol: &MajSolution) -> Result<(f64, f64)> {
    let l = (sol.beta + sol.alpha_m + sol.theta_m) + 0.5 * (sol.alpha + sol.theta + 1.0);
    if l.abs() < GAIN_DENOMINATOR_TOLERANCE {
        return Err(Error::DegenerateGain(format!(
            "major's conditional aggregate vanishes (L = {l:e}); the leader cannot steer the major"
        )));
    }
    Ok((-(1.0 + spec.r_m * sol.beta / (spec.q_m * l)), l))
}

/// Leader-major optimum together with its incentive gain.
pub fn maj_solve(spec: &MajGameSpec) -> Result<MajSolution> {
    let mut sol = maj_leader_major_optimal(spec)?;
    let (gain, l) = maj_gain(spec, &sol)?;
    sol.gain = Some(gain);
    sol.l = Some(l);
    Ok(sol)
}

/// Mean-field limit of the leader-major optimum and its gain.
pub fn maj_limits(spec: &MajGameSpec) -> Result<MajSolution> {
    let to_limit = |e: Error| match e {
        Error::DegenerateGame { context, pivot, magnitude } => {
            Error::DegenerateLimit(format!("{context}: pivot {pivot} has magnitude {magnitude:e}"))
        }
        Error::DegenerateGain(m) => Error::DegenerateLimit(m),
        other => other,
    };
    let mut sol = leader_major_system(spec, Population::Infinite).map_err(to_limit)?;
    let (gain, l) = maj_gain(spec, &sol).map_err(to_limit)?;
    sol.gain = Some(gain);
    sol.l = Some(l);
    Ok(sol)
}

/// Leader-optimal (team) coefficients.
pub fn maj_leader_optimal(spec: &MajGameSpec) -> Result<MajHatSolution> {
    spec.validate()?;
    if spec.q0 == 0.0 {
        return Err(Error::UnsupportedParameterization(
            "the leader-optimal minor coefficient on yM divides by 2*q0, which is zero".into(),
        ));
    }
    let MajGameSpec { r0, q0, qhat0, n, .. } = *spec;
    let nf = n as f64;
    let big_r = r0 + q0 + qhat0;
    let c = (qhat0 + q0) / (2.0 * q0);
    let m = nf / (nf + 2.0);
    let a = vec![
        vec![3.0 * big_r, 0.0, 0.0, q0, 0.0],
        vec![0.0, big_r, qhat0 + q0, q0 / 3.0, q0],
        vec![1.0 / 3.0, 1.0, 1.0, (nf - 1.0) / (3.0 * nf), 1.0],
        vec![m, 0.0, 0.0, 1.0, 0.0],
        vec![c, 2.0 * c, 2.0 * c, 0.5, 1.0],
    ];
    let b = [-q0, -q0 / 3.0, -1.0 / 3.0, -m, -0.5];
    let x = linalg::solve(&a, &b, "leader-optimality system")?.x;
    Ok(MajHatSolution { theta_hat: x[0], theta_m_hat: x[1], beta_hat: x[2], alpha_hat: x[3], alpha_m_hat: x[4], n })
}

pub fn maj_profile(sol: &MajSolution, gain: f64) -> Profile {
    Profile::new(
        LeaderPolicy::Incentive(IncentivePolicy {
            base: LinearPolicy::from_pairs([(Channel::LeaderObs, sol.theta), (Channel::MajorObs, sol.theta_m)]),
            gain,
            reference: LinearPolicy::single(Channel::MajorObs, sol.beta),
            monitored: Monitored::MajorAction,
        }),
        Some(LinearPolicy::single(Channel::MajorObs, sol.beta)),
        LinearPolicy::from_pairs([(Channel::OwnObs, sol.alpha), (Channel::MajorObs, sol.alpha_m)]),
    )
}

pub fn maj_hat_profile(sol: &MajHatSolution) -> Profile {
    Profile::new(
        LeaderPolicy::Linear(LinearPolicy::from_pairs([
            (Channel::LeaderObs, sol.theta_hat),
            (Channel::MajorObs, sol.theta_m_hat),
        ])),
        Some(LinearPolicy::single(Channel::MajorObs, sol.beta_hat)),
        LinearPolicy::from_pairs([(Channel::OwnObs, sol.alpha_hat), (Channel::MajorObs, sol.alpha_m_hat)]),
    )
}

fn all_unknowns() -> [Unknown; 5] {
    [
        Unknown::new("theta", Coefficient::Leader(Channel::LeaderObs)),
        Unknown::new("thetaM", Coefficient::Leader(Channel::MajorObs)),
        Unknown::new("beta", Coefficient::Major(Channel::MajorObs)),
        Unknown::new("alpha", Coefficient::Followers(Channel::OwnObs)),
        Unknown::new("alphaM", Coefficient::Followers(Channel::MajorObs)),
    ]
}

fn zero_profile() -> Profile {
    Profile::new(LeaderPolicy::Linear(LinearPolicy::zero()), Some(LinearPolicy::zero()), LinearPolicy::zero())
}

fn minor_condition(spec: &MajGameSpec) -> Condition {
    Condition::new("minor", build_maj_costs(spec).minor, Mover::follower())
}

/// The minors' response sensitivity `d mean(u^i) / d uM`, found by re-solving
/// their conditions.
pub fn maj_minor_reaction(spec: &MajGameSpec) -> Result<f64> {
    let setting = Setting::major(spec.n);
    let unknowns = &all_unknowns()[3..];
    minor_reaction(&setting, &zero_profile(), unknowns, &[minor_condition(spec)])
}

fn leader_major_conditions(spec: &MajGameSpec, reaction: f64) -> Vec<Condition> {
    let leader = build_maj_costs(spec).leader;
    vec![
        Condition::new("leader", leader.clone(), Mover::leader()),
        Condition::new("major_for_leader", leader, Mover::major_anticipating(reaction)),
        minor_condition(spec),
    ]
}

fn leader_optimal_conditions(spec: &MajGameSpec) -> Vec<Condition> {
    let leader = build_maj_costs(spec).leader;
    vec![
        Condition::new("leader", leader.clone(), Mover::leader()),
        Condition::new("major_for_leader", leader.clone(), Mover::major()),
        Condition::new("minor_for_leader", leader, Mover::follower()),
    ]
}

/// Leader-major optimum from the generic assembler.
pub fn maj_assembled_leader_major(spec: &MajGameSpec) -> Result<Assembled> {
    spec.validate()?;
    let reaction = maj_minor_reaction(spec)?;
    let setting = Setting::major(spec.n);
    solve_linear_policies(&setting, &zero_profile(), &all_unknowns(), &leader_major_conditions(spec, reaction))
}

/// Leader-optimal (team) coefficients from the generic assembler.
pub fn maj_assembled_leader_optimal(spec: &MajGameSpec) -> Result<Assembled> {
    spec.validate()?;
    let setting = Setting::major(spec.n);
    solve_linear_policies(&setting, &zero_profile(), &all_unknowns(), &leader_optimal_conditions(spec))
}

/// Residuals of the leader-major conditions at the base profile, and of the
/// major's own condition under the incentive when a gain is present.
pub fn maj_residuals(spec: &MajGameSpec, sol: &MajSolution) -> Result<Vec<(String, f64)>> {
    let n = sol
        .population
        .finite()
        .ok_or_else(|| Error::InvalidArgument("residuals are defined for a finite population only".into()))?;
    let spec = spec.with_n(n);
    let setting = Setting::major(n);
    let reaction = sol.d - 1.0;
    let mut out = residual_vector(&setting, &maj_profile(sol, 0.0), &leader_major_conditions(&spec, reaction))?;
    if let Some(gain) = sol.gain {
        let profile = maj_profile(sol, gain);
        let conds = [Condition::new("major", build_maj_costs(&spec).major, Mover::major()), minor_condition(&spec)];
        out.extend(
            residual_vector(&setting, &profile, &conds)?.into_iter().map(|(k, v)| (format!("incentive_{k}"), v)),
        );
    }
    Ok(out)
}

pub fn maj_hat_residuals(spec: &MajGameSpec, sol: &MajHatSolution) -> Result<Vec<(String, f64)>> {
    let spec = spec.with_n(sol.n);
    residual_vector(&Setting::major(sol.n), &maj_hat_profile(sol), &leader_optimal_conditions(&spec))
}

impl MajSolution {
    pub fn to_equilibrium(&self, spec: &MajGameSpec) -> Result<EquilibriumSolution> {
        let mut params = std::collections::BTreeMap::from([
            ("theta".to_string(), self.theta),
            ("thetaM".to_string(), self.theta_m),
            ("beta".to_string(), self.beta),
            ("alpha".to_string(), self.alpha),
            ("alphaM".to_string(), self.alpha_m),
            ("rprime".to_string(), self.rprime),
            ("D".to_string(), self.d),
        ]);
        if let (Some(g), Some(l)) = (self.gain, self.l) {
            params.insert("gain".into(), g);
            params.insert("L".into(), l);
        }
        let n = self.population.finite().unwrap_or(spec.n);
        Ok(EquilibriumSolution { params, residuals: maj_residuals(spec, self)?.into_iter().collect(), n })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MajLoss {
    pub n: usize,
    pub loss: f64,
    pub j_leader_major: f64,
    pub j_leader_opt: f64,
}

/// Leader's cost gap between the leader-major and leader-optimal profiles.
pub fn maj_loss(spec: &MajGameSpec) -> Result<MajLoss> {
    let lm = maj_leader_major_optimal(spec)?;
    let lo = maj_leader_optimal(spec)?;
    let setting = Setting::major(spec.n);
    let leader = build_maj_costs(spec).leader;
    let j_leader_major = expected_cost(&setting, &maj_profile(&lm, 0.0), &leader)?;
    let j_leader_opt = expected_cost(&setting, &maj_hat_profile(&lo), &leader)?;
    Ok(MajLoss { n: spec.n, loss: j_leader_major - j_leader_opt, j_leader_major, j_leader_opt })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1(n: usize) -> MajGameSpec {
        MajGameSpec::loss_curve_reference(n)
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn minor_response_without_coupling() {
        let spec = MajGameSpec::new(2.0, 1.0, 1.0, 1.0, 1.0, 2.0, 0.0, 5).unwrap();
        assert_eq!(maj_minor_response(&spec, 0.7).unwrap(), (-0.0, -0.0));
    }

    #[test]
    fn minor_reaction_matches_closed_form() {
        let spec = fig1(6);
        let s = maj_minor_reaction(&spec).unwrap();
        let (_, dp, _) = minor_response_parts(&spec, Population::Finite(6));
        assert!(close(s, dp, 1e-12), "{s} vs {dp}");
    }

    #[test]
    fn leader_major_matches_assembler() {
        for n in [1, 3, 40] {
            let spec = MajGameSpec::new(1.7, 0.6, 0.9, 1.4, 0.8, 0.5, 1.3, n).unwrap();
            let sol = maj_leader_major_optimal(&spec).unwrap();
            let a = maj_assembled_leader_major(&spec).unwrap();
            for (name, v) in [
                ("theta", sol.theta),
                ("thetaM", sol.theta_m),
                ("beta", sol.beta),
                ("alpha", sol.alpha),
                ("alphaM", sol.alpha_m),
            ] {
                assert!(close(a.value(name).unwrap(), v, 1e-12), "n={n} {name}: {} vs {v}", a.value(name).unwrap());
            }
        }
    }

    #[test]
    fn leader_optimal_matches_assembler() {
        for n in [1, 3, 40] {
            let spec = MajGameSpec::new(1.7, 0.6, 0.9, 1.4, 0.8, 0.5, 1.3, n).unwrap();
            let sol = maj_leader_optimal(&spec).unwrap();
            let a = maj_assembled_leader_optimal(&spec).unwrap();
            for (name, v) in [
                ("theta", sol.theta_hat),
                ("thetaM", sol.theta_m_hat),
                ("beta", sol.beta_hat),
                ("alpha", sol.alpha_hat),
                ("alphaM", sol.alpha_m_hat),
            ] {
                assert!(close(a.value(name).unwrap(), v, 1e-12), "n={n} {name}: {} vs {v}", a.value(name).unwrap());
            }
        }
    }

    #[test]
    fn gain_makes_major_stationary() {
        let spec = fig1(12);
        let sol = maj_solve(&spec).unwrap();
        let res = maj_residuals(&spec, &sol).unwrap();
        assert!(res.iter().all(|(_, v)| v.abs() < 1e-10), "{res:?}");
    }

    #[test]
    fn zero_beta_gain_is_minus_one() {
        let spec = fig1(3);
        let mut sol = maj_leader_major_optimal(&spec).unwrap();
        sol.beta = 0.0;
        assert_eq!(maj_gain(&spec, &sol).unwrap().0, -1.0);
    }

    #[test]
    fn limit_values() {
        let lim = maj_limits(&fig1(1)).unwrap();
        assert_eq!(lim.alpha, -0.1);
        assert!(close(lim.theta, -0.075, 1e-15));
        assert!(close(lim.beta, -5.0 / 34.0, 1e-15));
        assert!(close(lim.alpha_m, -13.0 / 340.0, 1e-15));
        let big = maj_leader_major_optimal(&fig1(1_000_000)).unwrap();
        assert!(close(big.beta, lim.beta, 1e-6));
        assert!(close(big.alpha_m, lim.alpha_m, 1e-6));
        assert!(close(big.theta_m, lim.theta_m, 1e-6));
    }

    #[test]
    fn no_tracking_is_degenerate() {
        let spec = MajGameSpec::new(2.0, 0.0, 0.0, 1.0, 1.0, 2.0, 1.0, 4).unwrap();
        assert!(matches!(maj_leader_major_optimal(&spec), Err(Error::DegenerateGame { .. })));
        assert!(matches!(maj_leader_optimal(&spec), Err(Error::UnsupportedParameterization(m)) if m.contains("2*q0")));
    }

    #[test]
    fn loss_curve_values() {
        let l1 = maj_loss(&fig1(1)).unwrap();
        assert!(close(l1.j_leader_opt, 0.3142857142857143, 1e-9));
        assert!(close(l1.j_leader_major, 0.522634, 1e-6));
        let l10 = maj_loss(&fig1(10)).unwrap();
        assert!(close(l10.j_leader_opt, 0.08209, 1e-5));
        assert!(l10.loss > 0.0);
    }
}
