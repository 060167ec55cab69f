use serde::Serialize;

use super::source::{Source, SourceVector};
use super::Setting;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{Channel, LeaderPolicy, LinearPolicy, Monitored, Profile, QuadraticCostSpec, Role, Slot};

/// Every cost slot of a profile written over the independent sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expansion {
    pub slots: [SourceVector; 5],
}

impl Expansion {
    pub fn slot(&self, s: Slot) -> SourceVector {
        self.slots[s.index()]
    }

    fn term(&self, combo: &std::collections::BTreeMap<Slot, f64>) -> SourceVector {
        combo.iter().fold(SourceVector::ZERO, |acc, (s, c)| acc + self.slot(*s) * *c)
    }
}

fn check_support(setting: &Setting, role: Role, policy: &LinearPolicy) -> Result<()> {
    let allowed = setting.info_set(role);
    match policy.support().find(|c| !allowed.contains(c)) {
        Some(c) => Err(Error::ContractViolation(format!("{role} policy uses {c}, which it does not observe"))),
        None => Ok(()),
    }
}

fn linear(setting: &Setting, policy: &LinearPolicy) -> SourceVector {
    policy.coeffs.iter().fold(SourceVector::ZERO, |acc, (c, v)| acc + setting.channel(*c) * *v)
}

/// Expands a profile from the point of view of follower `i`.
pub fn expand(setting: &Setting, profile: &Profile) -> Result<Expansion> {
    let n = setting.n as f64;
    check_support(setting, Role::Follower, &profile.followers)?;
    check_support(setting, Role::Follower, profile.own_policy())?;
    check_support(setting, Role::Leader, profile.leader.base())?;
    if let LeaderPolicy::Incentive(p) = &profile.leader {
        check_support(setting, Role::Leader, &p.reference)?;
        if p.monitored == Monitored::MajorAction && !setting.has_major() {
            return Err(Error::ContractViolation("incentive monitors a major follower the game lacks".into()));
        }
    }
    let major = match &profile.major {
        Some(m) if setting.has_major() => {
            check_support(setting, Role::Major, m)?;
            linear(setting, m)
        }
        Some(m) if m.support().next().is_some() => {
            return Err(Error::ContractViolation("major policy given for a game without a major follower".into()))
        }
        _ => SourceVector::ZERO,
    };

    let own = linear(setting, profile.own_policy());
    let mut others = SourceVector::ZERO;
    for (c, v) in &profile.followers.coeffs {
        if *v != 0.0 {
            others += setting.others_mean(*c)? * *v;
        }
    }
    let pop_mean = own * (1.0 / n) + others;

    let mut leader = linear(setting, profile.leader.base());
    if let LeaderPolicy::Incentive(p) = &profile.leader {
        let monitored = match p.monitored {
            Monitored::PopMeanAction => pop_mean,
            Monitored::MajorAction => major,
        };
        leader += (monitored - linear(setting, &p.reference)) * p.gain;
    }

    let mut slots = [SourceVector::ZERO; 5];
    slots[Slot::LeaderAction.index()] = leader;
    slots[Slot::MajorAction.index()] = major;
    slots[Slot::OwnAction.index()] = own;
    slots[Slot::PopMeanAction.index()] = pop_mean;
    slots[Slot::Omega0.index()] = SourceVector::unit(Source::Omega0);
    Ok(Expansion { slots })
}

/// Exact expected value of a quadratic cost.
pub fn expected_cost(setting: &Setting, profile: &Profile, cost: &QuadraticCostSpec) -> Result<f64> {
    let e = expand(setting, profile)?;
    let var = setting.variances();
    Ok(cost.terms.iter().map(|t| t.weight * e.term(&t.combo).second_moment(&var)).sum())
}

/// The player whose action is being varied, and how the others move with it.
///
/// `reaction` is the change in the mean follower action per unit change in
/// the mover's action. It is zero for a Nash player and the followers'
/// response sensitivity for a player that anticipates them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mover {
    pub role: Role,
    pub reaction: f64,
}

impl Mover {
    pub fn leader() -> Self {
        Self { role: Role::Leader, reaction: 0.0 }
    }

    pub fn major() -> Self {
        Self { role: Role::Major, reaction: 0.0 }
    }

    pub fn major_anticipating(reaction: f64) -> Self {
        Self { role: Role::Major, reaction }
    }

    pub fn follower() -> Self {
        Self { role: Role::Follower, reaction: 0.0 }
    }

    /// Derivative of each slot with respect to the mover's own action.
    pub fn tangent(&self, setting: &Setting, profile: &Profile) -> [f64; 5] {
        let mut t = [0.0; 5];
        match self.role {
            Role::Leader => {
                t[Slot::LeaderAction.index()] = 1.0;
                return t;
            }
            Role::Major => {
                t[Slot::MajorAction.index()] = 1.0;
                t[Slot::PopMeanAction.index()] = self.reaction;
            }
            Role::Follower => {
                t[Slot::OwnAction.index()] = 1.0;
                t[Slot::PopMeanAction.index()] = 1.0 / setting.n as f64;
            }
        }
        if let LeaderPolicy::Incentive(p) = &profile.leader {
            t[Slot::LeaderAction.index()] = p.gain * t[p.monitored.slot().index()];
        }
        t
    }
}

/// `E[dJ/du | info]` written on the mover's information channels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualForm {
    pub channels: Vec<Channel>,
    pub coeffs: Vec<f64>,
}

impl ResidualForm {
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Second derivative of the cost along the mover's own action.
pub fn curvature(setting: &Setting, profile: &Profile, cost: &QuadraticCostSpec, mover: Mover) -> f64 {
    let t = mover.tangent(setting, profile);
    cost.terms
        .iter()
        .map(|term| {
            let d: f64 = term.combo.iter().map(|(s, c)| c * t[s.index()]).sum();
            2.0 * term.weight * d * d
        })
        .sum()
}

/// Coefficients `a` with `E[target | y_c, c in channels] = sum_j a_j y_j`.
pub fn conditional_expectation(setting: &Setting, target: &SourceVector, channels: &[Channel]) -> Result<Vec<f64>> {
    let var = setting.variances();
    let ys: Vec<SourceVector> = channels.iter().map(|c| setting.channel(*c)).collect();
    let gram: Vec<Vec<f64>> = ys.iter().map(|a| ys.iter().map(|b| a.cov(b, &var)).collect()).collect();
    let rhs: Vec<f64> = ys.iter().map(|y| target.cov(y, &var)).collect();
    Ok(linalg::solve(&gram, &rhs, "observation covariance")?.x)
}

/// First-order condition of `cost` in the mover's action, projected on what
/// the mover observes. Zero exactly when no measurable deviation helps.
pub fn stationarity_residual(
    setting: &Setting,
    profile: &Profile,
    cost: &QuadraticCostSpec,
    mover: Mover,
) -> Result<ResidualForm> {
    if !(curvature(setting, profile, cost, mover) > 0.0) {
        return Err(Error::SingularProblem(format!("{} cost does not depend on its own action", mover.role)));
    }
    let e = expand(setting, profile)?;
    let t = mover.tangent(setting, profile);
    let grad = cost.terms.iter().fold(SourceVector::ZERO, |acc, term| {
        let d: f64 = term.combo.iter().map(|(s, c)| c * t[s.index()]).sum();
        acc + e.term(&term.combo) * (2.0 * term.weight * d)
    });
    let channels = setting.info_set(mover.role).to_vec();
    let coeffs = conditional_expectation(setting, &grad, &channels)?;
    Ok(ResidualForm { channels, coeffs })
}

/// Address of one scalar inside a [`Profile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coefficient {
    Leader(Channel),
    LeaderGain,
    LeaderReference(Channel),
    Major(Channel),
    /// The symmetric follower policy, including follower `i` unless a
    /// deviant policy is set.
    Followers(Channel),
    /// Follower `i` alone; reading falls back to the symmetric policy.
    Deviant(Channel),
}

impl Coefficient {
    pub fn get(&self, profile: &Profile) -> f64 {
        match *self {
            Coefficient::Leader(c) => profile.leader.base().coeff(c),
            Coefficient::LeaderGain => profile.leader.gain(),
            Coefficient::LeaderReference(c) => match &profile.leader {
                LeaderPolicy::Incentive(p) => p.reference.coeff(c),
                LeaderPolicy::Linear(_) => 0.0,
            },
            Coefficient::Major(c) => profile.major.as_ref().map_or(0.0, |m| m.coeff(c)),
            Coefficient::Followers(c) => profile.followers.coeff(c),
            Coefficient::Deviant(c) => profile.own_policy().coeff(c),
        }
    }

    pub fn set(&self, profile: &mut Profile, value: f64) -> Result<()> {
        match *self {
            Coefficient::Leader(c) => profile.leader.base_mut().set(c, value),
            Coefficient::LeaderGain | Coefficient::LeaderReference(_) => match &mut profile.leader {
                LeaderPolicy::Incentive(p) => match *self {
                    Coefficient::LeaderGain => p.gain = value,
                    Coefficient::LeaderReference(c) => p.reference.set(c, value),
                    _ => unreachable!(),
                },
                LeaderPolicy::Linear(_) => {
                    return Err(Error::ContractViolation("linear leader has no incentive term".into()))
                }
            },
            Coefficient::Major(c) => profile.major.get_or_insert_with(LinearPolicy::zero).set(c, value),
            Coefficient::Followers(c) => profile.followers.set(c, value),
            Coefficient::Deviant(c) => {
                let base = profile.followers.clone();
                profile.deviant.get_or_insert(base).set(c, value)
            }
        }
        Ok(())
    }
}

fn unit_shift(setting: &Setting, profile: &Profile, coef: Coefficient, base: &Expansion) -> Result<Expansion> {
    let mut p = profile.clone();
    coef.set(&mut p, coef.get(profile) + 1.0)?;
    let shifted = expand(setting, &p)?;
    let mut slots = [SourceVector::ZERO; 5];
    for (k, s) in slots.iter_mut().enumerate() {
        *s = shifted.slots[k] - base.slots[k];
    }
    Ok(Expansion { slots })
}

fn shifts(setting: &Setting, profile: &Profile, coefs: &[Coefficient]) -> Result<(Expansion, Vec<Expansion>)> {
    let base = expand(setting, profile)?;
    let d = coefs.iter().map(|c| unit_shift(setting, profile, *c, &base)).collect::<Result<Vec<_>>>()?;
    Ok((base, d))
}

/// Exact gradient of the expected cost with respect to the listed
/// coefficients.
pub fn cost_gradient(
    setting: &Setting,
    profile: &Profile,
    cost: &QuadraticCostSpec,
    coefs: &[Coefficient],
) -> Result<Vec<f64>> {
    let var = setting.variances();
    let (base, d) = shifts(setting, profile, coefs)?;
    Ok(d.iter()
        .map(|dj| cost.terms.iter().map(|t| 2.0 * t.weight * base.term(&t.combo).cov(&dj.term(&t.combo), &var)).sum())
        .collect())
}

/// Hessian of the expected cost in the listed coefficients. Exact when the
/// profile is jointly affine in them, which holds for any one player's own
/// policy coefficients.
pub fn cost_hessian(
    setting: &Setting,
    profile: &Profile,
    cost: &QuadraticCostSpec,
    coefs: &[Coefficient],
) -> Result<Vec<Vec<f64>>> {
    let var = setting.variances();
    let (_, d) = shifts(setting, profile, coefs)?;
    Ok(d.iter()
        .map(|dj| {
            d.iter()
                .map(|dk| {
                    cost.terms.iter().map(|t| 2.0 * t.weight * dj.term(&t.combo).cov(&dk.term(&t.combo), &var)).sum()
                })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_pn_costs, IncentivePolicy, PnGameSpec};

    fn pn_profile(a0: f64, a: f64, beta: f64, gain: f64) -> Profile {
        Profile::new(
            LeaderPolicy::Incentive(IncentivePolicy {
                base: LinearPolicy::from_pairs([(Channel::LeaderObs, a0), (Channel::PopMeanObs, a)]),
                gain,
                reference: LinearPolicy::single(Channel::PopMeanObs, beta),
                monitored: Monitored::PopMeanAction,
            }),
            None,
            LinearPolicy::single(Channel::OwnObs, beta),
        )
    }

    #[test]
    fn zero_profile_costs_only_the_state() {
        let spec = PnGameSpec::new(2.0, 1.0, 2.0, 1.0, 3).unwrap();
        let (leader, follower) = build_pn_costs(&spec);
        let s = Setting::pn(3);
        let p = pn_profile(0.0, 0.0, 0.0, 0.0);
        assert_eq!(expected_cost(&s, &p, &leader).unwrap(), 1.0);
        assert_eq!(expected_cost(&s, &p, &follower).unwrap(), 1.0);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let spec = PnGameSpec::new(2.0, 1.0, 2.0, 1.0, 4).unwrap();
        let (_, follower) = build_pn_costs(&spec);
        let s = Setting::pn(4);
        let p = pn_profile(0.1, -0.2, -0.4, 1.3).with_deviant(LinearPolicy::single(Channel::OwnObs, 0.7));
        let coef = [Coefficient::Deviant(Channel::OwnObs)];
        let g = cost_gradient(&s, &p, &follower, &coef).unwrap()[0];
        let h = 1e-5;
        let mut up = p.clone();
        coef[0].set(&mut up, 0.7 + h).unwrap();
        let mut dn = p.clone();
        coef[0].set(&mut dn, 0.7 - h).unwrap();
        let fd = (expected_cost(&s, &up, &follower).unwrap() - expected_cost(&s, &dn, &follower).unwrap()) / (2.0 * h);
        assert!((g - fd).abs() < 1e-7, "{g} vs {fd}");
    }

    #[test]
    fn leader_tangent_follows_gain() {
        let s = Setting::pn(5);
        let p = pn_profile(0.0, 0.0, 0.0, 10.0);
        let t = Mover::follower().tangent(&s, &p);
        assert!((t[Slot::LeaderAction.index()] - 2.0).abs() < 1e-15);
        assert_eq!(Mover::leader().tangent(&s, &p)[Slot::PopMeanAction.index()], 0.0);
    }

    #[test]
    fn out_of_information_policy_is_rejected() {
        let s = Setting::pn(2);
        let p = Profile::new(
            LeaderPolicy::Linear(LinearPolicy::zero()),
            None,
            LinearPolicy::single(Channel::LeaderObs, 1.0),
        );
        assert!(matches!(expand(&s, &p), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn flat_cost_is_singular() {
        let s = Setting::pn(2);
        let p = pn_profile(0.0, 0.0, 0.0, 0.0);
        let cost = QuadraticCostSpec::new(vec![crate::model::CostTerm::new(1.0, [(Slot::Omega0, 1.0)])]).unwrap();
        assert!(matches!(stationarity_residual(&s, &p, &cost, Mover::follower()), Err(Error::SingularProblem(_))));
    }
}
