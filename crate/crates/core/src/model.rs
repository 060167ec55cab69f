//! Domain types shared by every solver: game specifications, observation
//! channels, linear and incentive policies, quadratic costs and solved
//! coefficient bundles.
//!
//! Every observation is the common state `omega0` plus independent
//! standard-normal noise. Followers are exchangeable, so the population is
//! described by one symmetric follower policy plus an optional deviating
//! follower (the "own" player when a follower is the one being examined).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{name} must be > 0, got {value}")))
    }
}

fn check_nonnegative(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{name} must be >= 0, got {value}")))
    }
}

fn check_population(n: usize) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(Error::InvalidSpec("n must be >= 1".into()))
    }
}

/// Leader and `n` symmetric followers, all directly incentivized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PnGameSpec {
    pub r0: f64,
    pub q0: f64,
    pub r: f64,
    pub q: f64,
    pub n: usize,
}

impl PnGameSpec {
    pub fn new(r0: f64, q0: f64, r: f64, q: f64, n: usize) -> Result<Self> {
        let spec = Self { r0, q0, r, q, n };
        spec.validate()?;
        Ok(spec)
    }

    /// `q0 = 0` is accepted: the closed forms have a well-defined value there.
    pub fn validate(&self) -> Result<()> {
        check_positive("r0", self.r0)?;
        check_nonnegative("q0", self.q0)?;
        check_positive("r", self.r)?;
        check_positive("q", self.q)?;
        check_population(self.n)
    }

    pub fn with_n(self, n: usize) -> Self {
        Self { n, ..self }
    }
}

/// Leader, one major follower and `n` minor followers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MajGameSpec {
    pub r0: f64,
    pub q0: f64,
    pub qhat0: f64,
    #[serde(rename = "rM")]
    pub r_m: f64,
    #[serde(rename = "qM")]
    pub q_m: f64,
    pub r: f64,
    pub q: f64,
    pub n: usize,
}

impl MajGameSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(r0: f64, q0: f64, qhat0: f64, r_m: f64, q_m: f64, r: f64, q: f64, n: usize) -> Result<Self> {
        let spec = Self { r0, q0, qhat0, r_m, q_m, r, q, n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("r0", self.r0)?;
        check_positive("rM", self.r_m)?;
        check_positive("r", self.r)?;
        check_positive("qM", self.q_m)?;
        check_nonnegative("q0", self.q0)?;
        check_nonnegative("qhat0", self.qhat0)?;
        check_nonnegative("q", self.q)?;
        check_population(self.n)
    }

    pub fn with_n(self, n: usize) -> Self {
        Self { n, ..self }
    }

    /// q0 = qhat0 = q = 1, r0 = r = 2, rM = qM = 1.
    pub fn loss_curve_reference(n: usize) -> Self {
        Self { r0: 2.0, q0: 1.0, qhat0: 1.0, r_m: 1.0, q_m: 1.0, r: 2.0, q: 1.0, n }
    }
}

/// Variant of the major/minor game in which the major and every minor share
/// one observation `y`, minors only care about conformity, and the leader
/// weighs the major's action by `1/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroLossSpec {
    pub r0: f64,
    pub q0: f64,
    #[serde(rename = "rM")]
    pub r_m: f64,
    #[serde(rename = "qM")]
    pub q_m: f64,
    pub n: usize,
}

impl ZeroLossSpec {
    pub fn new(r0: f64, q0: f64, r_m: f64, q_m: f64, n: usize) -> Result<Self> {
        let spec = Self { r0, q0, r_m, q_m, n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("r0", self.r0)?;
        check_nonnegative("q0", self.q0)?;
        check_positive("rM", self.r_m)?;
        check_positive("qM", self.q_m)?;
        check_population(self.n)
    }

    pub fn with_n(self, n: usize) -> Self {
        Self { n, ..self }
    }
}

/// Observation channels, seen from a distinguished follower `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Channel {
    /// `y0`
    LeaderObs,
    /// `yM`
    MajorObs,
    /// `y^i`
    OwnObs,
    /// Arithmetic mean of the followers' observations.
    PopMeanObs,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::LeaderObs, Channel::MajorObs, Channel::OwnObs, Channel::PopMeanObs];

    pub fn symbol(self) -> &'static str {
        match self {
            Channel::LeaderObs => "y0",
            Channel::MajorObs => "yM",
            Channel::OwnObs => "yi",
            Channel::PopMeanObs => "ybar",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Quantities a cost term may combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slot {
    LeaderAction,
    MajorAction,
    OwnAction,
    PopMeanAction,
    Omega0,
}

impl Slot {
    pub const ALL: [Slot; 5] =
        [Slot::LeaderAction, Slot::MajorAction, Slot::OwnAction, Slot::PopMeanAction, Slot::Omega0];

    pub fn index(self) -> usize {
        match self {
            Slot::LeaderAction => 0,
            Slot::MajorAction => 1,
            Slot::OwnAction => 2,
            Slot::PopMeanAction => 3,
            Slot::Omega0 => 4,
        }
    }
}

/// A policy linear in the owner's observation channels. Missing channels
/// have coefficient zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearPolicy {
    pub coeffs: BTreeMap<Channel, f64>,
}

impl LinearPolicy {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (Channel, f64)>>(pairs: I) -> Self {
        let mut coeffs = BTreeMap::new();
        for (c, v) in pairs {
            *coeffs.entry(c).or_insert(0.0) += v;
        }
        Self { coeffs }
    }

    pub fn single(channel: Channel, coeff: f64) -> Self {
        Self::from_pairs([(channel, coeff)])
    }

    pub fn coeff(&self, channel: Channel) -> f64 {
        self.coeffs.get(&channel).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, channel: Channel, value: f64) {
        self.coeffs.insert(channel, value);
    }

    /// Channels carrying a nonzero coefficient.
    pub fn support(&self) -> impl Iterator<Item = Channel> + '_ {
        self.coeffs.iter().filter(|(_, v)| **v != 0.0).map(|(c, _)| *c)
    }

    pub fn evaluate(&self, obs: impl Fn(Channel) -> f64) -> f64 {
        self.coeffs.iter().map(|(c, v)| v * obs(*c)).sum()
    }
}

/// Which follower action the leader's incentive term monitors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Monitored {
    PopMeanAction,
    MajorAction,
}

impl Monitored {
    pub fn slot(self) -> Slot {
        match self {
            Monitored::PopMeanAction => Slot::PopMeanAction,
            Monitored::MajorAction => Slot::MajorAction,
        }
    }
}

/// Affine incentive: `base(obs) + gain * (monitored - reference(obs))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncentivePolicy {
    pub base: LinearPolicy,
    pub gain: f64,
    pub reference: LinearPolicy,
    pub monitored: Monitored,
}

impl IncentivePolicy {
    pub fn realize(&self, obs: impl Fn(Channel) -> f64 + Copy, monitored_action: f64) -> f64 {
        self.base.evaluate(obs) + self.gain * (monitored_action - self.reference.evaluate(obs))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LeaderPolicy {
    Linear(LinearPolicy),
    Incentive(IncentivePolicy),
}

impl LeaderPolicy {
    /// The observation-only part of the policy.
    pub fn base(&self) -> &LinearPolicy {
        match self {
            LeaderPolicy::Linear(p) => p,
            LeaderPolicy::Incentive(p) => &p.base,
        }
    }

    pub fn base_mut(&mut self) -> &mut LinearPolicy {
        match self {
            LeaderPolicy::Linear(p) => p,
            LeaderPolicy::Incentive(p) => &mut p.base,
        }
    }

    pub fn gain(&self) -> f64 {
        match self {
            LeaderPolicy::Linear(_) => 0.0,
            LeaderPolicy::Incentive(p) => p.gain,
        }
    }
}

/// Decision makers, seen from the distinguished follower `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Leader,
    Major,
    /// The distinguished follower `i` (a minor follower in the major game).
    Follower,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Leader => "leader",
            Role::Major => "major",
            Role::Follower => "follower",
        })
    }
}

/// Policy assignment per role. All followers play `followers` except the
/// distinguished follower `i`, who plays `deviant` when it is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub leader: LeaderPolicy,
    pub major: Option<LinearPolicy>,
    pub followers: LinearPolicy,
    pub deviant: Option<LinearPolicy>,
}

impl Profile {
    pub fn new(leader: LeaderPolicy, major: Option<LinearPolicy>, followers: LinearPolicy) -> Self {
        Self { leader, major, followers, deviant: None }
    }

    /// The policy actually used by follower `i`.
    pub fn own_policy(&self) -> &LinearPolicy {
        self.deviant.as_ref().unwrap_or(&self.followers)
    }

    pub fn with_deviant(mut self, deviant: LinearPolicy) -> Self {
        self.deviant = Some(deviant);
        self
    }

    pub fn with_gain(mut self, gain: f64) -> Self {
        if let LeaderPolicy::Incentive(p) = &mut self.leader {
            p.gain = gain;
        }
        self
    }
}

/// One weighted square `weight * (sum_k combo[k] * value_k)^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTerm {
    pub weight: f64,
    pub combo: BTreeMap<Slot, f64>,
}

impl CostTerm {
    pub fn new<I: IntoIterator<Item = (Slot, f64)>>(weight: f64, combo: I) -> Self {
        let mut map = BTreeMap::new();
        for (s, v) in combo {
            *map.entry(s).or_insert(0.0) += v;
        }
        Self { weight, combo: map }
    }

    pub fn coeff(&self, slot: Slot) -> f64 {
        self.combo.get(&slot).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCostSpec {
    pub terms: Vec<CostTerm>,
}

impl QuadraticCostSpec {
    /// Builds a cost, dropping terms whose weight is exactly zero.
    pub fn new(terms: Vec<CostTerm>) -> Result<Self> {
        for t in &terms {
            if !(t.weight.is_finite() && t.weight >= 0.0) {
                return Err(Error::InvalidSpec(format!("cost weight must be >= 0, got {}", t.weight)));
            }
        }
        Ok(Self { terms: terms.into_iter().filter(|t| t.weight != 0.0).collect() })
    }

    /// Realized cost for concrete slot values.
    pub fn evaluate(&self, value: impl Fn(Slot) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let s: f64 = t.combo.iter().map(|(slot, c)| c * value(*slot)).sum();
                t.weight * s * s
            })
            .sum()
    }

    pub fn uses(&self, slot: Slot) -> bool {
        self.terms.iter().any(|t| t.coeff(slot) != 0.0)
    }
}

/// Leader cost `r0 u0^2 + q0 (u0 + omega0 + ubar)^2` and follower cost
/// `r ui^2 + q (ui + u0 + omega0 + ubar)^2`.
pub fn build_pn_costs(spec: &PnGameSpec) -> (QuadraticCostSpec, QuadraticCostSpec) {
    use Slot::*;
    let leader = QuadraticCostSpec::new(vec![
        CostTerm::new(spec.r0, [(LeaderAction, 1.0)]),
        CostTerm::new(spec.q0, [(LeaderAction, 1.0), (Omega0, 1.0), (PopMeanAction, 1.0)]),
    ])
    .expect("validated weights");
    let follower = QuadraticCostSpec::new(vec![
        CostTerm::new(spec.r, [(OwnAction, 1.0)]),
        CostTerm::new(spec.q, [(OwnAction, 1.0), (LeaderAction, 1.0), (Omega0, 1.0), (PopMeanAction, 1.0)]),
    ])
    .expect("validated weights");
    (leader, follower)
}

/// Costs of the leader, the major follower and a minor follower.
#[derive(Debug, Clone, PartialEq)]
pub struct MajCosts {
    pub leader: QuadraticCostSpec,
    pub major: QuadraticCostSpec,
    pub minor: QuadraticCostSpec,
}

pub fn build_maj_costs(spec: &MajGameSpec) -> MajCosts {
    use Slot::*;
    let aggregate = [(LeaderAction, 1.0), (MajorAction, 1.0), (PopMeanAction, 1.0), (Omega0, 1.0)];
    let leader = QuadraticCostSpec::new(vec![
        CostTerm::new(spec.r0, [(LeaderAction, 1.0)]),
        CostTerm::new(spec.q0, aggregate),
        CostTerm::new(spec.qhat0, [(LeaderAction, 1.0), (MajorAction, 1.0)]),
    ])
    .expect("validated weights");
    let major =
        QuadraticCostSpec::new(vec![CostTerm::new(spec.r_m, [(MajorAction, 1.0)]), CostTerm::new(spec.q_m, aggregate)])
            .expect("validated weights");
    let minor = QuadraticCostSpec::new(vec![
        CostTerm::new(spec.r, [(OwnAction, 1.0)]),
        CostTerm::new(spec.q, [(OwnAction, 1.0), (MajorAction, 1.0), (PopMeanAction, 1.0), (Omega0, 1.0)]),
    ])
    .expect("validated weights");
    MajCosts { leader, major, minor }
}

/// Costs of the shared-observation variant: the leader sees the major only
/// through `uM / n`, minors minimize `(ui - ubar)^2 + (ui - uM)^2`.
pub fn build_zero_loss_costs(spec: &ZeroLossSpec) -> MajCosts {
    use Slot::*;
    let n = spec.n as f64;
    let leader = QuadraticCostSpec::new(vec![
        CostTerm::new(spec.r0, [(LeaderAction, 1.0)]),
        CostTerm::new(spec.q0, [(LeaderAction, 1.0), (MajorAction, 1.0 / n), (PopMeanAction, 1.0), (Omega0, 1.0)]),
    ])
    .expect("validated weights");
    let major = QuadraticCostSpec::new(vec![
        CostTerm::new(spec.r_m, [(MajorAction, 1.0)]),
        CostTerm::new(spec.q_m, [(LeaderAction, 1.0), (MajorAction, 1.0), (PopMeanAction, 1.0), (Omega0, 1.0)]),
    ])
    .expect("validated weights");
    let minor = QuadraticCostSpec::new(vec![
        CostTerm::new(1.0, [(OwnAction, 1.0), (PopMeanAction, -1.0)]),
        CostTerm::new(1.0, [(OwnAction, 1.0), (MajorAction, -1.0)]),
    ])
    .expect("validated weights");
    MajCosts { leader, major, minor }
}

/// Solved coefficients with their stationarity diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub params: BTreeMap<String, f64>,
    pub residuals: BTreeMap<String, f64>,
    pub n: usize,
}

impl EquilibriumSolution {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pn_leader_cost_terms() {
        let spec = PnGameSpec::new(2.0, 1.0, 2.0, 1.0, 5).unwrap();
        let (leader, _) = build_pn_costs(&spec);
        assert_eq!(leader.terms.len(), 2);
        assert_eq!(leader.terms[0], CostTerm::new(2.0, [(Slot::LeaderAction, 1.0)]));
        assert_eq!(
            leader.terms[1],
            CostTerm::new(1.0, [(Slot::LeaderAction, 1.0), (Slot::Omega0, 1.0), (Slot::PopMeanAction, 1.0)])
        );
    }

    #[test]
    fn zero_q0_drops_tracking_term() {
        let spec = PnGameSpec::new(2.0, 0.0, 2.0, 1.0, 5).unwrap();
        let (leader, _) = build_pn_costs(&spec);
        assert_eq!(leader.terms, vec![CostTerm::new(2.0, [(Slot::LeaderAction, 1.0)])]);
    }

    #[test]
    fn follower_cost_vanishes_at_origin() {
        let spec = PnGameSpec::new(2.0, 1.0, 2.0, 1.0, 5).unwrap();
        let (_, follower) = build_pn_costs(&spec);
        assert_eq!(follower.evaluate(|_| 0.0), 0.0);
    }

    #[test]
    fn major_cost_terms() {
        let spec = MajGameSpec::new(2.0, 1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3).unwrap();
        let costs = build_maj_costs(&spec);
        assert_eq!(costs.major.terms.len(), 2);
        assert_eq!(costs.major.terms[0], CostTerm::new(1.0, [(Slot::MajorAction, 1.0)]));
        assert_eq!(
            costs.major.terms[1],
            CostTerm::new(
                1.0,
                [(Slot::LeaderAction, 1.0), (Slot::MajorAction, 1.0), (Slot::PopMeanAction, 1.0), (Slot::Omega0, 1.0)]
            )
        );
        assert_eq!(costs.leader.terms.len(), 3);
    }

    #[test]
    fn zero_qhat0_leaves_two_leader_terms() {
        let spec = MajGameSpec::new(2.0, 1.0, 0.0, 1.0, 1.0, 2.0, 1.0, 3).unwrap();
        assert_eq!(build_maj_costs(&spec).leader.terms.len(), 2);
    }

    #[test]
    fn zero_loss_minor_cost_is_conformity() {
        let spec = ZeroLossSpec::new(2.0, 1.0, 1.0, 1.0, 4).unwrap();
        let minor = build_zero_loss_costs(&spec).minor;
        let v = minor.evaluate(|s| match s {
            Slot::OwnAction => 3.0,
            Slot::PopMeanAction => 1.0,
            Slot::MajorAction => 2.0,
            _ => 100.0,
        });
        assert_eq!(v, 4.0 + 1.0);
    }

    #[test]
    fn spec_validation() {
        assert!(PnGameSpec::new(0.0, 1.0, 1.0, 1.0, 1).is_err());
        assert!(PnGameSpec::new(1.0, 1.0, 1.0, 1.0, 0).is_err());
        assert!(PnGameSpec::new(1.0, -1.0, 1.0, 1.0, 1).is_err());
        assert!(MajGameSpec::new(1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1).is_err());
        assert!(MajGameSpec::new(1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1).is_ok());
    }

    #[test]
    fn spec_json_keys() {
        let spec = MajGameSpec::loss_curve_reference(7);
        let json = serde_json::to_value(spec).unwrap();
        for key in ["r0", "q0", "qhat0", "r", "q", "rM", "qM", "n"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        let back: MajGameSpec = serde_json::from_value(json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn incentive_with_zero_gain_is_base() {
        let p = IncentivePolicy {
            base: LinearPolicy::from_pairs([(Channel::LeaderObs, 0.3), (Channel::MajorObs, -1.2)]),
            gain: 0.0,
            reference: LinearPolicy::single(Channel::MajorObs, 5.0),
            monitored: Monitored::MajorAction,
        };
        let obs = |c: Channel| match c {
            Channel::LeaderObs => 1.5,
            Channel::MajorObs => -0.5,
            _ => 0.0,
        };
        assert_eq!(p.realize(obs, 42.0), p.base.evaluate(obs));
    }
}
