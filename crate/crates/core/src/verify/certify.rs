//! Exact certification of incentive equilibria.
//!
//! Within linear policies a player's expected cost is a quadratic in her own
//! coefficients, so the best deviation is one small linear solve away. The
//! leader's side compares her realized cost with the optimum recomputed by the
//! generic assembler rather than with the solution under test.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::mc::{mc_expected_cost, Estimate, MonteCarloConfig};
use crate::error::{Error, Result};
use crate::gaussian::{
    cost_gradient, cost_hessian, curvature, expand, expected_cost, stationarity_residual, Coefficient, Mover, Setting,
    Source, SourceVector,
};
use crate::linalg;
use crate::model::{
    build_maj_costs, build_pn_costs, build_zero_loss_costs, MajGameSpec, PnGameSpec, Profile, QuadraticCostSpec, Role,
    Slot, ZeroLossSpec,
};
use crate::solvers::major::{maj_assembled_leader_major, maj_profile, MajSolution};
use crate::solvers::pn::{pn_assembled, pn_profile, PnSolution};
use crate::solvers::zero_loss::{zero_loss_profile, zero_loss_team_optimum, ZeroLossSolution};

/// Absolute tolerance of every exact check.
pub const EXACT_TOLERANCE: f64 = 1e-10;
/// Monte Carlo agreement band, in standard errors.
pub const MC_SIGMAS: f64 = 4.0;
/// Smallest response of a residual to the gain that still lets the gain
/// steer the monitored player.
pub const GAIN_INFLUENCE_MARGIN: f64 = 1e-8;
/// Realizations drawn for the pointwise deviation check.
pub const POINTWISE_REALIZATIONS: usize = 1_000;

fn own_coefficients(setting: &Setting, role: Role) -> Vec<Coefficient> {
    let channels = setting.info_set(role);
    match role {
        Role::Leader => channels.iter().map(|c| Coefficient::Leader(*c)).collect(),
        Role::Major => channels.iter().map(|c| Coefficient::Major(*c)).collect(),
        Role::Follower => channels.iter().map(|c| Coefficient::Deviant(*c)).collect(),
    }
}

/// Largest cost reduction the player can reach by changing her own linear
/// policy with everyone else held fixed. A follower deviates alone.
pub fn best_response_improvement(
    setting: &Setting,
    profile: &Profile,
    cost: &QuadraticCostSpec,
    role: Role,
) -> Result<f64> {
    let coefs = own_coefficients(setting, role);
    let g = cost_gradient(setting, profile, cost, &coefs)?;
    let h = cost_hessian(setting, profile, cost, &coefs)?;
    if !linalg::is_positive_definite(&h) {
        return Err(Error::SingularProblem(format!("{role} cost is not strictly convex in its own policy")));
    }
    let step = linalg::solve(&h, &g, "best-response system")?.x;
    let improvement = 0.5 * g.iter().zip(&step).map(|(a, b)| a * b).sum::<f64>();
    Ok(improvement.max(0.0))
}

/// Largest pointwise gain over sampled information realizations: for each
/// draw, how much the player could save by changing only that action.
pub fn pointwise_improvement(
    setting: &Setting,
    profile: &Profile,
    cost: &QuadraticCostSpec,
    mover: Mover,
    realizations: usize,
    seed: u64,
) -> Result<f64> {
    let residual = stationarity_residual(setting, profile, cost, mover)?;
    let k = curvature(setting, profile, cost, mover);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..realizations {
        let mut x = [0.0; crate::gaussian::SOURCE_COUNT];
        let var = setting.variances();
        for s in Source::ALL {
            let z: f64 = StandardNormal.sample(&mut rng);
            x[s.index()] = z * var[s.index()].sqrt();
        }
        let value = |v: SourceVector| v.0.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        let g: f64 = residual.channels.iter().zip(&residual.coeffs).map(|(c, a)| a * value(setting.channel(*c))).sum();
        worst = worst.max(g * g / (2.0 * k));
    }
    Ok(worst)
}

/// How strongly the gain moves a player's first-order condition: the change
/// in her residual form per unit of gain.
pub fn gain_influence(setting: &Setting, profile: &Profile, cost: &QuadraticCostSpec, mover: Mover) -> Result<f64> {
    let base = stationarity_residual(setting, profile, cost, mover)?;
    let bumped = profile.clone().with_gain(profile.leader.gain() + 1.0);
    let moved = stationarity_residual(setting, &bumped, cost, mover)?;
    Ok(base.coeffs.iter().zip(&moved.coeffs).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Epsilons {
    /// Allowed leader shortfall against her optimum.
    pub leader: f64,
    /// Allowed follower (and major) improvement.
    pub follower: f64,
}

impl Epsilons {
    pub const ZERO: Epsilons = Epsilons { leader: 0.0, follower: 0.0 };
}

/// A solved game handed to the certifier.
#[derive(Debug, Clone, Copy)]
pub enum Certifiable<'a> {
    Pn(&'a PnGameSpec, &'a PnSolution),
    Major(&'a MajGameSpec, &'a MajSolution),
    ZeroLoss(&'a ZeroLossSpec, &'a ZeroLossSolution),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub epsilon_stackelberg: bool,
    pub epsilon_leader_optimal: bool,
    pub on_path_consistent: bool,
    pub epsilon_incentive: bool,
    pub convention: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo_consistent: Option<bool>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub epsilon_leader: f64,
    pub epsilon_follower: f64,
    pub exact: f64,
    pub monte_carlo_sigmas: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloCheck {
    pub samples: usize,
    pub batches: usize,
    pub exact: f64,
    #[serde(flatten)]
    pub estimate: Estimate,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificationReport {
    pub verdict: Verdict,
    pub per_player_improvement: BTreeMap<String, f64>,
    pub pointwise_improvement: BTreeMap<String, f64>,
    pub gain_influence: f64,
    pub gain_nondegenerate: bool,
    pub leader_cost: f64,
    pub leader_optimum: f64,
    pub leader_gap: f64,
    pub tolerances: Tolerances,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloCheck>,
}

struct Case {
    setting: Setting,
    profile: Profile,
    leader_cost: QuadraticCostSpec,
    leader_optimum: f64,
    players: Vec<(&'static str, Role, Mover, QuadraticCostSpec)>,
    monitored: Mover,
    monitored_cost: QuadraticCostSpec,
}

fn mismatch(spec_n: usize, sol_n: Option<usize>) -> Result<()> {
    match sol_n {
        Some(n) if n == spec_n => Ok(()),
        Some(n) => Err(Error::ContractViolation(format!("solution is for n = {n} but the game has n = {spec_n}"))),
        None => Err(Error::ContractViolation("solution is a mean-field limit, not a finite game".into())),
    }
}

fn build_case(game: Certifiable<'_>) -> Result<Case> {
    match game {
        Certifiable::Pn(spec, sol) => {
            mismatch(spec.n, Some(sol.n))?;
            let gain = sol.gain.ok_or_else(|| Error::ContractViolation("solution carries no incentive gain".into()))?;
            let setting = Setting::pn(spec.n);
            let (leader, follower) = build_pn_costs(spec);
            let team = pn_assembled(spec)?;
            let leader_optimum = expected_cost(&setting, &team.profile, &leader)?;
            Ok(Case {
                setting,
                profile: pn_profile(sol, gain),
                leader_cost: leader,
                leader_optimum,
                players: vec![("follower", Role::Follower, Mover::follower(), follower.clone())],
                monitored: Mover::follower(),
                monitored_cost: follower,
            })
        }
        Certifiable::Major(spec, sol) => {
            mismatch(spec.n, sol.population.finite())?;
            let gain = sol.gain.ok_or_else(|| Error::ContractViolation("solution carries no incentive gain".into()))?;
            let setting = Setting::major(spec.n);
            let costs = build_maj_costs(spec);
            let optimum = maj_assembled_leader_major(spec)?;
            let leader_optimum = expected_cost(&setting, &optimum.profile, &costs.leader)?;
            Ok(Case {
                setting,
                profile: maj_profile(sol, gain),
                leader_cost: costs.leader,
                leader_optimum,
                players: vec![
                    ("major", Role::Major, Mover::major(), costs.major.clone()),
                    ("minor", Role::Follower, Mover::follower(), costs.minor),
                ],
                monitored: Mover::major(),
                monitored_cost: costs.major,
            })
        }
        Certifiable::ZeroLoss(spec, sol) => {
            mismatch(spec.n, Some(sol.n))?;
            let gain = sol.gain.ok_or_else(|| Error::ContractViolation("solution carries no incentive gain".into()))?;
            let setting = Setting::shared_major(spec.n);
            let costs = build_zero_loss_costs(spec);
            let team = zero_loss_team_optimum(spec)?;
            let leader_optimum = expected_cost(&setting, &team.profile, &costs.leader)?;
            Ok(Case {
                setting,
                profile: zero_loss_profile(sol, gain),
                leader_cost: costs.leader,
                leader_optimum,
                players: vec![
                    ("major", Role::Major, Mover::major(), costs.major.clone()),
                    ("minor", Role::Follower, Mover::follower(), costs.minor),
                ],
                monitored: Mover::major(),
                monitored_cost: costs.major,
            })
        }
    }
}

/// Optional knobs for [`certify_incentive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub seed: u64,
    /// Overrides the solution's gain, e.g. with zero to show the incentive
    /// is what holds the followers in place.
    pub gain_override: Option<f64>,
    pub monte_carlo: Option<MonteCarloConfig>,
}

impl CertifyOptions {
    pub fn new(seed: u64) -> Self {
        Self { seed, gain_override: None, monte_carlo: None }
    }
}

/// Checks that the solution is an epsilon-incentive equilibrium: no follower
/// gains more than `eps.follower` by deviating, the leader's realized cost is
/// within `eps.leader` of her optimum, and the incentive is silent on path.
pub fn certify_incentive(game: Certifiable<'_>, eps: Epsilons, opts: CertifyOptions) -> Result<CertificationReport> {
    if !(eps.leader >= 0.0 && eps.follower >= 0.0) {
        return Err(Error::InvalidArgument("epsilons must be nonnegative".into()));
    }
    let mut case = build_case(game)?;
    if let Some(g) = opts.gain_override {
        case.profile = case.profile.with_gain(g);
    }
    let Case { setting, profile, .. } = &case;

    let mut per_player = BTreeMap::new();
    let mut pointwise = BTreeMap::new();
    for (k, (name, role, mover, cost)) in case.players.iter().enumerate() {
        per_player.insert(name.to_string(), best_response_improvement(setting, profile, cost, *role)?);
        let seed = opts.seed.wrapping_add(k as u64);
        pointwise.insert(
            name.to_string(),
            pointwise_improvement(setting, profile, cost, *mover, POINTWISE_REALIZATIONS, seed)?,
        );
    }
    let influence = gain_influence(setting, profile, &case.monitored_cost, case.monitored)?;

    let leader_cost = expected_cost(setting, profile, &case.leader_cost)?;
    let leader_gap = leader_cost - case.leader_optimum;

    let with_gain = expand(setting, profile)?.slot(Slot::LeaderAction);
    let without = expand(setting, &profile.clone().with_gain(0.0))?.slot(Slot::LeaderAction);
    let on_path_consistent = (with_gain - without).max_abs() <= EXACT_TOLERANCE;

    let epsilon_stackelberg =
        per_player.values().chain(pointwise.values()).all(|v| *v <= eps.follower + EXACT_TOLERANCE);
    let epsilon_leader_optimal = leader_gap <= eps.leader + EXACT_TOLERANCE;
    let epsilon_incentive = epsilon_stackelberg && epsilon_leader_optimal && on_path_consistent;

    let monte_carlo = match opts.monte_carlo {
        Some(cfg) => {
            let estimate = mc_expected_cost(setting, profile, &case.leader_cost, &cfg)?;
            Some(MonteCarloCheck {
                samples: cfg.samples,
                batches: cfg.batches,
                exact: leader_cost,
                estimate,
                z: estimate.z_score(leader_cost),
            })
        }
        None => None,
    };
    let monte_carlo_consistent = monte_carlo.as_ref().map(|m| m.z <= MC_SIGMAS);
    let pass = epsilon_incentive && monte_carlo_consistent.unwrap_or(true);

    Ok(CertificationReport {
        verdict: Verdict {
            epsilon_stackelberg,
            epsilon_leader_optimal,
            on_path_consistent,
            epsilon_incentive,
            convention: "optimistic",
            monte_carlo_consistent,
            pass,
        },
        per_player_improvement: per_player,
        pointwise_improvement: pointwise,
        gain_influence: influence,
        gain_nondegenerate: influence > GAIN_INFLUENCE_MARGIN,
        leader_cost,
        leader_optimum: case.leader_optimum,
        leader_gap,
        tolerances: Tolerances {
            epsilon_leader: eps.leader,
            epsilon_follower: eps.follower,
            exact: EXACT_TOLERANCE,
            monte_carlo_sigmas: MC_SIGMAS,
        },
        seed: opts.seed,
        monte_carlo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Channel, LinearPolicy};
    use crate::solvers::major::maj_solve;
    use crate::solvers::pn::pn_solve;

    #[test]
    fn pn_passes_and_zero_gain_fails() {
        let spec = PnGameSpec::new(2.0, 1.0, 2.0, 1.0, 5).unwrap();
        let sol = pn_solve(&spec).unwrap();
        let ok = certify_incentive(Certifiable::Pn(&spec, &sol), Epsilons::ZERO, CertifyOptions::new(1)).unwrap();
        assert!(ok.verdict.pass, "{ok:?}");
        assert!(ok.gain_nondegenerate);
        let opts = CertifyOptions { gain_override: Some(0.0), ..CertifyOptions::new(1) };
        let bad = certify_incentive(Certifiable::Pn(&spec, &sol), Epsilons::ZERO, opts).unwrap();
        assert!(!bad.verdict.epsilon_stackelberg);
        assert!(bad.per_player_improvement["follower"] > 1e-6);
    }

    #[test]
    fn major_passes() {
        let spec = MajGameSpec::loss_curve_reference(5);
        let sol = maj_solve(&spec).unwrap();
        let r = certify_incentive(Certifiable::Major(&spec, &sol), Epsilons::ZERO, CertifyOptions::new(2)).unwrap();
        assert!(r.verdict.pass, "{r:?}");
    }

    #[test]
    fn mismatched_population() {
        let spec = PnGameSpec::new(2.0, 1.0, 2.0, 1.0, 5).unwrap();
        let sol = pn_solve(&spec.with_n(6)).unwrap();
        assert!(matches!(
            certify_incentive(Certifiable::Pn(&spec, &sol), Epsilons::ZERO, CertifyOptions::new(0)),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn perturbed_follower_improves() {
        let spec = PnGameSpec::new(2.0, 1.0, 2.0, 1.0, 5).unwrap();
        let sol = pn_solve(&spec).unwrap();
        let (_, follower) = build_pn_costs(&spec);
        let s = Setting::pn(5);
        let p = pn_profile(&sol, sol.gain.unwrap());
        assert!(best_response_improvement(&s, &p, &follower, Role::Follower).unwrap() < 1e-10);
        let moved = p.with_deviant(LinearPolicy::single(Channel::OwnObs, sol.beta + 0.1));
        assert!(best_response_improvement(&s, &moved, &follower, Role::Follower).unwrap() > 1e-4);
    }
}
