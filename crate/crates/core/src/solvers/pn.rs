//! The game with one leader and `n` followers who are all directly
//! incentivized.
//!
//! The leader-optimal (team) profile is linear: the leader plays
//! `alpha0 y0 + alpha ybar` and each follower plays `beta y^i`. The leader
//! enforces it with the incentive
//! `u0 = alpha0 y0 + alpha ybar + Q (ubar - beta ybar)`, and `Q` grows
//! linearly in `n`, so the incentive's energy `Q^2` is unbounded.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::growth::{fit_growth, validate_grid, GrowthFit};
use crate::error::{Error, Result};
use crate::gaussian::{
    residual_vector, solve_linear_policies, Assembled, Coefficient, Condition, Mover, Setting, Unknown,
};
use crate::model::{
    build_pn_costs, Channel, EquilibriumSolution, IncentivePolicy, LeaderPolicy, LinearPolicy, Monitored, PnGameSpec,
    Profile,
};

/// Gains whose defining denominator falls below this are degenerate.
pub const GAIN_DENOMINATOR_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PnSolution {
    pub alpha0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gain: Option<f64>,
    pub energy: Option<f64>,
    pub n: usize,
}

/// Team-optimal coefficients.
pub fn pn_leader_optimal(spec: &PnGameSpec) -> Result<PnSolution> {
    spec.validate()?;
    let PnGameSpec { r0, q0, n, .. } = *spec;
    let nf = n as f64;
    let alpha0 = -q0 / ((r0 + q0) * (nf + 2.0));
    let beta = -(nf * (1.0 + alpha0) * (r0 + q0) / (nf + 1.0) - nf * q0 / (nf + 2.0)) / r0;
    let alpha = -(q0 / (r0 + q0)) * (beta + nf / (nf + 2.0));
    Ok(PnSolution { alpha0, alpha, beta, gain: None, energy: None, n })
}

/// Incentive gain that makes `beta` every follower's best response.
pub fn pn_gain(spec: &PnGameSpec, sol: &PnSolution) -> Result<f64> {
    let PnGameSpec { r, q, .. } = *spec;
    let nf = sol.n as f64;
    let t = 0.5 * (1.0 + sol.alpha0) + (nf + 1.0) / (2.0 * nf) * sol.alpha + (3.0 * nf + 1.0) / (2.0 * nf) * sol.beta;
    let qt = q * t;
    if qt.abs() < GAIN_DENOMINATOR_TOLERANCE {
        return Err(Error::DegenerateGain(format!(
            "followers' conditional aggregate vanishes (q*T = {qt:e}); the incentive cannot steer them"
        )));
    }
    Ok(-(nf * (r * sol.beta + qt) + qt) / qt)
}

/// Team-optimal coefficients together with the gain and its energy.
pub fn pn_solve(spec: &PnGameSpec) -> Result<PnSolution> {
    let mut sol = pn_leader_optimal(spec)?;
    let gain = pn_gain(spec, &sol)?;
    sol.gain = Some(gain);
    sol.energy = Some(gain * gain);
    Ok(sol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PnLimits {
    pub alpha0_inf: f64,
    pub beta_inf: f64,
    pub alpha_inf: f64,
}

/// Infinite-population limit of the team-optimal coefficients. No gain is
/// reported because none with finite energy exists.
pub fn pn_limits(spec: &PnGameSpec) -> Result<PnLimits> {
    spec.validate()?;
    let PnGameSpec { r0, q0, .. } = *spec;
    let alpha0_inf = 0.0;
    let beta_inf = -((1.0 + alpha0_inf) * (r0 + q0) - q0) / r0;
    let alpha_inf = -(q0 / (r0 + q0)) * (beta_inf + 1.0);
    Ok(PnLimits { alpha0_inf, beta_inf, alpha_inf })
}

/// The incentive profile, with the given gain (use 0 for the plain team
/// profile).
pub fn pn_profile(sol: &PnSolution, gain: f64) -> Profile {
    Profile::new(
        LeaderPolicy::Incentive(IncentivePolicy {
            base: LinearPolicy::from_pairs([(Channel::LeaderObs, sol.alpha0), (Channel::PopMeanObs, sol.alpha)]),
            gain,
            reference: LinearPolicy::single(Channel::PopMeanObs, sol.beta),
            monitored: Monitored::PopMeanAction,
        }),
        None,
        LinearPolicy::single(Channel::OwnObs, sol.beta),
    )
}

fn team_conditions(spec: &PnGameSpec) -> Vec<Condition> {
    let (leader, _) = build_pn_costs(spec);
    vec![
        Condition::new("leader", leader.clone(), Mover::leader()),
        Condition::new("team_follower", leader, Mover::follower()),
    ]
}

/// Team optimum found by the generic stationarity assembler, independent of
/// the closed forms.
pub fn pn_assembled(spec: &PnGameSpec) -> Result<Assembled> {
    spec.validate()?;
    let start = Profile::new(LeaderPolicy::Linear(LinearPolicy::zero()), None, LinearPolicy::zero());
    let unknowns = [
        Unknown::new("alpha0", Coefficient::Leader(Channel::LeaderObs)),
        Unknown::new("alpha", Coefficient::Leader(Channel::PopMeanObs)),
        Unknown::new("beta", Coefficient::Followers(Channel::OwnObs)),
    ];
    solve_linear_policies(&Setting::pn(spec.n), &start, &unknowns, &team_conditions(spec))
}

/// Stationarity residuals: the team conditions at the base profile and
/// each follower's own condition under the incentive.
pub fn pn_residuals(spec: &PnGameSpec, sol: &PnSolution) -> Result<BTreeMap<String, f64>> {
    let setting = Setting::pn(sol.n);
    let mut out: BTreeMap<String, f64> =
        residual_vector(&setting, &pn_profile(sol, 0.0), &team_conditions(spec))?.into_iter().collect();
    if let Some(gain) = sol.gain {
        let (_, follower) = build_pn_costs(spec);
        let cond = [Condition::new("follower", follower, Mover::follower())];
        out.extend(residual_vector(&setting, &pn_profile(sol, gain), &cond)?);
    }
    Ok(out)
}

impl PnSolution {
    pub fn to_equilibrium(&self, spec: &PnGameSpec) -> Result<EquilibriumSolution> {
        let mut params = BTreeMap::from([
            ("alpha0".to_string(), self.alpha0),
            ("alpha".to_string(), self.alpha),
            ("beta".to_string(), self.beta),
        ]);
        if let (Some(g), Some(e)) = (self.gain, self.energy) {
            params.insert("gain".into(), g);
            params.insert("energy".into(), e);
        }
        Ok(EquilibriumSolution { params, residuals: pn_residuals(spec, self)?, n: self.n })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub solutions: Vec<PnSolution>,
    pub fit: GrowthFit,
    /// `|Q_N| / N` at the largest grid point.
    pub gain_per_follower: f64,
    /// First grid point from which `|Q|` increases strictly along the grid.
    pub monotone_from: Option<usize>,
}

impl DivergenceReport {
    /// Smallest population at which the energy is guaranteed to pass
    /// `threshold`, extrapolating `|Q_N| ~ k N` with the fitted `k`.
    pub fn population_for_energy(&self, threshold: f64) -> usize {
        (threshold.sqrt() / self.gain_per_follower).ceil() as usize
    }
}

/// Gains and energies over a population grid with a log-log growth fit.
pub fn pn_divergence_report(spec: &PnGameSpec, grid: &[usize]) -> Result<DivergenceReport> {
    validate_grid(grid)?;
    let solutions = grid.par_iter().map(|&n| pn_solve(&spec.with_n(n))).collect::<Result<Vec<_>>>()?;
    let gains: Vec<(usize, f64)> = solutions.iter().map(|s| (s.n, s.gain.expect("solved with gain"))).collect();
    let fit = fit_growth(&gains)?;
    let (last_n, last_q) = *gains.last().expect("non-empty grid");
    let mut monotone_from = Some(grid[0]);
    for w in gains.windows(2) {
        if w[1].1.abs() <= w[0].1.abs() {
            monotone_from = None;
        } else if monotone_from.is_none() {
            monotone_from = Some(w[0].0);
        }
    }
    Ok(DivergenceReport { solutions, fit, gain_per_follower: last_q.abs() / last_n as f64, monotone_from })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::growth::GrowthVerdict;

    fn reference(n: usize) -> PnGameSpec {
        PnGameSpec::new(2.0, 1.0, 2.0, 1.0, n).unwrap()
    }

    #[test]
    fn two_followers() {
        let s = pn_leader_optimal(&reference(2)).unwrap();
        assert!((s.alpha0 + 1.0 / 12.0).abs() < 1e-15);
        assert!((s.beta + 2.0 / 3.0).abs() < 1e-15);
        assert!((s.alpha - 1.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn no_leader_tracking() {
        let spec = PnGameSpec::new(2.0, 0.0, 2.0, 1.0, 4).unwrap();
        let s = pn_leader_optimal(&spec).unwrap();
        assert_eq!(s.alpha0, 0.0);
        assert_eq!(s.alpha, 0.0);
        assert!((s.beta + 0.8).abs() < 1e-15);
        let lim = pn_limits(&spec).unwrap();
        assert_eq!((lim.alpha0_inf, lim.beta_inf, lim.alpha_inf), (0.0, -1.0, 0.0));
    }

    #[test]
    fn gain_makes_followers_stationary() {
        for n in [1, 2, 7, 100] {
            let spec = reference(n);
            let sol = pn_solve(&spec).unwrap();
            let res = pn_residuals(&spec, &sol).unwrap();
            assert!(res.values().all(|v| v.abs() < 1e-10), "{n}: {res:?}");
            assert_eq!(sol.energy.unwrap(), sol.gain.unwrap().powi(2));
        }
    }

    #[test]
    fn assembler_agrees() {
        let spec = PnGameSpec::new(1.3, 0.7, 0.4, 2.2, 9).unwrap();
        let a = pn_assembled(&spec).unwrap();
        let s = pn_leader_optimal(&spec).unwrap();
        assert!((a.value("alpha0").unwrap() - s.alpha0).abs() < 1e-12);
        assert!((a.value("alpha").unwrap() - s.alpha).abs() < 1e-12);
        assert!((a.value("beta").unwrap() - s.beta).abs() < 1e-12);
    }

    #[test]
    fn large_population_approaches_limit() {
        let spec = reference(1_000_000);
        let s = pn_leader_optimal(&spec).unwrap();
        let l = pn_limits(&spec).unwrap();
        assert!((s.alpha0 - l.alpha0_inf).abs() < 1e-5);
        assert!((s.beta - l.beta_inf).abs() < 1e-5);
        assert!((s.alpha - l.alpha_inf).abs() < 1e-5);
    }

    #[test]
    fn divergence() {
        let r = pn_divergence_report(&reference(1), &[10, 100, 1000, 10000]).unwrap();
        assert_eq!(r.fit.verdict, GrowthVerdict::Divergent);
        assert!((r.fit.slope - 1.0).abs() < 0.02);
        assert!((r.gain_per_follower - 3.0).abs() < 0.03);
        assert_eq!(r.monotone_from, Some(10));
        assert!(pn_divergence_report(&reference(1), &[10, 100]).is_err());
    }
}
