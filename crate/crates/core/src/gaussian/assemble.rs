use super::expand::{expand, stationarity_residual, Coefficient, Mover};
use super::Setting;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{Channel, Profile, QuadraticCostSpec, Slot};

/// Residuals below this are treated as exact stationarity.
pub const ZERO_RESIDUAL: f64 = 1e-9;

/// One scalar unknown, possibly shared by several coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Unknown {
    pub name: String,
    pub targets: Vec<Coefficient>,
}

impl Unknown {
    pub fn new(name: impl Into<String>, target: Coefficient) -> Self {
        Self { name: name.into(), targets: vec![target] }
    }

    pub fn tied(name: impl Into<String>, targets: Vec<Coefficient>) -> Self {
        Self { name: name.into(), targets }
    }

    fn assign(&self, profile: &mut Profile, value: f64) -> Result<()> {
        self.targets.iter().try_for_each(|t| t.set(profile, value))
    }
}

/// A first-order condition: `mover` minimizes `cost`.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub label: String,
    pub cost: QuadraticCostSpec,
    pub mover: Mover,
}

impl Condition {
    pub fn new(label: impl Into<String>, cost: QuadraticCostSpec, mover: Mover) -> Self {
        Self { label: label.into(), cost, mover }
    }
}

/// Stacked residuals of every condition, labelled `label[channel]`.
pub fn residual_vector(setting: &Setting, profile: &Profile, conditions: &[Condition]) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for cond in conditions {
        let r = stationarity_residual(setting, profile, &cond.cost, cond.mover)?;
        for (c, v) in r.channels.iter().zip(r.coeffs) {
            out.push((format!("{}[{}]", cond.label, c), v));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assembled {
    pub profile: Profile,
    pub values: Vec<(String, f64)>,
    pub residuals: Vec<(String, f64)>,
    pub condition_number: f64,
}

impl Assembled {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, (_, v)| m.max(v.abs()))
    }
}

/// Solves jointly for the unknowns so that every condition holds.
///
/// Residuals are affine in the unknowns whenever no unknown multiplies
/// another, so the system is built column by column from unit probes and the
/// result is checked afterwards. A system that is not affine fails the check
/// with [`Error::ContractViolation`].
pub fn solve_linear_policies(
    setting: &Setting,
    start: &Profile,
    unknowns: &[Unknown],
    conditions: &[Condition],
) -> Result<Assembled> {
    let eval = |x: &[f64]| -> Result<Vec<(String, f64)>> {
        let mut p = start.clone();
        for (u, v) in unknowns.iter().zip(x) {
            u.assign(&mut p, *v)?;
        }
        residual_vector(setting, &p, conditions)
    };
    let k = unknowns.len();
    let r0: Vec<f64> = eval(&vec![0.0; k])?.into_iter().map(|(_, v)| v).collect();
    if r0.len() != k {
        return Err(Error::ContractViolation(format!("{} equations for {} unknowns", r0.len(), k)));
    }
    let mut a = vec![vec![0.0; k]; k];
    for j in 0..k {
        let mut e = vec![0.0; k];
        e[j] = 1.0;
        let rj = eval(&e)?;
        for i in 0..k {
            a[i][j] = rj[i].1 - r0[i];
        }
    }
    let rhs: Vec<f64> = r0.iter().map(|v| -v).collect();
    let solved = linalg::solve(&a, &rhs, "stationarity system")?;

    let mut profile = start.clone();
    for (u, v) in unknowns.iter().zip(&solved.x) {
        u.assign(&mut profile, *v)?;
    }
    let residuals = residual_vector(setting, &profile, conditions)?;
    let scale = 1.0 + r0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = residuals.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    if !(worst <= ZERO_RESIDUAL * scale) {
        return Err(Error::ContractViolation(format!(
            "stationarity system is not affine in its unknowns (residual {worst:e} after solve)"
        )));
    }
    Ok(Assembled {
        profile,
        values: unknowns.iter().map(|u| u.name.clone()).zip(solved.x).collect(),
        residuals,
        condition_number: solved.condition,
    })
}

/// Sensitivity of the mean follower action to the major's action when the
/// followers re-solve their own conditions after the major's `MajorObs`
/// coefficient moves by one.
pub fn minor_reaction(
    setting: &Setting,
    profile: &Profile,
    follower_unknowns: &[Unknown],
    follower_conditions: &[Condition],
) -> Result<f64> {
    let before = solve_linear_policies(setting, profile, follower_unknowns, follower_conditions)?;
    let mut bumped = before.profile.clone();
    let coef = Coefficient::Major(Channel::MajorObs);
    let bumped_value = coef.get(&bumped) + 1.0;
    coef.set(&mut bumped, bumped_value)?;
    let after = solve_linear_policies(setting, &bumped, follower_unknowns, follower_conditions)?;

    let e0 = expand(setting, &before.profile)?;
    let e1 = expand(setting, &after.profile)?;
    let d_mean = e1.slot(Slot::PopMeanAction) - e0.slot(Slot::PopMeanAction);
    let d_major = e1.slot(Slot::MajorAction) - e0.slot(Slot::MajorAction);
    let var = setting.variances();
    let norm = d_major.second_moment(&var);
    if !(norm > 0.0) {
        return Err(Error::ContractViolation("major action does not depend on its own observation".into()));
    }
    let s = d_mean.cov(&d_major, &var) / norm;
    let off = (d_mean - d_major * s).second_moment(&var).sqrt();
    if off > 1e-9 * (1.0 + s.abs()) {
        return Err(Error::ContractViolation("follower response is not proportional to the major's action".into()));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_pn_costs, LeaderPolicy, LinearPolicy, PnGameSpec};

    #[test]
    fn pn_team_optimum_matches_hand_values() {
        // For (r0, q0, r, q) = (2, 1, 2, 1) and n = 2 the team optimum is
        // alpha0 = -1/12, alpha = 1/18, beta = -2/3.
        let spec = PnGameSpec::new(2.0, 1.0, 2.0, 1.0, 2).unwrap();
        let (leader, _) = build_pn_costs(&spec);
        let s = Setting::pn(2);
        let start = Profile::new(LeaderPolicy::Linear(LinearPolicy::zero()), None, LinearPolicy::zero());
        let unknowns = [
            Unknown::new("alpha0", Coefficient::Leader(Channel::LeaderObs)),
            Unknown::new("alpha", Coefficient::Leader(Channel::PopMeanObs)),
            Unknown::new("beta", Coefficient::Followers(Channel::OwnObs)),
        ];
        let conds = [
            Condition::new("leader", leader.clone(), Mover::leader()),
            Condition::new("follower", leader, Mover::follower()),
        ];
        let out = solve_linear_policies(&s, &start, &unknowns, &conds).unwrap();
        assert!((out.value("alpha0").unwrap() + 1.0 / 12.0).abs() < 1e-12);
        assert!((out.value("alpha").unwrap() - 1.0 / 18.0).abs() < 1e-12);
        assert!((out.value("beta").unwrap() + 2.0 / 3.0).abs() < 1e-12);
        assert!(out.max_residual() < 1e-12);
    }

    #[test]
    fn non_square_is_rejected() {
        let spec = PnGameSpec::new(2.0, 1.0, 2.0, 1.0, 2).unwrap();
        let (leader, _) = build_pn_costs(&spec);
        let s = Setting::pn(2);
        let start = Profile::new(LeaderPolicy::Linear(LinearPolicy::zero()), None, LinearPolicy::zero());
        let unknowns = [Unknown::new("alpha0", Coefficient::Leader(Channel::LeaderObs))];
        let conds = [Condition::new("leader", leader, Mover::leader())];
        assert!(matches!(solve_linear_policies(&s, &start, &unknowns, &conds), Err(Error::ContractViolation(_))));
    }
}
