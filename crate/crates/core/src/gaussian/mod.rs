//! Exact Gaussian calculus for linear policies.
//!
//! Every action and observation is expanded as a [`SourceVector`] over
//! independent standard-normal sources. Expected quadratic costs then reduce
//! to weighted second moments, and conditional expectations to small Gram
//! solves, so nothing here integrates or samples.

mod assemble;
mod expand;
mod source;

pub use assemble::{
    minor_reaction, residual_vector, solve_linear_policies, Assembled, Condition, Unknown, ZERO_RESIDUAL,
};
pub use expand::{
    conditional_expectation, cost_gradient, cost_hessian, curvature, expand, expected_cost, stationarity_residual,
    Coefficient, Expansion, Mover, ResidualForm,
};
pub use source::{source_variances, Source, SourceVector, SOURCE_COUNT};

use crate::error::{Error, Result};
use crate::model::{Channel, Role};

/// Coefficient on each observation in `E[omega0 | y_1..y_k]` when the `y_j`
/// are `omega0` plus independent unit-variance noise.
pub fn conditional_mean_coeff(k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidArgument("need at least one observation".into()));
    }
    Ok(1.0 / (k as f64 + 1.0))
}

/// Which game family a profile lives in; fixes information sets and how
/// follower observations relate to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameKind {
    /// Leader observes `y0` and every follower observation; followers observe
    /// their own `y^i`.
    Pn,
    /// Leader observes `(y0, yM)`, the major `yM`, minors `(y^i, yM)`.
    Major,
    /// Like [`GameKind::Major`] but every minor observes `yM` itself.
    SharedMajor,
}

/// A game family together with its population size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Setting {
    pub kind: GameKind,
    pub n: usize,
}

impl Setting {
    pub fn new(kind: GameKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("population size must be >= 1".into()));
        }
        Ok(Self { kind, n })
    }

    pub fn pn(n: usize) -> Self {
        Self { kind: GameKind::Pn, n: n.max(1) }
    }

    pub fn major(n: usize) -> Self {
        Self { kind: GameKind::Major, n: n.max(1) }
    }

    pub fn shared_major(n: usize) -> Self {
        Self { kind: GameKind::SharedMajor, n: n.max(1) }
    }

    pub fn variances(&self) -> [f64; SOURCE_COUNT] {
        source_variances(self.n)
    }

    pub fn has_major(&self) -> bool {
        !matches!(self.kind, GameKind::Pn)
    }

    /// Channels the role conditions on. The P_N leader's information is
    /// summarized by `(y0, ybar)`, which is sufficient for symmetric profiles.
    pub fn info_set(&self, role: Role) -> &'static [Channel] {
        use Channel::*;
        match (self.kind, role) {
            (GameKind::Pn, Role::Leader) => &[LeaderObs, PopMeanObs],
            (GameKind::Pn, Role::Major) => &[],
            (GameKind::Pn, Role::Follower) => &[OwnObs],
            (_, Role::Leader) => &[LeaderObs, MajorObs],
            (_, Role::Major) => &[MajorObs],
            (GameKind::Major, Role::Follower) => &[OwnObs, MajorObs],
            (GameKind::SharedMajor, Role::Follower) => &[OwnObs],
        }
    }

    fn shared(&self) -> bool {
        matches!(self.kind, GameKind::SharedMajor)
    }

    /// The channel as seen by follower `i`.
    pub fn channel(&self, c: Channel) -> SourceVector {
        let omega = SourceVector::unit(Source::Omega0);
        let n = self.n as f64;
        match c {
            Channel::LeaderObs => omega + SourceVector::unit(Source::LeaderNoise),
            Channel::MajorObs => omega + SourceVector::unit(Source::MajorNoise),
            Channel::OwnObs if self.shared() => omega + SourceVector::unit(Source::MajorNoise),
            Channel::OwnObs => omega + SourceVector::unit(Source::OwnNoise),
            Channel::PopMeanObs if self.shared() => omega + SourceVector::unit(Source::MajorNoise),
            Channel::PopMeanObs => {
                omega + SourceVector::unit(Source::OwnNoise) * (1.0 / n) + SourceVector::unit(Source::RestNoise)
            }
        }
    }

    /// `(1/n) * sum_{p != i}` of the channel evaluated by follower `p`.
    pub(crate) fn others_mean(&self, c: Channel) -> Result<SourceVector> {
        let n = self.n as f64;
        let frac = (n - 1.0) / n;
        match c {
            Channel::OwnObs if self.shared() => Ok(self.channel(Channel::MajorObs) * frac),
            Channel::OwnObs => Ok(SourceVector::unit(Source::Omega0) * frac + SourceVector::unit(Source::RestNoise)),
            Channel::MajorObs => Ok(self.channel(Channel::MajorObs) * frac),
            other => Err(Error::ContractViolation(format!("followers cannot observe {other}"))),
        }
    }
}
