//! Linear-quadratic-Gaussian Stackelberg games with incentive strategies.
//!
//! A leader announces an affine incentive that reacts to the followers'
//! actions; the followers then play a Nash equilibrium among themselves.
//! The crate computes the leader-optimal team solution, the incentive gain
//! that makes it a follower equilibrium, how that gain scales with the
//! population, and certifies the result exactly and by simulation.
//!
//! Two game families are covered. In [`solvers::pn`] every follower is
//! incentivized directly and the required gain grows linearly with the
//! population. In [`solvers::major`] the leader incentivizes one major
//! follower who steers a population of minors, and the gain converges.

// Negated comparisons are used on purpose so that NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod gaussian;
pub mod linalg;
pub mod model;
pub mod solvers;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use model::{
    Channel, EquilibriumSolution, IncentivePolicy, LeaderPolicy, LinearPolicy, MajGameSpec, PnGameSpec, Profile,
    QuadraticCostSpec, ZeroLossSpec,
};
