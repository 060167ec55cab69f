//! Independent checks of solved games: exact best-response certification
//! and seeded Monte Carlo cost estimates.

pub mod certify;
pub mod mc;

pub use certify::{
    best_response_improvement, certify_incentive, pointwise_improvement, Certifiable, CertificationReport,
    CertifyOptions, Epsilons,
};
pub use mc::{mc_expected_cost, Estimate, MonteCarloConfig};
