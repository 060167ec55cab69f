//! Random instances shared by the integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stacklab::gaussian::Setting;
use stacklab::model::{build_maj_costs, build_pn_costs, Monitored, Role};
use stacklab::{IncentivePolicy, LeaderPolicy, LinearPolicy, MajGameSpec, PnGameSpec, Profile, QuadraticCostSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn weight(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.2..5.0)
}

pub fn random_pn_spec(rng: &mut ChaCha8Rng, n: usize) -> PnGameSpec {
    PnGameSpec::new(weight(rng), weight(rng), weight(rng), weight(rng), n).unwrap()
}

pub fn random_maj_spec(rng: &mut ChaCha8Rng, n: usize) -> MajGameSpec {
    MajGameSpec::new(weight(rng), weight(rng), weight(rng), weight(rng), weight(rng), weight(rng), weight(rng), n)
        .unwrap()
}

fn random_policy(rng: &mut ChaCha8Rng, setting: &Setting, role: Role) -> LinearPolicy {
    LinearPolicy::from_pairs(setting.info_set(role).iter().map(|c| (*c, rng.random_range(-1.5..1.5))))
}

/// A random profile on a random game with a random deviant and, half the
/// time, an incentive leader; paired with one player's cost.
pub struct Instance {
    pub setting: Setting,
    pub profile: Profile,
    pub cost: QuadraticCostSpec,
}

pub fn random_instance(rng: &mut ChaCha8Rng, max_n: usize) -> Instance {
    let n = rng.random_range(1..=max_n);
    let major = rng.random_bool(0.5);
    let setting = if major { Setting::major(n) } else { Setting::pn(n) };
    let base = random_policy(rng, &setting, Role::Leader);
    let leader = if rng.random_bool(0.5) {
        LeaderPolicy::Incentive(IncentivePolicy {
            base,
            gain: rng.random_range(-2.0..2.0),
            reference: random_policy(rng, &setting, Role::Leader),
            monitored: if major { Monitored::MajorAction } else { Monitored::PopMeanAction },
        })
    } else {
        LeaderPolicy::Linear(base)
    };
    let major_policy = major.then(|| random_policy(rng, &setting, Role::Major));
    let followers = random_policy(rng, &setting, Role::Follower);
    let mut profile = Profile::new(leader, major_policy, followers);
    if rng.random_bool(0.5) {
        profile = profile.with_deviant(random_policy(rng, &setting, Role::Follower));
    }
    let cost = if major {
        let c = build_maj_costs(&random_maj_spec(rng, n));
        match rng.random_range(0..3) {
            0 => c.leader,
            1 => c.major,
            _ => c.minor,
        }
    } else {
        let (leader, follower) = build_pn_costs(&random_pn_spec(rng, n));
        if rng.random_bool(0.5) {
            leader
        } else {
            follower
        }
    };
    Instance { setting, profile, cost }
}
