//! Seeded Monte Carlo estimation of expected costs by explicit simulation of
//! the whole population.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{expand, GameKind, Setting};
use crate::model::{Channel, LeaderPolicy, LinearPolicy, Monitored, Profile, QuadraticCostSpec, Slot};

pub const MIN_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MonteCarloConfig {
    pub samples: usize,
    pub seed: u64,
    pub batches: usize,
}

impl MonteCarloConfig {
    pub fn new(samples: usize, seed: u64, batches: usize) -> Result<Self> {
        if samples < MIN_SAMPLES {
            return Err(Error::InvalidArgument(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
        }
        if batches == 0 || batches > samples {
            return Err(Error::InvalidArgument(format!("batches must be in 1..={samples}, got {batches}")));
        }
        Ok(Self { samples, seed, batches })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub standard_error: f64,
}

impl Estimate {
    /// Distance to `exact` in standard errors.
    pub fn z_score(&self, exact: f64) -> f64 {
        (self.estimate - exact).abs() / self.standard_error
    }
}

fn compile(p: &LinearPolicy) -> [f64; 4] {
    let mut c = [0.0; 4];
    for (k, ch) in Channel::ALL.iter().enumerate() {
        c[k] = p.coeff(*ch);
    }
    c
}

fn dot(c: &[f64; 4], obs: &[f64; 4]) -> f64 {
    c.iter().zip(obs).map(|(a, b)| a * b).sum()
}

/// A profile lowered to flat coefficient arrays indexed like `Channel::ALL`.
struct Compiled {
    n: usize,
    shared: bool,
    leader: [f64; 4],
    reference: [f64; 4],
    gain: f64,
    monitored: Option<Monitored>,
    major: [f64; 4],
    followers: [f64; 4],
    deviant: [f64; 4],
    terms: Vec<(f64, [f64; 5])>,
}

impl Compiled {
    fn new(setting: &Setting, profile: &Profile, cost: &QuadraticCostSpec) -> Result<Self> {
        expand(setting, profile)?;
        let (reference, gain, monitored) = match &profile.leader {
            LeaderPolicy::Linear(_) => ([0.0; 4], 0.0, None),
            LeaderPolicy::Incentive(p) => (compile(&p.reference), p.gain, Some(p.monitored)),
        };
        let terms = cost
            .terms
            .iter()
            .map(|t| {
                let mut c = [0.0; 5];
                for s in Slot::ALL {
                    c[s.index()] = t.coeff(s);
                }
                (t.weight, c)
            })
            .collect();
        Ok(Self {
            n: setting.n,
            shared: setting.kind == GameKind::SharedMajor,
            leader: compile(profile.leader.base()),
            reference,
            gain,
            monitored,
            major: profile.major.as_ref().map(compile).unwrap_or([0.0; 4]),
            followers: compile(&profile.followers),
            deviant: compile(profile.own_policy()),
            terms,
        })
    }

    /// One realization of the cost seen by follower 0.
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let normal = |rng: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };
        let omega = normal(rng);
        let y0 = omega + normal(rng);
        let ym = omega + normal(rng);
        let obs_of = |own: f64| [y0, ym, own, 0.0];

        let mut own_action = 0.0;
        let mut action_sum = 0.0;
        let mut obs_sum = 0.0;
        for p in 0..self.n {
            let y = if self.shared { ym } else { omega + normal(rng) };
            let policy = if p == 0 { &self.deviant } else { &self.followers };
            let u = dot(policy, &obs_of(y));
            if p == 0 {
                own_action = u;
            }
            action_sum += u;
            obs_sum += y;
        }
        let n = self.n as f64;
        let pop_action = action_sum / n;
        let leader_obs = [y0, ym, 0.0, obs_sum / n];
        let major_action = dot(&self.major, &leader_obs);
        let mut leader_action = dot(&self.leader, &leader_obs);
        if let Some(m) = self.monitored {
            let monitored = match m {
                Monitored::PopMeanAction => pop_action,
                Monitored::MajorAction => major_action,
            };
            leader_action += self.gain * (monitored - dot(&self.reference, &leader_obs));
        }
        let slots = [leader_action, major_action, own_action, pop_action, omega];
        self.terms
            .iter()
            .map(|(w, c)| {
                let s: f64 = c.iter().zip(&slots).map(|(a, b)| a * b).sum();
                w * s * s
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy)]
struct BatchStats {
    count: usize,
    mean: f64,
    m2: f64,
}

fn run_batch(model: &Compiled, seed: u64, count: usize) -> BatchStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut mean, mut m2) = (0.0, 0.0);
    for k in 0..count {
        let x = model.sample(&mut rng);
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
    }
    BatchStats { count, mean, m2 }
}

/// Estimates the expected cost by simulation. Batch `b` draws from its own
/// stream seeded with `seed ^ b`, and batches are reduced in index order, so
/// the result does not depend on thread scheduling.
pub fn mc_expected_cost(
    setting: &Setting,
    profile: &Profile,
    cost: &QuadraticCostSpec,
    cfg: &MonteCarloConfig,
) -> Result<Estimate> {
    let cfg = MonteCarloConfig::new(cfg.samples, cfg.seed, cfg.batches)?;
    let model = Compiled::new(setting, profile, cost)?;
    let base = cfg.samples / cfg.batches;
    let extra = cfg.samples % cfg.batches;
    let stats: Vec<BatchStats> = (0..cfg.batches)
        .into_par_iter()
        .map(|b| run_batch(&model, cfg.seed ^ b as u64, base + usize::from(b < extra)))
        .collect();

    let total = cfg.samples as f64;
    let estimate = stats.iter().map(|s| s.mean * s.count as f64).sum::<f64>() / total;
    let standard_error = if stats.len() == 1 {
        (stats[0].m2 / (total - 1.0) / total).sqrt()
    } else {
        let b = stats.len() as f64;
        let mean_of_means = stats.iter().map(|s| s.mean).sum::<f64>() / b;
        let var = stats.iter().map(|s| (s.mean - mean_of_means).powi(2)).sum::<f64>() / (b - 1.0);
        (var / b).sqrt()
    };
    Ok(Estimate { estimate, standard_error })
}
