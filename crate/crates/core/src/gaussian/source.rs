use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Independent zero-mean sources every observation is built from, seen from
/// the distinguished follower `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Omega0,
    LeaderNoise,
    MajorNoise,
    OwnNoise,
    /// `(1/n) * sum_{p != i} w^p`, variance `(n-1)/n^2`.
    RestNoise,
}

pub const SOURCE_COUNT: usize = 5;

impl Source {
    pub const ALL: [Source; SOURCE_COUNT] =
        [Source::Omega0, Source::LeaderNoise, Source::MajorNoise, Source::OwnNoise, Source::RestNoise];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Variance of each source for a population of `n` followers.
pub fn source_variances(n: usize) -> [f64; SOURCE_COUNT] {
    let nf = n as f64;
    [1.0, 1.0, 1.0, 1.0, (nf - 1.0) / (nf * nf)]
}

/// A linear combination of the sources.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SourceVector(pub [f64; SOURCE_COUNT]);

impl SourceVector {
    pub const ZERO: SourceVector = SourceVector([0.0; SOURCE_COUNT]);

    pub fn unit(s: Source) -> Self {
        let mut v = [0.0; SOURCE_COUNT];
        v[s.index()] = 1.0;
        Self(v)
    }

    pub fn get(&self, s: Source) -> f64 {
        self.0[s.index()]
    }

    /// `Cov(self, other)` under the given source variances.
    pub fn cov(&self, other: &SourceVector, var: &[f64; SOURCE_COUNT]) -> f64 {
        (0..SOURCE_COUNT).map(|k| self.0[k] * other.0[k] * var[k]).sum()
    }

    /// `E[(self . x)^2]`.
    pub fn second_moment(&self, var: &[f64; SOURCE_COUNT]) -> f64 {
        self.cov(self, var)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Add for SourceVector {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for SourceVector {
    fn add_assign(&mut self, rhs: Self) {
        for k in 0..SOURCE_COUNT {
            self.0[k] += rhs.0[k];
        }
    }
}

impl Sub for SourceVector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for SourceVector {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Mul<f64> for SourceVector {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        for v in &mut self.0 {
            *v *= rhs;
        }
        self
    }
}

impl Mul<SourceVector> for f64 {
    type Output = SourceVector;
    fn mul(self, rhs: SourceVector) -> SourceVector {
        rhs * self
    }
}
