//! Population sweeps rendered as tidy tables.

use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::model::{MajGameSpec, PnGameSpec, ZeroLossSpec};
use crate::solvers::major::{maj_loss, maj_solve};
use crate::solvers::pn::pn_solve;
use crate::solvers::zero_loss::{zero_loss_leader_optimal, zero_loss_loss};

/// A table whose first column is the population size.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<(usize, Vec<f64>)>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| *c == name)?;
        if k == 0 {
            return Some(self.rows.iter().map(|(n, _)| *n as f64).collect());
        }
        Some(self.rows.iter().map(|(_, v)| v[k - 1]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for (n, values) in &self.rows {
            out.push_str(&n.to_string());
            for v in values {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|(n, values)| {
                    let mut row = Map::new();
                    row.insert(self.columns[0].into(), Value::from(*n));
                    for (c, v) in self.columns[1..].iter().zip(values) {
                        row.insert((*c).into(), Value::from(*v));
                    }
                    Value::Object(row)
                })
                .collect(),
        )
    }
}

/// Parses `"a,b,c"` or an inclusive range `"a..b"` into a strictly
/// increasing grid.
pub fn parse_grid(text: &str) -> Result<Vec<usize>> {
    let bad = |t: &str| Error::InvalidArgument(format!("cannot parse grid entry {t:?}"));
    let grid: Vec<usize> = if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad(a))?;
        let b: usize = b.trim().parse().map_err(|_| bad(b))?;
        (a..=b).collect()
    } else {
        text.split(',').map(|t| t.trim().parse().map_err(|_| bad(t))).collect::<Result<_>>()?
    };
    if grid.is_empty() || grid[0] == 0 {
        return Err(Error::InvalidArgument("grid must be non-empty with entries >= 1".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
    }
    Ok(grid)
}

fn table<F>(columns: Vec<&'static str>, grid: &[usize], row: F) -> Result<Table>
where
    F: Fn(usize) -> Result<Vec<f64>> + Sync,
{
    let rows = grid.par_iter().map(|&n| row(n).map(|v| (n, v))).collect::<Result<Vec<_>>>()?;
    Ok(Table { columns, rows })
}

pub fn pn_gain_curve(spec: &PnGameSpec, grid: &[usize]) -> Result<Table> {
    table(vec!["n", "alpha0", "alpha", "beta", "gain", "energy"], grid, |n| {
        let s = pn_solve(&spec.with_n(n))?;
        Ok(vec![s.alpha0, s.alpha, s.beta, s.gain.unwrap_or(f64::NAN), s.energy.unwrap_or(f64::NAN)])
    })
}

pub fn maj_loss_curve(spec: &MajGameSpec, grid: &[usize]) -> Result<Table> {
    table(vec!["n", "j_leader_opt", "j_leader_major", "loss"], grid, |n| {
        let l = maj_loss(&spec.with_n(n))?;
        Ok(vec![l.j_leader_opt, l.j_leader_major, l.loss])
    })
}

pub fn maj_gain_curve(spec: &MajGameSpec, grid: &[usize]) -> Result<Table> {
    table(vec!["n", "theta", "thetaM", "beta", "alpha", "alphaM", "gain", "L"], grid, |n| {
        let s = maj_solve(&spec.with_n(n))?;
        Ok(vec![s.theta, s.theta_m, s.beta, s.alpha, s.alpha_m, s.gain.unwrap_or(f64::NAN), s.l.unwrap_or(f64::NAN)])
    })
}

pub fn zero_loss_loss_curve(spec: &ZeroLossSpec, grid: &[usize]) -> Result<Table> {
    table(vec!["n", "j_leader_opt", "j_leader_major", "loss"], grid, |n| {
        let l = zero_loss_loss(&spec.with_n(n))?;
        Ok(vec![l.j_leader_opt, l.j_leader_major, l.loss])
    })
}

/// Coefficients and gain; the gain is NaN where no affine incentive exists.
pub fn zero_loss_gain_curve(spec: &ZeroLossSpec, grid: &[usize]) -> Result<Table> {
    table(vec!["n", "theta", "thetaM", "beta", "gain", "L"], grid, |n| {
        let spec = spec.with_n(n);
        let s = zero_loss_leader_optimal(&spec)?;
        let gain = crate::solvers::zero_loss::zero_loss_gain(&spec, &s).unwrap_or(f64::NAN);
        Ok(vec![s.theta, s.theta_m, s.beta, gain, s.l])
    })
}
