//! Dense Gaussian elimination with partial pivoting for the small square
//! systems produced by the stationarity assembler (at most a handful of
//! unknowns).

use crate::error::{Error, Result};

/// Pivots below this magnitude (relative to the largest entry) are treated
/// as exact zeros.
pub const PIVOT_TOLERANCE: f64 = 1e-13;

/// Condition estimates above this are reported as ill-conditioned.
pub const CONDITION_WARNING: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub struct Solved {
    pub x: Vec<f64>,
    /// 1-norm condition number estimate, `||A||_1 * ||A^-1||_1`.
    pub condition: f64,
}

impl Solved {
    pub fn ill_conditioned(&self) -> bool {
        self.condition > CONDITION_WARNING
    }
}

#[derive(Debug, Clone)]
struct Lu {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

#[allow(clippy::needless_range_loop)]
fn factor(a: &[Vec<f64>], context: &str) -> Result<Lu> {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument(format!("{context}: matrix is not square")));
    }
    let scale = a.iter().flat_map(|row| row.iter()).fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut lu = a.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (p, mag) =
            (k..n).map(|i| (i, lu[i][k].abs())).fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(mag > PIVOT_TOLERANCE * scale) {
            return Err(Error::DegenerateGame { context: context.to_string(), pivot: k, magnitude: mag.max(0.0) });
        }
        lu.swap(k, p);
        perm.swap(k, p);
        for i in k + 1..n {
            let f = lu[i][k] / lu[k][k];
            lu[i][k] = f;
            for j in k + 1..n {
                lu[i][j] -= f * lu[k][j];
            }
        }
    }
    Ok(Lu { lu, perm })
}

impl Lu {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] -= self.lu[i][j] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.lu[i][j] * y[j];
            }
            y[i] /= self.lu[i][i];
        }
        y
    }
}

fn one_norm(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    (0..n).map(|j| a.iter().map(|row| row[j].abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Solves `a x = b`. A vanishing pivot yields [`Error::DegenerateGame`]
/// naming the elimination step at which it occurred.
pub fn solve(a: &[Vec<f64>], b: &[f64], context: &str) -> Result<Solved> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "{context}: {} equations for a right-hand side of length {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Ok(Solved { x: Vec::new(), condition: 1.0 });
    }
    let lu = factor(a, context)?;
    let x = lu.solve(b);
    let n = a.len();
    let mut inv_cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        inv_cols.push(lu.solve(&e));
    }
    // inv_cols[j] is column j of the inverse; transpose so one_norm sees rows.
    let inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| inv_cols[j][i]).collect()).collect();
    let condition = one_norm(a) * one_norm(&inv);
    Ok(Solved { x, condition })
}

/// Cholesky test for symmetric positive definiteness.
pub fn is_positive_definite(a: &[Vec<f64>]) -> bool {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 0.0) {
                    return false;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_with_row_swap() {
        let a = vec![vec![0.0, 2.0], vec![3.0, 1.0]];
        let s = solve(&a, &[4.0, 5.0], "t").unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-15);
        assert!((s.x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn singular_names_pivot() {
        let a = vec![vec![1.0, 2.0, 0.0], vec![2.0, 4.0, 0.0], vec![0.0, 0.0, 1.0]];
        match solve(&a, &[1.0, 2.0, 3.0], "demo") {
            Err(Error::DegenerateGame { pivot, context, .. }) => {
                assert_eq!(pivot, 1);
                assert_eq!(context, "demo");
            }
            other => panic!("expected degenerate error, got {other:?}"),
        }
    }

    #[test]
    fn condition_of_identity_is_one() {
        let a = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(solve(&a, &[1.0, 1.0], "id").unwrap().condition, 1.0);
    }

    #[test]
    fn hilbert_is_flagged() {
        let n = 9;
        let a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| 1.0 / (i + j + 1) as f64).collect()).collect();
        let s = solve(&a, &vec![1.0; n], "hilbert").unwrap();
        assert!(s.ill_conditioned());
    }

    #[test]
    fn positive_definite() {
        assert!(is_positive_definite(&[vec![2.0, 1.0], vec![1.0, 2.0]]));
        assert!(!is_positive_definite(&[vec![1.0, 2.0], vec![2.0, 1.0]]));
        assert!(!is_positive_definite(&[vec![0.0]]));
    }
}
