// Incentivize only the major follower and watch the gain settle to its
// mean-field limit.

use stacklab::solvers::growth::fit_growth;
use stacklab::solvers::major::{maj_limits, maj_solve};
use stacklab::{MajGameSpec, Result};

pub fn run() -> Result<String> {
    let spec = MajGameSpec::loss_curve_reference(1);
    let limit = maj_limits(&spec)?;
    let q_inf = limit.gain.unwrap_or(f64::NAN);
    let mut out = format!("limit gain {q_inf:.8}, minors play {:.4} y^i + {:.6} yM\n", limit.alpha, limit.alpha_m);
    let mut gains = Vec::new();
    for n in [10, 100, 1_000, 10_000] {
        let sol = maj_solve(&spec.with_n(n))?;
        let q = sol.gain.unwrap_or(f64::NAN);
        gains.push((n, q));
        out += &format!("n = {n:<6} gain = {q:.8}  |gain - limit| = {:.3e}\n", (q - q_inf).abs());
    }
    let fit = fit_growth(&gains)?;
    out += &format!("log-log slope {:.4}, verdict {:?}", fit.slope, fit.verdict);
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    println!("{}", run()?);
    Ok(())
}
