// The gain needed to incentivize every follower directly grows linearly
// with the population, so its energy is unbounded.

use stacklab::solvers::pn::pn_divergence_report;
use stacklab::{PnGameSpec, Result};

pub fn run() -> Result<String> {
    let spec = PnGameSpec::new(2.0, 1.0, 2.0, 1.0, 1)?;
    let report = pn_divergence_report(&spec, &[10, 100, 1_000, 10_000])?;
    let mut out = String::from("n        gain            energy\n");
    for s in &report.solutions {
        out += &format!("{:<8} {:<15.6} {:.6e}\n", s.n, s.gain.unwrap_or(f64::NAN), s.energy.unwrap_or(f64::NAN));
    }
    out += &format!(
        "slope {:.4}, |Q|/n {:.4}, verdict {:?}, energy > 1e5 from n = {}",
        report.fit.slope,
        report.gain_per_follower,
        report.fit.verdict,
        report.population_for_energy(1e5)
    );
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    println!("{}", run()?);
    Ok(())
}
