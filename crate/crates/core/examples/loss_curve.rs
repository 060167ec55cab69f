// The leader's price for controlling only the major: leader-optimal and
// leader-major-optimal costs over n = 1..50, printed as CSV.

use stacklab::sweep::maj_loss_curve;
use stacklab::{MajGameSpec, Result};

pub fn run() -> Result<String> {
    let grid: Vec<usize> = (1..=50).collect();
    Ok(maj_loss_curve(&MajGameSpec::loss_curve_reference(1), &grid)?.to_csv())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    print!("{}", run()?);
    Ok(())
}
