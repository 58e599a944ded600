// The squares [φ, φ+τ(φ)]² that trap the orbits, and the sign of Y2 below φ = 0.

use simons_core::flow::{check_invariant_region, InvariantRegionReport};
use simons_core::{ConeParams, Result};

pub fn run_example() -> Result<Vec<InvariantRegionReport>> {
    let mut reports = Vec::new();
    for (n, p) in [(2, 1), (3, 1), (7, 3)] {
        let c = ConeParams::new(n, p)?;
        for frac in [0.0, 0.25, 0.5, 0.75] {
            let r = check_invariant_region(&c, frac * c.theta0(), 400)?;
            println!(
                "({n},{p}) φ = {:.4}  τ = {:.4}  min inward {:+.3e}  tangencies {}  min Y2 on strip {:.3e}",
                r.phi,
                r.tau,
                r.min_inward,
                r.tangencies.len(),
                r.strip_min_y2
            );
            reports.push(r);
        }
    }
    Ok(reports)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
