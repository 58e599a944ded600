// Monotone density ratios and the density at infinity.

use simons_core::asymptotics::{density_at_pole, density_profile};
use simons_core::cone::cone_density;
use simons_core::verify::log_radii;
use simons_core::{generate_sigma, ConeParams, OrbitControls, ProfileCurve, Result, Sign};

pub struct DensitySummary {
    pub limit: f64,
    pub cone: f64,
    pub max_decrease: f64,
    pub pole_small_r: f64,
    pub exact_cone_spread: f64,
}

pub fn run_example() -> Result<DensitySummary> {
    let c = ConeParams::new(2, 1)?;
    let curve = generate_sigma(&c, Sign::Plus, &OrbitControls::default())?;
    let radii = log_radii(0.1, 0.999 * curve.last().state.rho.exp(), 60);
    let d = density_profile(&curve, &radii)?;
    for (r, th) in d.radii.iter().zip(&d.theta).step_by(10) {
        println!("r = {r:>12.4}  θ = {th:.10}");
    }
    println!("limit {:.10}, cone density {:.10}", d.limit_estimate, cone_density(&c));

    let pole = density_at_pole(&curve, &log_radii(1e-3, 0.5, 20))?;
    println!("density at the axis point, r = 1e-3: {:.8}", pole.theta[0]);

    let cone = ProfileCurve::exact_cone(&c, -3.0, 4.0, 0.025)?;
    let exact = density_profile(&cone, &log_radii(0.1, 50.0, 20))?;
    let spread = exact.theta.iter().map(|t| (t - cone_density(&c)).abs()).fold(0.0, f64::max);
    println!("exact cone: max |θ - θ_C| = {spread:.2e}");

    Ok(DensitySummary {
        limit: d.limit_estimate,
        cone: cone_density(&c),
        max_decrease: d.max_decrease(),
        pole_small_r: pole.theta[0],
        exact_cone_spread: spread,
    })
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
