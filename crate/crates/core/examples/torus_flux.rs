// Full-torus minimality residual and boundary flux for Σ_{2,1,+}.

use simons_core::asymptotics::{flux, residual_full_torus, sigma_torus, FluxResult};
use simons_core::{generate_sigma, ConeParams, OrbitControls, Result, Sign};

pub fn run_example() -> Result<(f64, Vec<FluxResult>)> {
    let c = ConeParams::new(2, 1)?;
    let curve = generate_sigma(&c, Sign::Plus, &OrbitControls::default())?;
    let (torus, _) = sigma_torus(&curve, 2.5, 8.5, 1.0 / 128.0, 32, 32)?;
    let residual = residual_full_torus(&torus)?.max_abs();
    println!("max torus residual {residual:.2e}");
    let mut out = Vec::new();
    for t in [3.0, 5.0, 8.0] {
        let f = flux(&torus, t, 256)?;
        println!("t = {t}: F = [{:+.2e}, {:+.2e}, {:+.2e}, {:+.2e}]", f.flux[0], f.flux[1], f.flux[2], f.flux[3]);
        out.push(f);
    }
    Ok((residual, out))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
