// Profile curves of both surfaces for several cones.

use simons_core::flow::image_distance;
use simons_core::{generate_sigma, ConeParams, OrbitControls, ProfileCurve, Result, Sign};

pub fn run_example() -> Result<Vec<ProfileCurve>> {
    let controls = OrbitControls::default();
    let mut curves = Vec::new();
    for (n, p) in [(2, 1), (3, 1), (3, 2), (4, 2), (7, 3)] {
        let c = ConeParams::new(n, p)?;
        for sign in [Sign::Plus, Sign::Minus] {
            let curve = generate_sigma(&c, sign, &controls)?;
            println!(
                "({n},{p},{sign}) samples {:>5}  end dist {:.2e}  ρ slope {:.8} (sin 2θ0 = {:.8})  residual {:.2e}",
                curve.len(),
                curve.terminal_distance(),
                curve.tail_rho_slope(5.0),
                c.sin_2theta0(),
                curve.max_reduced_ode_residual()
            );
            curves.push(curve);
        }
    }
    // Exchanging the two sphere factors maps Σ_{3,1,+} onto Σ_{3,2,-}.
    let d = image_distance(&curves[2], &curves[5], true);
    println!("factor exchange distance {d:.2e}");
    Ok(curves)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
