// The surface as a normal graph over its cone: minimality residual and decay.

use simons_core::asymptotics::{fit_decay, profile_to_graph, residual_invariant, DecayFit};
use simons_core::spectral::{indicial_roots, ModeIndex};
use simons_core::{generate_sigma, ConeParams, OrbitControls, Result, Sign};

pub fn run_example() -> Result<Vec<((u32, u32), DecayFit)>> {
    let controls = OrbitControls { rho_span: 40.0, ..OrbitControls::default() };
    let mut fits = Vec::new();
    for (n, p) in [(2, 1), (7, 3)] {
        let c = ConeParams::new(n, p)?;
        let curve = generate_sigma(&c, Sign::Plus, &controls)?;
        let graph = profile_to_graph(&curve)?;
        let res = residual_invariant(&c, &graph)?;
        let roots = indicial_roots(&c, ModeIndex::new(0, 0));
        let fit = fit_decay(&graph, &roots)?;
        println!(
            "({n},{p}) graph t in [{:.2}, {:.2}], scaled residual {:.2e}",
            graph.t_range().0,
            graph.t_range().1,
            res.max_scaled()
        );
        println!(
            "    fitted rate {:.6} freq {:.6}; roots {:.6} ± {:.6}i",
            fit.rate, fit.frequency, roots.plus.re, roots.plus.im.abs()
        );
        fits.push(((n as u32, p as u32), fit));
    }
    Ok(fits)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
