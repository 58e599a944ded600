// Decomposition of solutions of (d/dt - λ)(d/dt - μ)g = f into a kernel part
// and a decaying remainder, on seeded random instances.

use num_complex::Complex64;
use simons_core::ode::{decompose, lemma_suite, OdeProblem, SuiteReport};
use simons_core::Result;

pub fn run_example() -> Result<SuiteReport> {
    let lambda = Complex64::new(-1.5, 7f64.sqrt() / 2.0);
    let problem = OdeProblem::new(
        lambda,
        lambda.conj(),
        |t: f64| Complex64::new((-3.0 * t).exp(), 0.0),
        Complex64::new(0.2, 0.0),
        Complex64::new(-0.1, 0.0),
        3.0,
    );
    let d = decompose(&problem, 8.0)?;
    println!("single problem: a = {:.6e}, b = {:.6e}", d.a, d.b);

    let suite = lemma_suite(1, 200, 10.0)?;
    println!(
        "{} problems: max reconstruction {:.2e}, observed c {:.4}, v estimate holds: {}",
        suite.rows.len(),
        suite.max_reconstruction_error(),
        suite.max_observed_c(),
        suite.all_v_estimates_hold()
    );
    Ok(suite)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
