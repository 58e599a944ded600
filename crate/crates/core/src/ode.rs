//! Scalar engine behind the asymptotic claims: solutions of
//! `g'' - (λ+μ) g' + λμ g = f` split as `a e^{λt} + b e^{μt} + v(t)`, with the
//! weighted-norm estimates on `a`, `b` and `v` evaluated explicitly.
//!
//! The variation-of-parameters integral `∫_0^t f(u) e^{ν(t-u)} du` is split at
//! `+∞` for each exponent `ν` with `δ + Re ν > 0`; its value at infinity is
//! absorbed into the coefficient of `e^{νt}`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::GaussRule;
use crate::rk::Dopri5;

/// Separation below which `λ = μ` or `δ = -Re ν` is treated as a collision.
pub const COLLISION_TOL: f64 = 1e-9;
/// Panels per unit length for the convolution quadrature.
pub const DEFAULT_PANELS_PER_UNIT: usize = 100;
/// Reference value for the unquantified constant of the coefficient estimate.
pub const REFERENCE_COEFFICIENT_CONSTANT: f64 = 10.0;

pub struct OdeProblem<F> {
    pub lambda: Complex64,
    pub mu: Complex64,
    pub forcing: F,
    pub g0: Complex64,
    pub dg0: Complex64,
    pub delta: f64,
}

impl<F: Fn(f64) -> Complex64> OdeProblem<F> {
    pub fn new(lambda: Complex64, mu: Complex64, forcing: F, g0: Complex64, dg0: Complex64, delta: f64) -> Self {
        Self { lambda, mu, forcing, g0, dg0, delta }
    }

    fn validate(&self) -> Result<()> {
        let sep = (self.lambda - self.mu).norm();
        if sep < COLLISION_TOL {
            return Err(Error::Resonance(sep));
        }
        for (which, z) in [("lambda", self.lambda), ("mu", self.mu)] {
            let distance = (self.delta + z.re).abs();
            if distance < COLLISION_TOL {
                return Err(Error::WeightCollision { which, distance });
            }
        }
        Ok(())
    }
}

/// Both displayed estimates, evaluated on the computed decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    /// `‖f‖_δ` over the sampled range.
    pub forcing_norm: f64,
    /// `max(|a|, |b|)`.
    pub coefficient_max: f64,
    /// `(2 + |λ|² + |μ|²)^{1/2} / |λ-μ| · (|g(0)| + |g'(0)|)`, the factor of `c`.
    pub coefficient_factor: f64,
    /// `2 max(0, (δ+Re λ)^{-1}, (δ+Re μ)^{-1}) / |λ-μ| · ‖f‖_δ`.
    pub coefficient_forcing_term: f64,
    /// Smallest `c` for which the coefficient estimate holds on this problem.
    pub observed_c: f64,
    /// `‖v‖_δ` over the sampled range.
    pub v_norm: f64,
    /// `(|δ+Re λ|^{-1} + |δ+Re μ|^{-1}) / |λ-μ| · ‖f‖_δ`.
    pub v_bound: f64,
    /// Bound on the error of the exponential-envelope model of `f` beyond the horizon.
    pub tail_truncation_bound: f64,
}

impl BoundsReport {
    pub fn coefficient_rhs(&self, c: f64) -> f64 {
        c * self.coefficient_factor + self.coefficient_forcing_term
    }

    pub fn coefficient_estimate_holds(&self, c: f64) -> bool {
        self.coefficient_max <= self.coefficient_rhs(c) * (1.0 + 1e-12)
    }

    pub fn v_estimate_holds(&self) -> bool {
        self.v_norm <= self.v_bound * (1.0 + 1e-12)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OdeDecomposition {
    pub a: Complex64,
    pub b: Complex64,
    pub t: Vec<f64>,
    pub v: Vec<Complex64>,
    pub bounds: BoundsReport,
    lambda: Complex64,
    mu: Complex64,
}

impl OdeDecomposition {
    /// `a e^{λt} + b e^{μt} + v(t)` on the sample grid.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        self.t
            .iter()
            .zip(&self.v)
            .map(|(&t, v)| self.a * (self.lambda * t).exp() + self.b * (self.mu * t).exp() + v)
            .collect()
    }
}

/// Decomposition on `[0, horizon]` with the default panel density.
pub fn decompose<F: Fn(f64) -> Complex64>(problem: &OdeProblem<F>, horizon: f64) -> Result<OdeDecomposition> {
    let panels = ((horizon * DEFAULT_PANELS_PER_UNIT as f64).ceil() as usize).max(1);
    decompose_with(problem, horizon, panels)
}

pub fn decompose_with<F: Fn(f64) -> Complex64>(
    problem: &OdeProblem<F>,
    horizon: f64,
    panels: usize,
) -> Result<OdeDecomposition> {
    problem.validate()?;
    if !(horizon > 0.0) || panels == 0 {
        return Err(Error::InvalidInput("horizon and panel count must be positive".into()));
    }
    let (lambda, mu, delta) = (problem.lambda, problem.mu, problem.delta);
    let f = &problem.forcing;
    let rule = GaussRule::new(8);
    let width = horizon / panels as f64;
    let t: Vec<f64> = (0..=panels).map(|i| i as f64 * width).collect();

    let mut forcing_norm = 0.0f64;
    let mut panel_lambda = Vec::with_capacity(panels);
    let mut panel_mu = Vec::with_capacity(panels);
    for i in 0..panels {
        let (mut il, mut im) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (u, w) in rule.panel(t[i], t[i + 1]) {
            let fu = f(u);
            forcing_norm = forcing_norm.max((delta * u).exp() * fu.norm());
            il += w * fu * (-lambda * u).exp();
            im += w * fu * (-mu * u).exp();
        }
        panel_lambda.push(il);
        panel_mu.push(im);
    }
    for &ti in &t {
        forcing_norm = forcing_norm.max((delta * ti).exp() * f(ti).norm());
    }

    let f_end = f(horizon);
    let mut tail_truncation_bound = 0.0f64;
    // Partial integrals of f(u) e^{-νu}: from 0 to t when δ + Re ν < 0,
    // otherwise minus the integral from t to ∞ (envelope tail beyond the horizon).
    let mut partial = |nu: Complex64, pieces: &[Complex64]| -> (Vec<Complex64>, Complex64) {
        let mut out = vec![Complex64::new(0.0, 0.0); panels + 1];
        if delta + nu.re < 0.0 {
            for i in 0..panels {
                out[i + 1] = out[i] + pieces[i];
            }
            (out, Complex64::new(0.0, 0.0))
        } else {
            let tail = f_end * (-nu * horizon).exp() / (delta + nu);
            let rate = delta + nu.re;
            tail_truncation_bound =
                tail_truncation_bound.max((-rate * horizon).exp() * forcing_norm / rate);
            let mut suffix = tail;
            out[panels] = -suffix;
            for i in (0..panels).rev() {
                suffix += pieces[i];
                out[i] = -suffix;
            }
            (out, suffix)
        }
    };
    let (int_lambda, at_inf_lambda) = partial(lambda, &panel_lambda);
    let (int_mu, at_inf_mu) = partial(mu, &panel_mu);

    let diff = lambda - mu;
    let a_ic = (mu * problem.g0 - problem.dg0) / (mu - lambda);
    let b_ic = (problem.dg0 - lambda * problem.g0) / (mu - lambda);
    let a = a_ic + at_inf_lambda / diff;
    let b = b_ic - at_inf_mu / diff;
    let v: Vec<Complex64> = t
        .iter()
        .enumerate()
        .map(|(i, &ti)| ((lambda * ti).exp() * int_lambda[i] - (mu * ti).exp() * int_mu[i]) / diff)
        .collect();

    let sep = diff.norm();
    let coefficient_factor = (2.0 + lambda.norm_sqr() + mu.norm_sqr()).sqrt() / sep
        * (problem.g0.norm() + problem.dg0.norm());
    let inv = |x: f64| 1.0 / x;
    let coefficient_forcing_term = 2.0
        * 0f64.max(inv(delta + lambda.re)).max(inv(delta + mu.re))
        / sep
        * forcing_norm;
    let coefficient_max = a.norm().max(b.norm());
    let observed_c = if coefficient_factor > 0.0 {
        ((coefficient_max - coefficient_forcing_term) / coefficient_factor).max(0.0)
    } else {
        0.0
    };
    let v_norm = t
        .iter()
        .zip(&v)
        .map(|(&ti, vi)| (delta * ti).exp() * vi.norm())
        .fold(0.0, f64::max);
    let v_bound = (inv((delta + lambda.re).abs()) + inv((delta + mu.re).abs())) / sep * forcing_norm;

    Ok(OdeDecomposition {
        a,
        b,
        t,
        v,
        bounds: BoundsReport {
            forcing_norm,
            coefficient_max,
            coefficient_factor,
            coefficient_forcing_term,
            observed_c,
            v_norm,
            v_bound,
            tail_truncation_bound,
        },
        lambda,
        mu,
    })
}

/// Direct initial-value integration of the ODE on the given grid, used as the
/// reference solution for the decomposition.
pub fn integrate_direct<F: Fn(f64) -> Complex64>(problem: &OdeProblem<F>, grid: &[f64], tol: f64) -> Result<Vec<Complex64>> {
    let (sum, prod) = (problem.lambda + problem.mu, problem.lambda * problem.mu);
    let rhs = |t: f64, y: &[f64; 4]| {
        let g = Complex64::new(y[0], y[1]);
        let dg = Complex64::new(y[2], y[3]);
        let ddg = (problem.forcing)(t) + sum * dg - prod * g;
        [dg.re, dg.im, ddg.re, ddg.im]
    };
    let y0 = [problem.g0.re, problem.g0.im, problem.dg0.re, problem.dg0.im];
    let start = grid.first().copied().unwrap_or(0.0);
    let mut rk = Dopri5::new(rhs, start, y0, 1e-3);
    let mut out = Vec::with_capacity(grid.len());
    for &target in grid {
        while rk.s < target {
            rk.step(Some(target), crate::rk::mixed_scale(tol, tol))
                .map_err(|e| Error::NonConvergence(format!("reference integration: {e:?}")))?;
        }
        out.push(Complex64::new(rk.y[0], rk.y[1]));
    }
    Ok(out)
}

/// One row of the randomized suite.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SuiteRow {
    pub index: usize,
    pub seed: u64,
    pub max_reconstruction_error: f64,
    pub observed_c: f64,
    pub v_estimate_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub horizon: f64,
    pub rows: Vec<SuiteRow>,
}

impl SuiteReport {
    pub fn max_reconstruction_error(&self) -> f64 {
        self.rows.iter().map(|r| r.max_reconstruction_error).fold(0.0, f64::max)
    }

    pub fn max_observed_c(&self) -> f64 {
        self.rows.iter().map(|r| r.observed_c).fold(0.0, f64::max)
    }

    pub fn all_v_estimates_hold(&self) -> bool {
        self.rows.iter().all(|r| r.v_estimate_holds)
    }
}

/// A forcing made of decaying complex exponentials `Σ c_j e^{-κ_j t}`.
#[derive(Debug, Clone)]
pub struct ExpSum {
    pub terms: Vec<(Complex64, Complex64)>,
}

impl ExpSum {
    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms.iter().map(|(c, k)| c * (-k * t).exp()).sum()
    }

    /// The slowest decay rate among the terms.
    pub fn min_rate(&self) -> f64 {
        self.terms.iter().map(|(_, k)| k.re).fold(f64::INFINITY, f64::min)
    }
}

pub struct RandomProblem {
    pub lambda: Complex64,
    pub mu: Complex64,
    pub forcing: ExpSum,
    pub g0: Complex64,
    pub dg0: Complex64,
    pub delta: f64,
}

impl RandomProblem {
    pub fn problem(&self) -> OdeProblem<impl Fn(f64) -> Complex64 + '_> {
        OdeProblem::new(self.lambda, self.mu, move |t| self.forcing.eval(t), self.g0, self.dg0, self.delta)
    }
}

/// Draws a problem with roots in the left half-plane, `|λ-μ| >= 0.2`, and a
/// weight kept at least 0.05 away from `-Re λ` and `-Re μ`.
pub fn random_problem(rng: &mut impl Rng) -> RandomProblem {
    let root = |rng: &mut dyn rand::RngCore| {
        Complex64::new(rng.gen_range(-4.0..-0.1), rng.gen_range(-2.0..2.0))
    };
    loop {
        let lambda = root(rng);
        let mu = root(rng);
        if (lambda - mu).norm() < 0.2 {
            continue;
        }
        let count = rng.gen_range(1..=4);
        let terms = (0..count)
            .map(|_| {
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let k = Complex64::new(rng.gen_range(0.5..4.0), rng.gen_range(-1.5..1.5));
                (c, k)
            })
            .collect();
        let forcing = ExpSum { terms };
        let delta = forcing.min_rate();
        if (delta + lambda.re).abs() < 0.05 || (delta + mu.re).abs() < 0.05 {
            continue;
        }
        let g0 = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let dg0 = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        return RandomProblem { lambda, mu, forcing, g0, dg0, delta };
    }
}

/// Runs `count` seeded random problems on `[0, horizon]`; each problem `i`
/// draws from its own stream `seed + i`.
pub fn lemma_suite(seed: u64, count: usize, horizon: f64) -> Result<SuiteReport> {
    let mut rows = Vec::with_capacity(count);
    for index in 0..count {
        let row_seed = seed.wrapping_add(index as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(row_seed);
        let rp = random_problem(&mut rng);
        let problem = rp.problem();
        let dec = decompose(&problem, horizon)?;
        let reference = integrate_direct(&problem, &dec.t, 1e-13)?;
        let max_reconstruction_error = dec
            .reconstruct()
            .iter()
            .zip(&reference)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        rows.push(SuiteRow {
            index,
            seed: row_seed,
            max_reconstruction_error,
            observed_c: dec.bounds.observed_c,
            v_estimate_holds: dec.bounds.v_estimate_holds(),
        });
    }
    Ok(SuiteReport { seed, horizon, rows })
}
