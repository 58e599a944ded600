//! End-to-end numerical checks for one surface: orbit convergence,
//! minimality residuals, decay law, density ratios and, for `n = 2`, flux.

use std::fmt::Write as _;

use serde::Serialize;

use crate::asymptotics::{
    density_profile, fit_decay, flux, profile_to_graph, residual_invariant, sigma_torus, DecayFit, DensityProfile,
    FluxResult, RadialGraph,
};
use crate::cone::{cone_density, ConeParams};
use crate::error::{Error, Result};
use crate::flow::{generate_sigma, OrbitControls, ProfileCurve, Sign};
use crate::spectral::{indicial_roots, ModeIndex};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value <= tolerance }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub density_radii: usize,
    pub flux_times: Vec<f64>,
    pub flux_resolution: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { density_radii: 120, flux_times: vec![3.0, 4.0, 5.0, 6.0, 7.0, 8.0], flux_resolution: 256 }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub params: ConeParams,
    pub sign: Sign,
    pub curve: ProfileCurve,
    pub graph: RadialGraph,
    pub checks: Vec<Check>,
    pub decay: Option<DecayFit>,
    pub density: DensityProfile,
    pub flux: Vec<FluxResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "surface: n = {}, p = {}, sign {}", self.params.n(), self.params.p(), self.sign);
        let _ = writeln!(s, "profile samples: {}, rho span: {:.6}", self.curve.len(), self.curve.rho_span());
        let _ = writeln!(s, "density estimate: {:.10}", self.density.limit_estimate);
        let _ = writeln!(s, "cone density: {:.10}", cone_density(&self.params));
        if let Some(d) = &self.decay {
            let _ = writeln!(s, "decay fit: rate {:.8}, frequency {:.8}, window [{:.4}, {:.4}]", d.rate, d.frequency, d.window.0, d.window.1);
        }
        for f in &self.flux {
            let _ = writeln!(s, "flux at t = {:.2}: |F| = {:.3e}", f.t, f.norm());
        }
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{} {}: {:.6e} (tolerance {:.1e})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.tolerance
            );
        }
        let _ = writeln!(s, "overall: {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }

    /// `r,theta,cap_correction`.
    pub fn density_csv(&self) -> String {
        let mut s = String::from("r,theta,cap_correction\n");
        for ((r, th), cap) in self.density.radii.iter().zip(&self.density.theta).zip(&self.density.cap_correction) {
            let _ = writeln!(s, "{r:.16e},{th:.16e},{cap:.16e}");
        }
        s
    }

    /// `t,g,dg,ddg` over the decay fit window.
    pub fn decay_csv(&self) -> String {
        let mut s = String::from("t,g,dg,ddg\n");
        let window = self.decay.as_ref().map_or((f64::NEG_INFINITY, f64::INFINITY), |d| d.window);
        for x in self.graph.samples().iter().filter(|x| x.t >= window.0 && x.t <= window.1) {
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", x.t, x.g, x.dg, x.ddg);
        }
        s
    }

    /// `t,F1,F2,F3,F4,norm`.
    pub fn flux_csv(&self) -> String {
        let mut s = String::from("t,F1,F2,F3,F4,norm\n");
        for f in &self.flux {
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                f.t,
                f.flux[0],
                f.flux[1],
                f.flux[2],
                f.flux[3],
                f.norm()
            );
        }
        s
    }
}

/// Log-spaced radii between `lo` and `hi`.
pub fn log_radii(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1).max(1) as f64).exp()).collect()
}

/// Runs every check for the surface of the given sign.
pub fn verify(params: &ConeParams, sign: Sign, controls: &OrbitControls, opts: &VerifyOptions) -> Result<VerifyReport> {
    let curve = generate_sigma(params, sign, controls)?;
    let mut checks = vec![
        Check::at_most("terminal distance", curve.terminal_distance(), 1e-6),
        Check::at_most(
            "tail rho slope relative error",
            (curve.tail_rho_slope(5.0) / params.sin_2theta0() - 1.0).abs(),
            0.01,
        ),
        Check::at_most("reduced ODE residual", curve.max_reduced_ode_residual(), 1e-6),
    ];
    let graph = profile_to_graph(&curve)?;
    checks.push(Check::at_most("invariant residual (scaled)", residual_invariant(params, &graph)?.max_scaled(), 1e-5));

    let roots = indicial_roots(params, ModeIndex::new(0, 0));
    let decay = match fit_decay(&graph, &roots) {
        Ok(fit) => {
            let dominant = roots.plus;
            let tol = if roots.is_oscillatory() { 0.05 } else { 0.02 };
            checks.push(Check::at_most("decay rate relative error", (fit.rate / dominant.re - 1.0).abs(), tol));
            if roots.is_oscillatory() {
                checks.push(Check::at_most(
                    "decay frequency relative error",
                    (fit.frequency / dominant.im.abs() - 1.0).abs(),
                    tol,
                ));
            }
            Some(fit)
        }
        Err(e @ Error::InsufficientWindow(_)) => {
            checks.push(Check { name: format!("decay fit ({e})"), value: f64::NAN, tolerance: 0.0, passed: false });
            None
        }
        Err(e) => return Err(e),
    };

    let r_max = 0.999 * curve.last().state.rho.exp();
    let density = density_profile(&curve, &log_radii(0.1, r_max, opts.density_radii))?;
    checks.push(Check::at_most("density decrease", density.max_decrease(), 1e-8));
    checks.push(Check::at_most(
        "density limit error",
        (density.limit_estimate - cone_density(params)).abs(),
        1e-3,
    ));

    let mut fluxes = Vec::new();
    if params.n() == 2 && !opts.flux_times.is_empty() {
        let lo = opts.flux_times.iter().cloned().fold(f64::INFINITY, f64::min) - 0.5;
        let hi = opts.flux_times.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 0.5;
        let (torus, _) = sigma_torus(&curve, lo, hi, 1.0 / 128.0, 32, 32)?;
        for &t in &opts.flux_times {
            fluxes.push(flux(&torus, t, opts.flux_resolution)?);
        }
        let worst = fluxes.iter().map(|f| f.norm()).fold(0.0, f64::max);
        checks.push(Check::at_most("flux norm", worst, 1e-6));
    }
    Ok(VerifyReport { params: *params, sign, curve, graph, checks, decay, density, flux: fluxes })
}
