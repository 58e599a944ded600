//! The planar reduction of the invariant minimal-hypersurface equation.
//!
//! A profile curve `(a, b)` is written `(a, b) = e^ρ (cos θ, sin θ)` with
//! tangent direction `(cos φ, sin φ)`. After a change of time parameter the
//! angles follow the autonomous field
//!
//! ```text
//! Y(θ, φ) = (-sin 2θ sin(θ-φ), (n-2p) cos(θ-φ) + n cos(θ+φ))
//! ```
//!
//! and `ρ' = sin 2θ cos(θ-φ)`. The two invariant surfaces asymptotic to the
//! cone come from the unstable manifolds of the saddles `(π/2, 0)` and
//! `(0, π/2)`, which both end at the sink `(θ0, θ0)` (the cone itself).
//!
//! Orbits are integrated in coordinates centered at the sink, `u = θ - θ0`,
//! `v = φ - θ0`, with the field rewritten so that it carries no cancellation
//! near the sink. The angular error tolerance is measured relative to the
//! distance to the sink, which keeps the spiralling tail accurate after the
//! absolute deviation has dropped far below the nominal tolerance.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cone::ConeParams;
use crate::error::{Error, Result};
use crate::rk::{Dopri5, StepFailure};
use crate::spectral::{indicial_roots, ModeIndex, RootKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub theta: f64,
    pub phi: f64,
}

impl PhasePoint {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn distance(&self, other: &PhasePoint) -> f64 {
        (self.theta - other.theta).hypot(self.phi - other.phi)
    }

    /// Representative in `[0, π/2] × (-π/2, π/2]`, using the symmetries
    /// `Y(θ+π, φ) = -Y(θ, φ)`, `Y(θ, φ+π) = -Y(θ, φ)`, `Y(-θ, -φ) = Y(θ, φ)`.
    /// The returned flag is `true` when the field is reversed at the representative.
    pub fn canonical(&self) -> (PhasePoint, bool) {
        let k = (self.theta / PI).floor();
        let mut theta = self.theta - k * PI;
        let mut phi = self.phi;
        let mut reversed = k.rem_euclid(2.0) == 1.0;
        if theta > FRAC_PI_2 {
            // A half-turn in θ reverses the field; (θ, φ) -> (-θ, -φ) keeps it.
            theta = PI - theta;
            phi = -phi;
            reversed = !reversed;
        }
        let m = ((phi + FRAC_PI_2) / PI).ceil() - 1.0;
        phi -= m * PI;
        if m.rem_euclid(2.0) == 1.0 {
            reversed = !reversed;
        }
        (PhasePoint { theta, phi }, reversed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub rho: f64,
    pub point: PhasePoint,
}

/// `Y(θ, φ)`.
pub fn vector_field(params: &ConeParams, point: PhasePoint) -> [f64; 2] {
    let (n, p) = (params.n() as f64, params.p() as f64);
    let (th, ph) = (point.theta, point.phi);
    [
        -(2.0 * th).sin() * (th - ph).sin(),
        (n - 2.0 * p) * (th - ph).cos() + n * (th + ph).cos(),
    ]
}

/// `dρ/ds` at the given angles.
pub fn rho_rate(point: PhasePoint) -> f64 {
    (2.0 * point.theta).sin() * (point.theta - point.phi).cos()
}

/// Analytic Jacobian of `Y`, rows `(Y1, Y2)`, columns `(θ, φ)`.
pub fn jacobian(params: &ConeParams, point: PhasePoint) -> [[f64; 2]; 2] {
    let (n, p) = (params.n() as f64, params.p() as f64);
    let (th, ph) = (point.theta, point.phi);
    let (s2, c2) = (2.0 * th).sin_cos();
    let (sd, cd) = (th - ph).sin_cos();
    let ss = (th + ph).sin();
    [
        [-2.0 * c2 * sd - s2 * cd, s2 * cd],
        [-(n - 2.0 * p) * sd - n * ss, (n - 2.0 * p) * sd - n * ss],
    ]
}

/// Central-difference Jacobian, used as a cross-check of [`jacobian`].
pub fn jacobian_fd(params: &ConeParams, point: PhasePoint, h: f64) -> [[f64; 2]; 2] {
    let at = |dt: f64, dp: f64| vector_field(params, PhasePoint::new(point.theta + dt, point.phi + dp));
    let (tp, tm, pp, pm) = (at(h, 0.0), at(-h, 0.0), at(0.0, h), at(0.0, -h));
    let mut j = [[0.0; 2]; 2];
    for r in 0..2 {
        j[r][0] = (tp[r] - tm[r]) / (2.0 * h);
        j[r][1] = (pp[r] - pm[r]) / (2.0 * h);
    }
    j
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularKind {
    Saddle,
    StableNode,
    StableFocus,
}

impl SingularKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SingularKind::Saddle => "saddle",
            SingularKind::StableNode => "stable-node",
            SingularKind::StableFocus => "stable-focus",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularPointInfo {
    pub location: PhasePoint,
    pub kind: SingularKind,
    pub jacobian: [[f64; 2]; 2],
    /// Ordered by decreasing real part, then decreasing imaginary part.
    pub eigenvalues: [Complex64; 2],
    /// Unit eigenvectors matching `eigenvalues`. For a saddle the first is the
    /// unstable direction and the second the stable one.
    pub eigenvectors: [[Complex64; 2]; 2],
}

impl SingularPointInfo {
    /// Real unstable direction of a saddle.
    pub fn unstable_direction(&self) -> Option<[f64; 2]> {
        (self.kind == SingularKind::Saddle).then(|| [self.eigenvectors[0][0].re, self.eigenvectors[0][1].re])
    }

    pub fn stable_direction(&self) -> Option<[f64; 2]> {
        (self.kind == SingularKind::Saddle).then(|| [self.eigenvectors[1][0].re, self.eigenvectors[1][1].re])
    }

    /// Largest `|J v - λ v|` over the two eigenpairs.
    pub fn eigen_residual(&self) -> f64 {
        let j = &self.jacobian;
        (0..2)
            .map(|i| {
                let (l, v) = (self.eigenvalues[i], self.eigenvectors[i]);
                let r0 = j[0][0] * v[0] + j[0][1] * v[1] - l * v[0];
                let r1 = j[1][0] * v[0] + j[1][1] * v[1] - l * v[1];
                r0.norm().hypot(r1.norm())
            })
            .fold(0.0, f64::max)
    }
}

fn eigen_2x2(j: &[[f64; 2]; 2]) -> ([Complex64; 2], [[Complex64; 2]; 2]) {
    let half_tr = 0.5 * (j[0][0] + j[1][1]);
    let disc = 0.25 * (j[0][0] - j[1][1]).powi(2) + j[0][1] * j[1][0];
    let root = Complex64::new(disc, 0.0).sqrt();
    let vals = [half_tr + root, half_tr - root];
    let scale = j.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
    let vecs = vals.map(|l| {
        // Pick the better conditioned of the two row-derived candidates.
        let c1 = [Complex64::new(j[0][1], 0.0), l - j[0][0]];
        let c2 = [l - j[1][1], Complex64::new(j[1][0], 0.0)];
        let norm = |c: &[Complex64; 2]| (c[0].norm_sqr() + c[1].norm_sqr()).sqrt();
        let (n1, n2) = (norm(&c1), norm(&c2));
        let (c, nc) = if n1 >= n2 { (c1, n1) } else { (c2, n2) };
        if nc <= 1e-14 * scale {
            // Scalar matrix: every direction is an eigenvector.
            return [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        }
        [c[0] / nc, c[1] / nc]
    });
    (vals, vecs)
}

fn classify(params: &ConeParams, location: PhasePoint, kind: SingularKind) -> SingularPointInfo {
    let jac = jacobian(params, location);
    let (eigenvalues, eigenvectors) = eigen_2x2(&jac);
    SingularPointInfo { location, kind, jacobian: jac, eigenvalues, eigenvectors }
}

/// The three singular points of `Y` in `[0, π/2] × (-π/2, π/2]`: the saddles
/// `(π/2, 0)` and `(0, π/2)`, then the sink `(θ0, θ0)`.
///
/// The sink is a focus exactly when the constant-mode indicial roots are
/// complex, i.e. for `n <= 5`.
pub fn singular_points(params: &ConeParams) -> Vec<SingularPointInfo> {
    let theta0 = params.theta0();
    let sink_kind = match indicial_roots(params, ModeIndex::new(0, 0)).kind {
        RootKind::ComplexConjugate => SingularKind::StableFocus,
        _ => SingularKind::StableNode,
    };
    vec![
        classify(params, PhasePoint::new(FRAC_PI_2, 0.0), SingularKind::Saddle),
        classify(params, PhasePoint::new(0.0, FRAC_PI_2), SingularKind::Saddle),
        classify(params, PhasePoint::new(theta0, theta0), sink_kind),
    ]
}

/// `τ(φ) = arctan((cos 2φ - cos 2θ0) / sin 2φ)`, with `τ(0) = π/2`.
pub fn invariant_region_tau(params: &ConeParams, phi: f64) -> Result<f64> {
    let theta0 = params.theta0();
    if !(0.0..=theta0).contains(&phi) {
        return Err(Error::InvalidInput(format!("phi = {phi} outside [0, theta0 = {theta0}]")));
    }
    Ok(((2.0 * phi).cos() - params.cos_2theta0()).atan2((2.0 * phi).sin()).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundarySample {
    pub point: PhasePoint,
    /// Component of `Y` along the inward normal of the square.
    pub inward: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantRegionReport {
    pub phi: f64,
    pub tau: f64,
    pub samples: usize,
    pub min_inward: f64,
    /// Samples with inward component below `-1e-10`.
    pub violations: Vec<BoundarySample>,
    /// Samples where the field is tangent to the boundary (`|inward| <= 1e-10`).
    pub tangencies: Vec<BoundarySample>,
    pub strip_samples: usize,
    /// Smallest `Y2` over the grid on `[0, π/2] × (-π/2, 0)`.
    pub strip_min_y2: f64,
}

impl InvariantRegionReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && self.strip_min_y2 > 0.0
    }
}

pub const INWARD_TOL: f64 = 1e-10;

/// Samples the boundary of `[φ, φ+τ(φ)]²` (a quarter of the samples per side)
/// and the strip `φ ∈ (-π/2, 0)`.
pub fn check_invariant_region(params: &ConeParams, phi: f64, boundary_samples: usize) -> Result<InvariantRegionReport> {
    let tau = invariant_region_tau(params, phi)?;
    if phi >= params.theta0() {
        return Err(Error::InvalidInput("the square degenerates at phi = theta0".into()));
    }
    let (lo, hi) = (phi, phi + tau);
    let per_side = (boundary_samples / 4).max(2);
    let mut violations = Vec::new();
    let mut tangencies = Vec::new();
    let mut min_inward = f64::INFINITY;
    let mut samples = 0;
    for side in 0..4 {
        for i in 0..per_side {
            let x = lo + (hi - lo) * i as f64 / (per_side - 1) as f64;
            let (point, normal) = match side {
                0 => (PhasePoint::new(lo, x), [1.0, 0.0]),
                1 => (PhasePoint::new(hi, x), [-1.0, 0.0]),
                2 => (PhasePoint::new(x, lo), [0.0, 1.0]),
                _ => (PhasePoint::new(x, hi), [0.0, -1.0]),
            };
            let y = vector_field(params, point);
            let inward = y[0] * normal[0] + y[1] * normal[1];
            let sample = BoundarySample { point, inward };
            min_inward = min_inward.min(inward);
            if inward < -INWARD_TOL {
                violations.push(sample);
            } else if inward.abs() <= INWARD_TOL {
                tangencies.push(sample);
            }
            samples += 1;
        }
    }
    let grid = 50;
    let mut strip_min_y2 = f64::INFINITY;
    for i in 0..=grid {
        let theta = FRAC_PI_2 * i as f64 / grid as f64;
        for j in 1..grid {
            let phi = -FRAC_PI_2 + FRAC_PI_2 * j as f64 / grid as f64;
            strip_min_y2 = strip_min_y2.min(vector_field(params, PhasePoint::new(theta, phi))[1]);
        }
    }
    Ok(InvariantRegionReport {
        phi,
        tau,
        samples,
        min_inward,
        violations,
        tangencies,
        strip_samples: (grid + 1) * (grid - 1),
        strip_min_y2,
    })
}

/// Which of the two invariant surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }

    pub fn word(&self) -> &'static str {
        match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" | "p" => Ok(Sign::Plus),
            "-" | "minus" | "m" => Ok(Sign::Minus),
            other => Err(Error::InvalidInput(format!("sign must be + or -, got {other:?}"))),
        }
    }
}

/// Where an orbit was seeded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitOrigin {
    /// The saddle `(π/2, 0)`; the profile closes up on the axis `a = 0`.
    AxisSaddleA,
    /// The saddle `(0, π/2)`; the profile closes up on the axis `b = 0`.
    AxisSaddleB,
    /// Any other start (doubled-cone curves, exact cone).
    Other(PhasePoint),
}

/// Integrator and termination settings for [`integrate_orbit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrbitControls {
    pub atol: f64,
    pub rtol: f64,
    /// Distance of the seed from the singular point.
    pub offset: f64,
    /// Required growth of `ρ` before the orbit may stop.
    pub rho_span: f64,
    /// Required distance to `(θ0, θ0)` before the orbit may stop.
    pub terminal_tol: f64,
    pub max_steps: usize,
    /// Largest step in the flow parameter; bounds the sample spacing.
    pub max_step: f64,
    /// Admissible `φ` range; leaving it (by more than `exit_tol`) is a failure.
    pub phi_window: (f64, f64),
    pub exit_tol: f64,
}

impl Default for OrbitControls {
    fn default() -> Self {
        Self {
            atol: 1e-11,
            rtol: 1e-11,
            offset: 1e-8,
            rho_span: 15.0,
            terminal_tol: 1e-8,
            max_steps: 10_000_000,
            max_step: 0.025,
            phi_window: (-FRAC_PI_2, FRAC_PI_2),
            exit_tol: 1e-9,
        }
    }
}

impl OrbitControls {
    pub fn validate(&self) -> Result<()> {
        for (name, tol) in [("atol", self.atol), ("rtol", self.rtol)] {
            if !(1e-13..=1e-6).contains(&tol) {
                return Err(Error::InvalidInput(format!("{name} = {tol:e} outside [1e-13, 1e-6]")));
            }
        }
        if !(1e-10..=1e-6).contains(&self.offset) {
            return Err(Error::InvalidInput(format!("offset = {:e} outside [1e-10, 1e-6]", self.offset)));
        }
        if !(self.rho_span > 0.0) || !(self.terminal_tol > 0.0) || !(self.max_step > 0.0) || self.max_steps == 0 {
            return Err(Error::InvalidInput("rho span, terminal tolerance, step bounds must be positive".into()));
        }
        if !(self.phi_window.0 < self.phi_window.1) {
            return Err(Error::InvalidInput("empty phi window".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileSample {
    pub s: f64,
    pub state: FlowState,
    /// `(θ - θ0, φ - θ0)`, carried separately so it stays accurate near the sink.
    pub deviation: [f64; 2],
    pub a: f64,
    pub b: f64,
    pub da: f64,
    pub db: f64,
}

impl ProfileSample {
    fn from_deviation(params: &ConeParams, s: f64, y: &[f64; 3]) -> Self {
        let theta0 = params.theta0();
        let (rho, u, v) = (y[0], y[1], y[2]);
        let (theta, phi) = (theta0 + u, theta0 + v);
        let r = rho.exp();
        let speed = r * (2.0 * theta).sin();
        ProfileSample {
            s,
            state: FlowState { rho, point: PhasePoint { theta, phi } },
            deviation: [u, v],
            a: r * theta.cos(),
            b: r * theta.sin(),
            da: speed * phi.cos(),
            db: speed * phi.sin(),
        }
    }

    /// `d(ρ, θ, φ)/ds`.
    pub fn rates(&self, params: &ConeParams) -> [f64; 3] {
        let d = deviation_rhs(params, &[self.state.rho, self.deviation[0], self.deviation[1]]);
        d
    }
}

/// The field in sink-centered coordinates `(ρ, u, v)`.
pub(crate) fn deviation_rhs(params: &ConeParams, y: &[f64; 3]) -> [f64; 3] {
    let (n, p) = (params.n() as f64, params.p() as f64);
    let two_theta0 = 2.0 * params.theta0();
    let (u, v) = (y[1], y[2]);
    let s2 = (two_theta0 + 2.0 * u).sin();
    let (sd, cd) = (u - v).sin_cos();
    let w = u + v;
    let half = (0.5 * (u - v)).sin();
    let dv = -2.0 * (n - 2.0 * p) * half * half - 2.0 * n * (two_theta0 + 0.5 * w).sin() * (0.5 * w).sin();
    [s2 * cd, -s2 * sd, dv]
}

/// A sampled orbit of the reduced system and the profile curve it generates.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileCurve {
    pub params: ConeParams,
    pub origin: OrbitOrigin,
    pub samples: Vec<ProfileSample>,
}

impl ProfileCurve {
    /// The cone itself: `θ = φ = θ0` and `ρ` growing at rate `sin 2θ0`.
    pub fn exact_cone(params: &ConeParams, rho_start: f64, rho_end: f64, ds: f64) -> Result<Self> {
        if !(rho_end > rho_start) || !(ds > 0.0) {
            return Err(Error::InvalidInput("exact cone needs rho_end > rho_start and ds > 0".into()));
        }
        let rate = params.sin_2theta0();
        let steps = ((rho_end - rho_start) / (rate * ds)).ceil() as usize;
        let samples = (0..=steps)
            .map(|i| {
                let s = (i as f64 * ds).min((rho_end - rho_start) / rate);
                ProfileSample::from_deviation(params, s, &[rho_start + rate * s, 0.0, 0.0])
            })
            .collect();
        let theta0 = params.theta0();
        Ok(Self { params: *params, origin: OrbitOrigin::Other(PhasePoint::new(theta0, theta0)), samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> &ProfileSample {
        self.samples.last().expect("profile curves are never empty")
    }

    pub fn terminal_distance(&self) -> f64 {
        let d = self.last().deviation;
        sink_distance(d[0], d[1])
    }

    pub fn rho_span(&self) -> f64 {
        self.last().state.rho - self.samples[0].state.rho
    }

    /// Least-squares slope of `ρ(s)` over the final `efolds` units of `ρ`.
    pub fn tail_rho_slope(&self, efolds: f64) -> f64 {
        let end = self.last().state.rho;
        let tail: Vec<(f64, f64)> = self
            .samples
            .iter()
            .filter(|x| x.state.rho >= end - efolds)
            .map(|x| (x.s, x.state.rho))
            .collect();
        linear_slope(&tail)
    }

    /// Total angle swept by `(θ, φ) - (θ0, θ0)` along the orbit.
    pub fn winding_about_sink(&self) -> f64 {
        let mut total = 0.0;
        let mut prev: Option<f64> = None;
        for x in &self.samples {
            let ang = x.deviation[1].atan2(x.deviation[0]);
            if let Some(p) = prev {
                let mut d = ang - p;
                while d > PI {
                    d -= 2.0 * PI;
                }
                while d < -PI {
                    d += 2.0 * PI;
                }
                total += d;
            }
            prev = Some(ang);
        }
        total
    }

    /// Scaled residual of the profile equation
    /// `a''b' - b''a' + (a'²+b'²)((n-p)a'/b - p b'/a) = 0`, divided by
    /// `(a'²+b'²)^{3/2} max(1/a, 1/b)`, at samples `3..len-3`.
    ///
    /// First derivatives are exact; second derivatives differentiate the
    /// degree-6 interpolant of the first derivatives over 7-sample windows.
    pub fn reduced_ode_residual(&self) -> Vec<(f64, f64)> {
        let (n, p) = (self.params.n() as f64, self.params.p() as f64);
        if self.samples.len() < 7 {
            return Vec::new();
        }
        let s: Vec<f64> = self.samples.iter().map(|x| x.s).collect();
        let da: Vec<f64> = self.samples.iter().map(|x| x.da).collect();
        let db: Vec<f64> = self.samples.iter().map(|x| x.db).collect();
        let fa = crate::quadrature::sliding_fit(&s, &da, 7, 6);
        let fb = crate::quadrature::sliding_fit(&s, &db, 7, 6);
        (3..self.samples.len() - 3)
            .map(|i| {
                let x = &self.samples[i];
                let (a1, b1, a2, b2) = (x.da, x.db, fa[i][1], fb[i][1]);
                let sq = a1 * a1 + b1 * b1;
                let r = a2 * b1 - b2 * a1 + sq * ((n - p) * a1 / x.b - p * b1 / x.a);
                let scale = sq.powf(1.5) * (1.0 / x.a).max(1.0 / x.b);
                (x.s, (r / scale).abs())
            })
            .collect()
    }

    pub fn max_reduced_ode_residual(&self) -> f64 {
        self.reduced_ode_residual().iter().map(|r| r.1).fold(0.0, f64::max)
    }

    /// `ρ` at the first crossing of `θ = target`, by cubic Hermite interpolation.
    pub fn rho_at_theta(&self, target: f64) -> Option<f64> {
        let params = self.params;
        self.samples.windows(2).find_map(|w| {
            let (t0, t1) = (w[0].state.point.theta, w[1].state.point.theta);
            if (t0 - target) * (t1 - target) > 0.0 || t0 == t1 {
                return None;
            }
            let seg = HermiteSegment::new(&params, &w[0], &w[1]);
            let tau = seg.solve_component(1, target);
            Some(seg.eval(tau)[0])
        })
    }

    /// Returns a copy with the flow parameter and `ρ` shifted so that the
    /// first sample sits at `s = 0` with the given `ρ`.
    pub fn rescaled(&self, rho_shift: f64) -> ProfileCurve {
        let mut out = self.clone();
        for x in &mut out.samples {
            let y = [x.state.rho + rho_shift, x.deviation[0], x.deviation[1]];
            *x = ProfileSample::from_deviation(&self.params, x.s, &y);
        }
        out
    }

    /// `(ρ, θ, φ)` polyline with exact tangents, for distance computations.
    pub fn hermite_path(&self) -> HermitePath {
        HermitePath::from_curve(self, |x| [x.state.rho, x.state.point.theta, x.state.point.phi], |_, r| r)
    }
}

fn linear_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in pts {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Cubic Hermite piece in `(ρ, θ, φ)` between two consecutive samples.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HermiteSegment {
    pub h: f64,
    pub y0: [f64; 3],
    pub y1: [f64; 3],
    pub d0: [f64; 3],
    pub d1: [f64; 3],
}

impl HermiteSegment {
    pub fn new(params: &ConeParams, a: &ProfileSample, b: &ProfileSample) -> Self {
        let y = |x: &ProfileSample| [x.state.rho, x.state.point.theta, x.state.point.phi];
        Self { h: b.s - a.s, y0: y(a), y1: y(b), d0: a.rates(params), d1: b.rates(params) }
    }

    /// Position at local parameter `tau ∈ [0, 1]`.
    pub fn eval(&self, tau: f64) -> [f64; 3] {
        let t2 = tau * tau;
        let t3 = t2 * tau;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + tau;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = h00 * self.y0[i] + h10 * self.h * self.d0[i] + h01 * self.y1[i] + h11 * self.h * self.d1[i];
        }
        out
    }

    /// Local parameter where `component` crosses `target`, by bisection.
    pub fn solve_component(&self, component: usize, target: f64) -> f64 {
        let f = |tau: f64| self.eval(tau)[component] - target;
        let (mut lo, mut hi) = (0.0, 1.0);
        let flo = f(lo);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// A piecewise cubic Hermite path through sample points with known tangents.
#[derive(Debug, Clone)]
pub struct HermitePath {
    points: Vec<Vec<f64>>,
    tangents: Vec<Vec<f64>>,
    params: Vec<f64>,
}

impl HermitePath {
    pub fn new(params: Vec<f64>, points: Vec<Vec<f64>>, tangents: Vec<Vec<f64>>) -> Self {
        assert!(params.len() == points.len() && points.len() == tangents.len() && !points.is_empty());
        Self { points, tangents, params }
    }

    /// Builds a path from profile samples with a coordinate map `coords` and
    /// the matching tangent map `tangent(sample, d(ρ,θ,φ)/ds)`.
    pub fn from_curve(
        curve: &ProfileCurve,
        coords: impl Fn(&ProfileSample) -> [f64; 3],
        tangent: impl Fn(&ProfileSample, [f64; 3]) -> [f64; 3],
    ) -> Self {
        let params: Vec<f64> = curve.samples.iter().map(|x| x.s).collect();
        let points = curve.samples.iter().map(|x| coords(x).to_vec()).collect();
        let tangents = curve.samples.iter().map(|x| tangent(x, x.rates(&curve.params)).to_vec()).collect();
        Self::new(params, points, tangents)
    }

    /// Keeps only the listed coordinates.
    pub fn project(&self, keep: &[usize]) -> HermitePath {
        let pick = |v: &Vec<f64>| keep.iter().map(|&i| v[i]).collect::<Vec<_>>();
        HermitePath {
            points: self.points.iter().map(pick).collect(),
            tangents: self.tangents.iter().map(pick).collect(),
            params: self.params.clone(),
        }
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    fn eval(&self, seg: usize, tau: f64) -> Vec<f64> {
        let h = self.params[seg + 1] - self.params[seg];
        let t2 = tau * tau;
        let t3 = t2 * tau;
        let (h00, h10, h01, h11) = (2.0 * t3 - 3.0 * t2 + 1.0, t3 - 2.0 * t2 + tau, -2.0 * t3 + 3.0 * t2, t3 - t2);
        (0..self.points[seg].len())
            .map(|i| {
                h00 * self.points[seg][i]
                    + h10 * h * self.tangents[seg][i]
                    + h01 * self.points[seg + 1][i]
                    + h11 * h * self.tangents[seg + 1][i]
            })
            .collect()
    }

    /// Distance from `x` to the path.
    pub fn distance_to(&self, x: &[f64]) -> f64 {
        let d = |p: &[f64]| p.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let (nearest, mut best) = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, d(p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let segs = [nearest.checked_sub(1), (nearest + 1 < self.points.len()).then_some(nearest)];
        for seg in segs.into_iter().flatten() {
            // Coarse scan then golden-section refinement.
            let scan = 16;
            let mut tb = 0.0;
            let mut db = f64::INFINITY;
            for k in 0..=scan {
                let tau = k as f64 / scan as f64;
                let dk = d(&self.eval(seg, tau));
                if dk < db {
                    db = dk;
                    tb = tau;
                }
            }
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let (mut lo, mut hi) = ((tb - 1.0 / scan as f64).max(0.0), (tb + 1.0 / scan as f64).min(1.0));
            for _ in 0..60 {
                let m1 = hi - g * (hi - lo);
                let m2 = lo + g * (hi - lo);
                if d(&self.eval(seg, m1)) < d(&self.eval(seg, m2)) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            best = best.min(db).min(d(&self.eval(seg, 0.5 * (lo + hi))));
        }
        best
    }

    /// Largest distance from a vertex of `self` to `other`.
    pub fn directed_hausdorff(&self, other: &HermitePath) -> f64 {
        self.points.iter().map(|p| other.distance_to(p)).fold(0.0, f64::max)
    }

    /// Symmetric Hausdorff distance over vertices, measured to the other path's curve.
    pub fn hausdorff(&self, other: &HermitePath) -> f64 {
        self.directed_hausdorff(other).max(other.directed_hausdorff(self))
    }
}

/// Hausdorff distance between the images of two profiles in the `(ρ, θ)`
/// plane over their common `ρ` range. With `swap`, the first image is taken
/// through the exchange of the two sphere factors, `θ ↦ π/2 - θ`.
pub fn image_distance(a: &ProfileCurve, b: &ProfileCurve, swap: bool) -> f64 {
    let path = |c: &ProfileCurve, flip: bool, cap: Option<f64>| {
        let mut c = c.clone();
        if let Some(cap) = cap {
            c.samples.retain(|x| x.state.rho <= cap);
        }
        let sign = if flip { -1.0 } else { 1.0 };
        let shift = if flip { FRAC_PI_2 } else { 0.0 };
        HermitePath::from_curve(
            &c,
            |x| [x.state.rho, shift + sign * x.state.point.theta, 0.0],
            |_, r| [r[0], sign * r[1], 0.0],
        )
        .project(&[0, 1])
    };
    let cap = a.last().state.rho.min(b.last().state.rho);
    let ab = path(a, swap, Some(cap)).directed_hausdorff(&path(b, false, None));
    let ba = path(b, false, Some(cap)).directed_hausdorff(&path(a, swap, None));
    ab.max(ba)
}

/// Distance from the deviation `(u, v)` to the nearest sink `(θ0, θ0 + 2πk)`.
fn sink_distance(u: f64, v: f64) -> f64 {
    let tau = 2.0 * PI;
    u.hypot(v - tau * (v / tau).round())
}

/// Integrates the orbit leaving `start` along `direction` at distance `offset`
/// until it is within `terminal_tol` of a sink `(θ0, θ0 + 2πk)` and `ρ` has grown by
/// `rho_span`. Samples are the accepted steps of a Dormand–Prince 5(4) pair.
pub fn integrate_orbit(
    params: &ConeParams,
    start: FlowState,
    direction: [f64; 2],
    controls: &OrbitControls,
) -> Result<ProfileCurve> {
    controls.validate()?;
    let norm = direction[0].hypot(direction[1]);
    if !(norm > 0.0) {
        return Err(Error::InvalidInput("zero seeding direction".into()));
    }
    let theta0 = params.theta0();
    let off = controls.offset / norm;
    let y0 = [
        start.rho,
        (start.point.theta - theta0) + off * direction[0],
        (start.point.phi - theta0) + off * direction[1],
    ];
    let origin = if start.point.distance(&PhasePoint::new(FRAC_PI_2, 0.0)) < 1e-14 {
        OrbitOrigin::AxisSaddleA
    } else if start.point.distance(&PhasePoint::new(0.0, FRAC_PI_2)) < 1e-14 {
        OrbitOrigin::AxisSaddleB
    } else {
        OrbitOrigin::Other(start.point)
    };
    let p = *params;
    let mut rk = Dopri5::new(move |_, y: &[f64; 3]| deviation_rhs(&p, y), 0.0, y0, 1e-3);
    rk.h_max = controls.max_step;
    let (atol, rtol) = (controls.atol, controls.rtol);
    let scale = move |a: &[f64; 3], b: &[f64; 3]| {
        let dist = sink_distance(a[1], a[2]).min(sink_distance(b[1], b[2]));
        let floor = atol * dist.min(1.0);
        [
            atol + rtol * a[0].abs().max(b[0].abs()),
            floor + rtol * a[1].abs().max(b[1].abs()),
            floor + rtol * a[2].abs().max(b[2].abs()),
        ]
    };
    let mut samples = vec![ProfileSample::from_deviation(params, 0.0, &y0)];
    let (phi_lo, phi_hi) = controls.phi_window;
    loop {
        if rk.accepted >= controls.max_steps {
            return Err(Error::NonConvergence(format!(
                "step budget of {} exhausted at distance {:e} from the sink",
                controls.max_steps,
                sink_distance(rk.y[1], rk.y[2])
            )));
        }
        rk.step(None, scale).map_err(|e| {
            Error::NonConvergence(match e {
                StepFailure::StepUnderflow => format!("step size underflow at s = {}", rk.s),
                StepFailure::NonFinite => format!("non-finite state at s = {}", rk.s),
            })
        })?;
        let sample = ProfileSample::from_deviation(params, rk.s, &rk.y);
        let PhasePoint { theta, phi } = sample.state.point;
        let tol = controls.exit_tol;
        if theta < -tol || theta > FRAC_PI_2 + tol || phi < phi_lo - tol || phi > phi_hi + tol {
            return Err(Error::NonConvergence(format!(
                "orbit left the admissible region at s = {}: (theta, phi) = ({theta}, {phi})",
                rk.s
            )));
        }
        samples.push(sample);
        let dist = sink_distance(rk.y[1], rk.y[2]);
        if dist < controls.terminal_tol && rk.y[0] - y0[0] >= controls.rho_span {
            break;
        }
    }
    Ok(ProfileCurve { params: *params, origin, samples })
}

/// Seed point and direction for the surface of the given sign: `+` leaves
/// `(π/2, 0)` with decreasing `θ`, `-` leaves `(0, π/2)` with increasing `θ`.
pub fn sigma_seed(params: &ConeParams, sign: Sign) -> (FlowState, [f64; 2]) {
    let (n, p) = (params.n() as f64, params.p() as f64);
    match sign {
        Sign::Plus => (
            FlowState { rho: 0.0, point: PhasePoint::new(FRAC_PI_2, 0.0) },
            [-(p + 1.0), -(p - n)],
        ),
        Sign::Minus => (
            FlowState { rho: 0.0, point: PhasePoint::new(0.0, FRAC_PI_2) },
            [n + 1.0 - p, -p],
        ),
    }
}

/// Profile curve of the invariant surface of the given sign, normalized by
/// `ρ = 0` at the seed.
pub fn generate_sigma(params: &ConeParams, sign: Sign, controls: &OrbitControls) -> Result<ProfileCurve> {
    let (start, direction) = sigma_seed(params, sign);
    integrate_orbit(params, start, direction, controls)
}

/// Seeds for representative orbits from the sources `(θ0, θ0 ∓ π)` to the
/// sinks `(θ0, θ0 + 2πk)`, whose profiles are asymptotic to the cone counted twice. Their `φ`
/// ranges exceed the canonical window, so matching controls are returned with
/// each seed.
pub fn doubled_cone_seeds(params: &ConeParams, controls: &OrbitControls) -> [(FlowState, [f64; 2], OrbitControls); 2] {
    let theta0 = params.theta0();
    let below = OrbitControls { phi_window: (theta0 - 2.5 * PI, theta0 + FRAC_PI_2), ..*controls };
    let above = OrbitControls { phi_window: (theta0 - FRAC_PI_2, theta0 + 2.5 * PI), ..*controls };
    [
        (FlowState { rho: 0.0, point: PhasePoint::new(theta0, theta0 - PI) }, [0.0, 1.0], below),
        (FlowState { rho: 0.0, point: PhasePoint::new(theta0, theta0 + PI) }, [0.0, -1.0], above),
    ]
}

/// `Y2`-nullcline `φ(θ)` on `[0, π/2]`: `(n-p) cos θ cos φ = p sin θ sin φ`.
pub fn y2_nullcline(params: &ConeParams, theta: f64) -> f64 {
    let (n, p) = (params.n() as f64, params.p() as f64);
    ((n - p) * theta.cos()).atan2(p * theta.sin())
}
