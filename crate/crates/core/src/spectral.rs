//! Indicial analysis of the Jacobi operator
//! `L u = u_tt + (n/p) Δ_1 u + (n/(n-p)) Δ_2 u + (n+1) u_t + 2n u` over the cone.
//!
//! A separated solution `e^{λt} Φ(x) Ψ(y)` with `Δ_1 Φ = -k(k+p-1) Φ` and
//! `Δ_2 Ψ = -l(l+n-p-1) Ψ` lies in the kernel exactly when
//! `λ² + (n+1) λ + c(k,l) = 0`, where
//! `c(k,l) = 2n - (n/p) k(k+p-1) - (n/(n-p)) l(l+n-p-1)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::asymptotics::TorusGraph;
use crate::cone::ConeParams;
use crate::error::{Error, Result};

/// Root real parts closer than this to a band endpoint are collisions.
pub const BAND_COLLISION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ModeIndex {
    pub k: u32,
    pub l: u32,
}

impl ModeIndex {
    pub fn new(k: u32, l: u32) -> Self {
        Self { k, l }
    }

    pub fn order(&self) -> u32 {
        self.k + self.l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootKind {
    RealDistinct,
    ComplexConjugate,
    RealDouble,
}

impl RootKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RootKind::RealDistinct => "real-distinct",
            RootKind::ComplexConjugate => "complex-conjugate",
            RootKind::RealDouble => "real-double",
        }
    }
}

/// The two indicial roots of a mode. `plus` has the larger real part, or the
/// positive imaginary part for a conjugate pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndicialRoots {
    pub mode: ModeIndex,
    pub plus: Complex64,
    pub minus: Complex64,
    pub kind: RootKind,
}

impl IndicialRoots {
    pub fn is_oscillatory(&self) -> bool {
        self.kind == RootKind::ComplexConjugate
    }

    /// Residual of the characteristic polynomial at a root.
    pub fn poly_residual(params: &ConeParams, mode: ModeIndex, z: Complex64) -> f64 {
        let c = constant_term(params, mode);
        (z * z + (params.n() as f64 + 1.0) * z + c).norm()
    }
}

/// `c(k,l)`, the constant term of the indicial polynomial.
pub fn constant_term(params: &ConeParams, mode: ModeIndex) -> f64 {
    let n = params.n() as f64;
    let p = params.p() as f64;
    let q = params.q() as f64;
    let (k, l) = (mode.k as f64, mode.l as f64);
    2.0 * n - (n / p) * k * (k + p - 1.0) - (n / q) * l * (l + q - 1.0)
}

/// `p q` times the discriminant `(n+1)² - 4 c(k,l)`, in exact integer arithmetic.
fn scaled_discriminant(params: &ConeParams, mode: ModeIndex) -> i128 {
    let n = params.n() as i128;
    let p = params.p() as i128;
    let q = params.q() as i128;
    let (k, l) = (mode.k as i128, mode.l as i128);
    p * q * (n + 1) * (n + 1) - 8 * n * p * q + 4 * n * (q * k * (k + p - 1) + p * l * (l + q - 1))
}

pub fn indicial_roots(params: &ConeParams, mode: ModeIndex) -> IndicialRoots {
    let b = params.n() as f64 + 1.0;
    let c = constant_term(params, mode);
    let disc_sign = scaled_discriminant(params, mode).signum();
    let disc = b * b - 4.0 * c;
    let (plus, minus, kind) = match disc_sign {
        -1 => {
            let im = (-disc).sqrt() / 2.0;
            (Complex64::new(-b / 2.0, im), Complex64::new(-b / 2.0, -im), RootKind::ComplexConjugate)
        }
        0 => (Complex64::new(-b / 2.0, 0.0), Complex64::new(-b / 2.0, 0.0), RootKind::RealDouble),
        _ => {
            // The product of the roots is c, which avoids cancellation in the + root.
            let minus = (-b - disc.sqrt()) / 2.0;
            let plus = c / minus;
            (Complex64::new(plus, 0.0), Complex64::new(minus, 0.0), RootKind::RealDistinct)
        }
    };
    IndicialRoots { mode, plus, minus, kind }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandRoot {
    pub mode: ModeIndex,
    pub branch: Branch,
    pub root: Complex64,
}

/// All indicial roots whose real part lies in `(-upper, -lower]`, `0 < lower < upper`.
///
/// For `k + l >= 2` the constant term is non-positive, so `λ_+ >= 0` and
/// `λ_- <= -(n+1)`, and `λ_-` decreases monotonically in `k` and `l`. The scan
/// stops in each direction once `λ_-` has passed below the band.
pub fn kernel_band(params: &ConeParams, lower: f64, upper: f64) -> Result<Vec<BandRoot>> {
    if !(lower > 0.0 && upper > lower) {
        return Err(Error::InvalidInput(format!(
            "band must satisfy 0 < a < b, got a = {lower}, b = {upper}"
        )));
    }
    let (lo, hi) = (-upper, -lower);
    let mut found = Vec::new();
    let mut visit = |mode: ModeIndex| -> Result<f64> {
        let roots = indicial_roots(params, mode);
        for (branch, z) in [(Branch::Plus, roots.plus), (Branch::Minus, roots.minus)] {
            for endpoint in [lo, hi] {
                let distance = (z.re - endpoint).abs();
                if distance < BAND_COLLISION_TOL {
                    return Err(Error::BandCollision { endpoint, distance });
                }
            }
            let duplicate = branch == Branch::Minus && roots.kind == RootKind::RealDouble;
            if z.re > lo && z.re <= hi && !duplicate {
                found.push(BandRoot { mode, branch, root: z });
            }
        }
        Ok(roots.minus.re)
    };
    let below = |re: f64| re < lo - BAND_COLLISION_TOL;
    let mut k = 0u32;
    loop {
        let mut l = 0u32;
        let first = visit(ModeIndex::new(k, 0))?;
        if k >= 2 && below(first) {
            break;
        }
        loop {
            l += 1;
            let re = visit(ModeIndex::new(k, l))?;
            if k + l >= 2 && below(re) {
                break;
            }
        }
        k += 1;
    }
    found.sort_by(|a, b| {
        (a.mode, a.branch == Branch::Minus).cmp(&(b.mode, b.branch == Branch::Minus))
    });
    Ok(found)
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Dimension of the eigenspace of `Δ` on `S^m` for the eigenvalue `-k(k+m-1)`.
pub fn sphere_eigen_multiplicity(m: u32, k: u32) -> u128 {
    assert!(m >= 1, "sphere dimension must be >= 1");
    let (m, k) = (m as u64, k as u64);
    let lower = if k >= 2 { binomial(m + k - 2, k - 2) } else { 0 };
    binomial(m + k, k) - lower
}

/// Circle harmonic with unit `L²` norm on `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Harmonic {
    Const,
    Cos(u32),
    Sin(u32),
}

impl Harmonic {
    pub fn eval(&self, angle: f64) -> f64 {
        match *self {
            Harmonic::Const => 1.0 / (2.0 * PI).sqrt(),
            Harmonic::Cos(k) => (k as f64 * angle).cos() / PI.sqrt(),
            Harmonic::Sin(k) => (k as f64 * angle).sin() / PI.sqrt(),
        }
    }

    pub fn basis(k: u32) -> Vec<Harmonic> {
        if k == 0 {
            vec![Harmonic::Const]
        } else {
            vec![Harmonic::Cos(k), Harmonic::Sin(k)]
        }
    }

    pub fn label(&self) -> String {
        match self {
            Harmonic::Const => "const".into(),
            Harmonic::Cos(k) => format!("cos{k}"),
            Harmonic::Sin(k) => format!("sin{k}"),
        }
    }
}

/// Coefficients of a torus graph against one basis product `Φ(θ) Ψ(φ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeComponent {
    pub theta: Harmonic,
    pub phi: Harmonic,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeProjection {
    pub mode: ModeIndex,
    pub t: Vec<f64>,
    pub components: Vec<ModeComponent>,
}

impl ModeProjection {
    /// Basis-invariant energy `Σ_α |g_α(t)|²` of the mode at each `t`.
    pub fn energy(&self) -> Vec<f64> {
        (0..self.t.len())
            .map(|i| self.components.iter().map(|c| c.coefficients[i].powi(2)).sum())
            .collect()
    }
}

/// Projects a torus graph (`n = 2`, `p = 1`) onto the mode `(k, l)` by discrete
/// Fourier sums over the periodic grid. Exact for band-limited grid functions.
pub fn torus_mode_project(g: &TorusGraph, mode: ModeIndex) -> Result<ModeProjection> {
    let required = 4 * (mode.order() as usize + 1);
    let points = g.n_theta().min(g.n_phi());
    if points < required {
        return Err(Error::GridTooCoarse { points, required });
    }
    let thetas = g.theta_grid();
    let phis = g.phi_grid();
    let area = (2.0 * PI / g.n_theta() as f64) * (2.0 * PI / g.n_phi() as f64);
    let mut components = Vec::new();
    for th in Harmonic::basis(mode.k) {
        let th_vals: Vec<f64> = thetas.iter().map(|&a| th.eval(a)).collect();
        for ph in Harmonic::basis(mode.l) {
            let ph_vals: Vec<f64> = phis.iter().map(|&a| ph.eval(a)).collect();
            let coefficients = (0..g.t().len())
                .map(|it| {
                    let slice = g.slice(it);
                    let mut acc = 0.0;
                    for (i, row) in slice.chunks_exact(g.n_phi()).enumerate() {
                        let inner: f64 = row.iter().zip(&ph_vals).map(|(v, w)| v * w).sum();
                        acc += th_vals[i] * inner;
                    }
                    acc * area
                })
                .collect();
            components.push(ModeComponent { theta: th, phi: ph, coefficients });
        }
    }
    Ok(ModeProjection { mode, t: g.t().to_vec(), components })
}
