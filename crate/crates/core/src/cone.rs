//! The Simons cone `C_{n,p}` over `sqrt(p/n) S^p x sqrt((n-p)/n) S^{n-p}`.
//!
//! The cone sits in `R^{n+2} = R^{p+1} x R^{n-p+1}` and is parametrized by
//! `X(t, x, y) = e^t (sqrt(p/n) x, sqrt((n-p)/n) y)`, with unit normal
//! `N = (sqrt((n-p)/n) x, -sqrt(p/n) y)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

const UNIT_TOL: f64 = 1e-12;

/// The pair `(n, p)` fixing the cone, with the derived aperture angle.
///
/// `theta0` is the angle of the cone's generating ray in the `(a, b)`
/// quarter plane: `cos theta0 = sqrt(p/n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ConeParams {
    n: u32,
    p: u32,
    cos_theta0: f64,
    sin_theta0: f64,
    theta0: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    n: i64,
    p: i64,
}

impl TryFrom<RawParams> for ConeParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        ConeParams::new(raw.n, raw.p)
    }
}

impl From<ConeParams> for RawParams {
    fn from(c: ConeParams) -> Self {
        RawParams { n: c.n as i64, p: c.p as i64 }
    }
}

impl ConeParams {
    pub fn new(n: i64, p: i64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams { n, p, reason: "n must be >= 2".into() });
        }
        if p < 1 || p > n - 1 {
            return Err(Error::InvalidParams { n, p, reason: "p must satisfy 1 <= p <= n-1".into() });
        }
        let nf = n as f64;
        let pf = p as f64;
        let cos_theta0 = (pf / nf).sqrt();
        let sin_theta0 = ((nf - pf) / nf).sqrt();
        Ok(Self {
            n: n as u32,
            p: p as u32,
            cos_theta0,
            sin_theta0,
            theta0: sin_theta0.atan2(cos_theta0),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// `n - p`, the dimension of the second sphere factor.
    pub fn q(&self) -> u32 {
        self.n - self.p
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn cos_theta0(&self) -> f64 {
        self.cos_theta0
    }

    pub fn sin_theta0(&self) -> f64 {
        self.sin_theta0
    }

    /// `sin 2 theta0 = 2 sqrt(p (n-p)) / n`.
    pub fn sin_2theta0(&self) -> f64 {
        2.0 * ((self.p as f64) * (self.q() as f64)).sqrt() / self.n as f64
    }

    /// `cos 2 theta0 = (2p - n) / n`.
    pub fn cos_2theta0(&self) -> f64 {
        (2.0 * self.p as f64 - self.n as f64) / self.n as f64
    }

    /// The same cone with the two sphere factors exchanged.
    pub fn swapped(&self) -> Self {
        Self::new(self.n as i64, self.q() as i64).expect("swap preserves validity")
    }
}

/// A point of the cone together with its unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct ConePointFrame {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub position: Vec<f64>,
    pub normal: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Evaluates `X(t, x, y)` and `N(x, y)`; `x` lives in `R^{p+1}`, `y` in `R^{n-p+1}`.
pub fn cone_point(params: &ConeParams, t: f64, x: &[f64], y: &[f64]) -> Result<ConePointFrame> {
    if x.len() != params.p as usize + 1 {
        return Err(Error::InvalidInput(format!("x must have {} components", params.p + 1)));
    }
    if y.len() != params.q() as usize + 1 {
        return Err(Error::InvalidInput(format!("y must have {} components", params.q() + 1)));
    }
    for (name, v) in [("x", x), ("y", y)] {
        let nv = norm(v);
        if (nv - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { name, norm: nv });
        }
    }
    let (c, s) = (params.cos_theta0, params.sin_theta0);
    let scale = t.exp();
    let position = x
        .iter()
        .map(|xi| scale * c * xi)
        .chain(y.iter().map(|yi| scale * s * yi))
        .collect();
    let normal = x.iter().map(|xi| s * xi).chain(y.iter().map(|yi| -c * yi)).collect();
    Ok(ConePointFrame { t, x: x.to_vec(), y: y.to_vec(), position, normal })
}

/// Principal curvatures of the cone at log-radius `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeSpectrum {
    /// Curvature along the radial direction (always 0).
    pub radial: f64,
    /// Curvature along `S^p`, multiplicity `p`.
    pub sphere1: f64,
    pub mult1: u32,
    /// Curvature along `S^{n-p}`, multiplicity `n - p`.
    pub sphere2: f64,
    pub mult2: u32,
}

impl ShapeSpectrum {
    /// Sum of the principal curvatures counted with multiplicity.
    pub fn trace(&self) -> f64 {
        self.radial + self.mult1 as f64 * self.sphere1 + self.mult2 as f64 * self.sphere2
    }
}

pub fn shape_operator_eigenvalues(params: &ConeParams, t: f64) -> ShapeSpectrum {
    let p = params.p as f64;
    let q = params.q() as f64;
    let decay = (-t).exp();
    ShapeSpectrum {
        radial: 0.0,
        sphere1: decay * (q / p).sqrt(),
        mult1: params.p,
        sphere2: -decay * (p / q).sqrt(),
        mult2: params.q(),
    }
}

/// Volume of the round unit sphere `S^m`.
pub fn sphere_volume(m: u32) -> f64 {
    let half = (m as f64 + 1.0) / 2.0;
    2.0 * PI.powf(half) / gamma(half)
}

/// Volume of the unit ball of dimension `d`.
pub fn ball_volume(d: u32) -> f64 {
    let half = d as f64 / 2.0;
    PI.powf(half) / gamma(half + 1.0)
}

/// Volume of the link `S_{n,p}`.
pub fn link_volume(params: &ConeParams) -> f64 {
    let (p, q) = (params.p, params.q());
    params.cos_theta0.powi(p as i32)
        * params.sin_theta0.powi(q as i32)
        * sphere_volume(p)
        * sphere_volume(q)
}

/// Density of the cone: `Vol(C ∩ B(0,r)) / (omega_{n+1} r^{n+1})`, independent of `r`.
///
/// `Vol(C ∩ B(0,r)) = r^{n+1} |S_{n,p}| / (n+1)` and `omega_{n+1} = |S^n| / (n+1)`,
/// so the ratio is `|S_{n,p}| / |S^n|`.
pub fn cone_density(params: &ConeParams) -> f64 {
    link_volume(params) / sphere_volume(params.n)
}
