use serde::Serialize;
use statrs::function::beta::beta_reg;

use crate::cone::{ball_volume, link_volume, sphere_volume, ConeParams};
use crate::error::{Error, Result};
use crate::flow::{deviation_rhs, HermiteSegment, OrbitOrigin, ProfileCurve};
use crate::quadrature::GaussRule;
use crate::rk::Dopri5;

/// Density ratios `θ(0, r) = Vol(Σ ∩ B(0, r)) / (ω_{n+1} r^{n+1})`.
#[derive(Debug, Clone, Serialize)]
pub struct DensityProfile {
    pub radii: Vec<f64>,
    pub theta: Vec<f64>,
    /// The ratio at the largest radius.
    pub limit_estimate: f64,
    /// Analytic volume of the piece between the axis (or the cone tip) and
    /// the first profile sample, already included in `theta`, as a ratio at
    /// each radius.
    pub cap_correction: Vec<f64>,
}

impl DensityProfile {
    /// Largest drop `θ(r_i) - θ(r_{i+1})` between consecutive radii (zero if nondecreasing).
    pub fn max_decrease(&self) -> f64 {
        self.theta.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
    }
}

/// `2 cos^{p+1}θ sin^{n-p+1}θ`, so that `a^p b^{n-p} |(a, b)'| = e^{(n+1)ρ} C(θ)`.
fn weight(p: i32, q: i32, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    2.0 * c.powi(p + 1) * s.powi(q + 1)
}

/// Integrates the flow from `y` over `ds` together with
/// `∫ e^{(n+1)(ρ - ρ_start)} C(θ) ds`, at tight tolerance.
fn advance(params: &ConeParams, y: [f64; 3], ds: f64) -> ([f64; 3], f64) {
    if ds <= 0.0 {
        return (y, 0.0);
    }
    let (n, p, q) = (params.n() as f64, params.p() as i32, params.q() as i32);
    let theta0 = params.theta0();
    let rho0 = y[0];
    let p_ = *params;
    let rhs = move |_: f64, z: &[f64; 4]| {
        let d = deviation_rhs(&p_, &[z[0], z[1], z[2]]);
        let w = ((n + 1.0) * (z[0] - rho0)).exp() * weight(p, q, theta0 + z[1]);
        [d[0], d[1], d[2], w]
    };
    let mut rk = Dopri5::new(rhs, 0.0, [y[0], y[1], y[2], 0.0], ds);
    let scale = |a: &[f64; 4], b: &[f64; 4]| {
        let dist = a[1].hypot(a[2]).min(1.0);
        let tol = 1e-13;
        [
            tol * (1.0 + a[0].abs()),
            (tol * (dist + a[1].abs().max(b[1].abs()))).max(f64::MIN_POSITIVE),
            (tol * (dist + a[2].abs().max(b[2].abs()))).max(f64::MIN_POSITIVE),
            1e-16 + tol * b[3].abs(),
        ]
    };
    while rk.s < ds {
        if rk.step(Some(ds), scale).is_err() {
            return ([f64::NAN; 3], f64::NAN);
        }
    }
    ([rk.y[0], rk.y[1], rk.y[2]], rk.y[3])
}

/// Flow parameter offset inside `[0, h]` where `ρ` reaches `target`, by
/// Newton iteration on re-integrated states; the Hermite estimate seeds it.
fn crossing(params: &ConeParams, seg: &HermiteSegment, y: [f64; 3], target: f64) -> f64 {
    let mut ds = seg.solve_component(0, target) * seg.h;
    for _ in 0..6 {
        let (z, _) = advance(params, y, ds);
        let rate = deviation_rhs(params, &z)[0];
        if rate == 0.0 {
            break;
        }
        let step = (target - z[0]) / rate;
        ds = (ds + step).clamp(0.0, seg.h);
        if step.abs() < 1e-15 * seg.h.max(1.0) {
            break;
        }
    }
    ds
}

/// Density ratios about the origin for each radius (increasing).
///
/// The volume uses `Vol(S^p) Vol(S^{n-p}) ∫ a^p b^{n-p} |(a, b)'| ds` over the
/// part of the profile with `a² + b² <= r²`, with each sample interval
/// re-integrated together with the volume element. The piece closest to the
/// axis, before the first sample, is added analytically as a product of a
/// small ball and a sphere; for the exact cone the tip below the first sample
/// is added in closed form.
pub fn density_profile(curve: &ProfileCurve, radii: &[f64]) -> Result<DensityProfile> {
    let params = curve.params;
    let (n, p, q) = (params.n(), params.p(), params.q());
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("radii must be positive and strictly increasing".into()));
    }
    let rho_end = curve.last().state.rho;
    let max_radius = rho_end.exp();
    if let Some(&r) = radii.iter().find(|&&r| r > max_radius) {
        return Err(Error::RadiusBeyondCoverage { radius: r, max: max_radius });
    }
    let first = &curve.samples[0];
    let np1 = n as f64 + 1.0;
    // Volume before the first sample, relative to e^{(n+1) ρ_first}. The
    // exact cone is instead completed down to its tip, which also covers
    // radii below the first sample.
    let rho0 = first.state.rho;
    let cone_tip = match curve.origin {
        OrbitOrigin::Other(_) if first.deviation == [0.0, 0.0] => true,
        OrbitOrigin::Other(_) => {
            return Err(Error::InvalidInput(
                "density needs a profile that closes up on an axis, or the exact cone".into(),
            ))
        }
        _ => false,
    };
    let cap_scaled = match curve.origin {
        OrbitOrigin::AxisSaddleA => {
            ball_volume(p + 1) * first.a.powi(p as i32 + 1) * sphere_volume(q) * first.b.powi(q as i32)
        }
        OrbitOrigin::AxisSaddleB => {
            ball_volume(q + 1) * first.b.powi(q as i32 + 1) * sphere_volume(p) * first.a.powi(p as i32)
        }
        OrbitOrigin::Other(_) => 0.0,
    } / (np1 * rho0).exp();
    let cap_at = |lr: f64| {
        if cone_tip {
            link_volume(&params) / np1 * (np1 * (rho0 - lr)).exp().min(1.0)
        } else if rho0 <= lr {
            cap_scaled * (np1 * (rho0 - lr)).exp()
        } else {
            0.0
        }
    };
    let ys: Vec<[f64; 3]> = curve
        .samples
        .iter()
        .map(|x| [x.state.rho, x.deviation[0], x.deviation[1]])
        .collect();
    let segs: Vec<HermiteSegment> = curve.samples.windows(2).map(|w| HermiteSegment::new(&params, &w[0], &w[1])).collect();
    // Volume element integral over each interval, relative to e^{(n+1) ρ_i}.
    let pieces: Vec<f64> = segs.iter().zip(&ys).map(|(seg, y)| advance(&params, *y, seg.h).1).collect();
    let spheres = sphere_volume(p) * sphere_volume(q);
    let omega = ball_volume(n + 1);
    let mut theta = Vec::with_capacity(radii.len());
    let mut caps = Vec::with_capacity(radii.len());
    for &r in radii {
        let lr = r.ln();
        let scale = |rho: f64| (np1 * (rho - lr)).exp();
        let mut total = 0.0;
        for (i, seg) in segs.iter().enumerate() {
            let (r0, r1) = (ys[i][0], ys[i + 1][0]);
            if r0 <= lr && r1 <= lr {
                total += pieces[i] * scale(r0);
            } else if r0 <= lr {
                let ds = crossing(&params, seg, ys[i], lr);
                total += advance(&params, ys[i], ds).1 * scale(r0);
            } else if r1 <= lr {
                let ds = crossing(&params, seg, ys[i], lr);
                total += (pieces[i] - advance(&params, ys[i], ds).1) * scale(r0);
            }
        }
        if !total.is_finite() {
            return Err(Error::NonConvergence(format!("volume integration failed at r = {r}")));
        }
        let cap = cap_at(lr);
        theta.push((spheres * total + cap) / omega);
        caps.push(cap / omega);
    }
    let limit_estimate = *theta.last().unwrap();
    Ok(DensityProfile { radii: radii.to_vec(), theta, limit_estimate, cap_correction: caps })
}

/// Density ratios about the point where the profile meets the axis.
#[derive(Debug, Clone, Serialize)]
pub struct PoleDensity {
    /// The center, as `(a, b)` in the profile plane.
    pub center: [f64; 2],
    pub radii: Vec<f64>,
    pub theta: Vec<f64>,
}

/// Fraction of the unit sphere `S^m` where the first coordinate is at least `c`.
fn cap_fraction(m: u32, c: f64) -> f64 {
    if c >= 1.0 {
        return 0.0;
    }
    if c <= -1.0 {
        return 1.0;
    }
    let half = 0.5 * beta_reg(m as f64 / 2.0, 0.5, 1.0 - c * c);
    if c >= 0.0 {
        half
    } else {
        1.0 - half
    }
}

/// Density ratios `θ(P, r)` about the axis point `P` of a capped profile.
/// They tend to 1 as `r → 0` since the surface is smooth at `P`.
///
/// A profile point `(a, b)` contributes the fraction of its sphere orbit
/// lying in `B(P, r)`, which is a spherical-cap fraction given by the
/// regularized incomplete beta function.
pub fn density_at_pole(curve: &ProfileCurve, radii: &[f64]) -> Result<PoleDensity> {
    let params = curve.params;
    let (n, p, q) = (params.n(), params.p(), params.q());
    // Work in coordinates where the collapsing factor comes first.
    let swap = match curve.origin {
        OrbitOrigin::AxisSaddleA => false,
        OrbitOrigin::AxisSaddleB => true,
        OrbitOrigin::Other(_) => {
            return Err(Error::InvalidInput("pole density needs a profile that closes up on an axis".into()))
        }
    };
    let (kp, m) = if swap { (q, p) } else { (p, q) };
    let ab = |a: f64, b: f64| if swap { (b, a) } else { (a, b) };
    let first = &curve.samples[0];
    let (_, pole) = ab(first.a, first.b);
    let segs: Vec<HermiteSegment> = curve.samples.windows(2).map(|w| HermiteSegment::new(&params, &w[0], &w[1])).collect();
    let point_at = |seg: &HermiteSegment, tau: f64| {
        let y = seg.eval(tau);
        let e = y[0].exp();
        let (a, b) = ab(e * y[1].cos(), e * y[1].sin());
        // The last entry is the speed |(a, b)'| = e^ρ sin 2θ.
        (a, b, e * (2.0 * y[1]).sin())
    };
    let dist2 = |a: f64, b: f64| a * a + (b - pole) * (b - pole);
    let rule = GaussRule::new(16);
    let spheres = sphere_volume(kp) * sphere_volume(m);
    let omega = ball_volume(n + 1);
    let mut theta = Vec::with_capacity(radii.len());
    for &r in radii {
        let r2 = r * r;
        // End of the portion of the profile within distance r of the pole.
        let end = segs.iter().position(|seg| {
            let (a, b, _) = point_at(seg, 1.0);
            dist2(a, b) >= r2
        });
        let Some(k) = end else {
            return Err(Error::RadiusBeyondCoverage { radius: r, max: f64::NAN });
        };
        let seg = &segs[k];
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let (a, b, _) = point_at(seg, mid);
            if dist2(a, b) < r2 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s_end = curve.samples[k].s + lo * seg.h;
        let s0 = curve.samples[0].s;
        // s = s0 + L w(τ) with w(τ) = (1 - cos πτ)/2 flattens both endpoints.
        let len = s_end - s0;
        let panels = 64;
        let mut total = 0.0;
        let mut idx = 0;
        for j in 0..panels {
            let (t0, t1) = (j as f64 / panels as f64, (j + 1) as f64 / panels as f64);
            for (tau, w) in rule.panel(t0, t1) {
                let pi = std::f64::consts::PI;
                let s = s0 + len * 0.5 * (1.0 - (pi * tau).cos());
                let jac = len * 0.5 * pi * (pi * tau).sin();
                while idx + 1 < segs.len() && curve.samples[idx + 1].s < s {
                    idx += 1;
                }
                let sg = &segs[idx];
                let local = ((s - curve.samples[idx].s) / sg.h).clamp(0.0, 1.0);
                let (a, b, speed) = point_at(sg, local);
                let c = (a * a + b * b + pole * pole - r2) / (2.0 * b * pole);
                let frac = cap_fraction(m, c);
                total += w * jac * a.powi(kp as i32) * b.powi(m as i32) * speed * frac;
            }
        }
        theta.push(spheres * total / (omega * r.powi(n as i32 + 1)));
    }
    let center = if swap { [pole, 0.0] } else { [0.0, pole] };
    Ok(PoleDensity { center, radii: radii.to_vec(), theta })
}
