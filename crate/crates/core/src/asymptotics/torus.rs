//! Normal graphs over the Clifford cone `C_{2,1}` that depend on all three
//! variables `(t, θ, φ)`, sampled on a uniform periodic angular grid.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use super::graph::{profile_to_graph, RadialGraph};
use crate::cone::ConeParams;
use crate::error::{Error, Result};
use crate::flow::{deviation_rhs, ProfileCurve};
use crate::rk::Dopri5;

/// Smallest angular resolution accepted by the residual.
pub const MIN_RESIDUAL_GRID: usize = 32;
/// Smallest angular resolution accepted by the flux quadrature.
pub const MIN_FLUX_RESOLUTION: usize = 64;

/// `g(t, θ, φ)` on `t_k × (2πi/N_θ) × (2πj/N_φ)`, stored slice by slice,
/// each slice row-major in `θ` then `φ`.
#[derive(Debug, Clone)]
pub struct TorusGraph {
    t: Vec<f64>,
    n_theta: usize,
    n_phi: usize,
    values: Vec<f64>,
}

impl TorusGraph {
    pub fn from_fn(ts: Vec<f64>, n_theta: usize, n_phi: usize, f: impl Fn(f64, f64, f64) -> f64) -> Result<Self> {
        if ts.is_empty() || n_theta == 0 || n_phi == 0 {
            return Err(Error::InvalidInput("torus grid must be non-empty".into()));
        }
        if let Some(i) = ts.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonMonotone { index: i + 1 });
        }
        let (dth, dph) = (2.0 * PI / n_theta as f64, 2.0 * PI / n_phi as f64);
        let mut values = Vec::with_capacity(ts.len() * n_theta * n_phi);
        for &t in &ts {
            for i in 0..n_theta {
                for j in 0..n_phi {
                    values.push(f(t, i as f64 * dth, j as f64 * dph));
                }
            }
        }
        let graph = Self { t: ts, n_theta, n_phi, values };
        graph.check_amplitude()?;
        Ok(graph)
    }

    /// A graph that is constant on every slice.
    pub fn invariant(ts: Vec<f64>, g: &[f64], n_theta: usize, n_phi: usize) -> Result<Self> {
        if g.len() != ts.len() {
            return Err(Error::InvalidInput("one value per t is required".into()));
        }
        let lookup: Vec<(f64, f64)> = ts.iter().copied().zip(g.iter().copied()).collect();
        Self::from_fn(ts, n_theta, n_phi, |t, _, _| {
            lookup.iter().find(|(s, _)| *s == t).map(|x| x.1).unwrap_or(f64::NAN)
        })
    }

    fn check_amplitude(&self) -> Result<()> {
        let per = self.n_theta * self.n_phi;
        match self.values.iter().position(|g| !(g.abs() < 1.0)) {
            Some(i) => Err(Error::AmplitudeBound { t: self.t[i / per], g: self.values[i] }),
            None => Ok(()),
        }
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn theta_grid(&self) -> Vec<f64> {
        (0..self.n_theta).map(|i| 2.0 * PI * i as f64 / self.n_theta as f64).collect()
    }

    pub fn phi_grid(&self) -> Vec<f64> {
        (0..self.n_phi).map(|j| 2.0 * PI * j as f64 / self.n_phi as f64).collect()
    }

    pub fn slice(&self, it: usize) -> &[f64] {
        let per = self.n_theta * self.n_phi;
        &self.values[it * per..(it + 1) * per]
    }

    pub fn value(&self, it: usize, i: usize, j: usize) -> f64 {
        self.slice(it)[i * self.n_phi + j]
    }

    /// Uniform `t` spacing, or an error if the nodes are not equally spaced.
    fn uniform_step(&self) -> Result<f64> {
        let h = (self.t[self.t.len() - 1] - self.t[0]) / (self.t.len() - 1) as f64;
        if self.t.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
            return Err(Error::InvalidInput("t nodes must be uniformly spaced".into()));
        }
        Ok(h)
    }
}

/// Spectral differentiation and resampling of periodic samples.
struct Periodic {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Periodic {
    fn new(planner: &mut FftPlanner<f64>, n: usize) -> Self {
        Self { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    fn wavenumber(&self, k: usize) -> f64 {
        let n = self.n;
        if 2 * k < n {
            k as f64
        } else if 2 * k == n {
            0.0
        } else {
            k as f64 - n as f64
        }
    }

    /// Derivative of the trigonometric interpolant (the Nyquist mode is dropped).
    fn diff(&self, data: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        for (k, c) in buf.iter_mut().enumerate() {
            *c *= Complex64::new(0.0, self.wavenumber(k));
        }
        self.inv.process(&mut buf);
        buf.iter().map(|c| c.re / self.n as f64).collect()
    }
}

/// Trigonometric interpolation of `data` onto `m >= data.len()` equispaced points.
fn resample(planner: &mut FftPlanner<f64>, data: &[f64], m: usize) -> Vec<f64> {
    let n = data.len();
    if m == n {
        return data.to_vec();
    }
    let mut buf: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..(n + 1) / 2 {
        out[k] = buf[k];
    }
    for k in 1..(n + 1) / 2 {
        out[m - k] = buf[n - k];
    }
    if n % 2 == 0 {
        out[n / 2] = buf[n / 2] * 0.5;
        out[m - n / 2] = buf[n / 2] * 0.5;
    }
    planner.plan_fft_inverse(m).process(&mut out);
    out.iter().map(|c| c.re / n as f64).collect()
}

/// Trigonometric interpolation of an `n_theta × n_phi` slice onto `m × m`.
fn upsample(planner: &mut FftPlanner<f64>, data: &[f64], n_theta: usize, n_phi: usize, m: usize) -> Vec<f64> {
    let rows: Vec<f64> = data.chunks_exact(n_phi).flat_map(|r| resample(planner, r, m)).collect();
    let mut out = vec![0.0; m * m];
    let mut line = vec![0.0; n_theta];
    for j in 0..m {
        for i in 0..n_theta {
            line[i] = rows[i * m + j];
        }
        for (i, v) in resample(planner, &line, m).into_iter().enumerate() {
            out[i * m + j] = v;
        }
    }
    out
}

/// Applies a line operation along `φ` (contiguous) or `θ` (strided) of a slice.
fn along_phi(data: &[f64], n_phi: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
    data.chunks_exact(n_phi).flat_map(|row| f(row)).collect()
}

fn along_theta(data: &[f64], n_theta: usize, n_phi: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
    let mut out = vec![0.0; n_theta * n_phi];
    let mut line = vec![0.0; n_theta];
    for j in 0..n_phi {
        for i in 0..n_theta {
            line[i] = data[i * n_phi + j];
        }
        for (i, v) in f(&line).into_iter().enumerate() {
            out[i * n_phi + j] = v;
        }
    }
    out
}

/// Residual of the minimal-surface equation on the interior `t` nodes.
#[derive(Debug, Clone)]
pub struct TorusResidual {
    pub t: Vec<f64>,
    pub n_theta: usize,
    pub n_phi: usize,
    /// One slice per entry of `t`, laid out like [`TorusGraph`].
    pub values: Vec<f64>,
}

impl TorusResidual {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, r| m.max(r.abs()))
    }

    /// Largest `|R|` on each slice.
    pub fn slice_max(&self) -> Vec<f64> {
        self.values
            .chunks_exact(self.n_theta * self.n_phi)
            .map(|s| s.iter().fold(0.0f64, |m, r| m.max(r.abs())))
            .collect()
    }
}

/// Full minimal-surface residual over `C_{2,1}`:
///
/// ```text
/// ∂_t((g + g_t)/W) + 2/(1+g) ∂_θ(g_θ/((1+g)W)) + 2/(1-g) ∂_φ(g_φ/((1-g)W))
///     + (2g + 2(g + g_t)) / (W (1 - g²)),
/// W² = 1 + (g + g_t)² + 2 g_θ²/(1+g)² + 2 g_φ²/(1-g)².
/// ```
///
/// Angular derivatives are spectral; `t` derivatives are fourth-order central
/// differences, so the first and last two `t` nodes carry no residual.
pub fn residual_full_torus(graph: &TorusGraph) -> Result<TorusResidual> {
    let (nt, nth, nph) = (graph.t.len(), graph.n_theta, graph.n_phi);
    let points = nth.min(nph);
    if points < MIN_RESIDUAL_GRID {
        return Err(Error::GridTooCoarse { points, required: MIN_RESIDUAL_GRID });
    }
    if nt < 5 {
        return Err(Error::InsufficientWindow(format!("{nt} t nodes, need at least 5")));
    }
    let h = graph.uniform_step()?;
    let mut planner = FftPlanner::new();
    let dth = Periodic::new(&mut planner, nth);
    let dph = Periodic::new(&mut planner, nph);
    let per = nth * nph;
    let mut out = TorusResidual { t: Vec::new(), n_theta: nth, n_phi: nph, values: Vec::with_capacity((nt - 4) * per) };
    for it in 2..nt - 2 {
        let s = |k: isize| graph.slice((it as isize + k) as usize);
        let (m2, m1, z, p1, p2) = (s(-2), s(-1), s(0), s(1), s(2));
        let gt: Vec<f64> = (0..per).map(|i| (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h)).collect();
        let gtt: Vec<f64> = (0..per)
            .map(|i| (-m2[i] + 16.0 * m1[i] - 30.0 * z[i] + 16.0 * p1[i] - p2[i]) / (12.0 * h * h))
            .collect();
        let gth = along_theta(z, nth, nph, |l| dth.diff(l));
        let gph = along_phi(z, nph, |l| dph.diff(l));
        let gtth = along_theta(&gt, nth, nph, |l| dth.diff(l));
        let gtph = along_phi(&gt, nph, |l| dph.diff(l));
        let mut w = vec![0.0; per];
        let mut fth = vec![0.0; per];
        let mut fph = vec![0.0; per];
        for i in 0..per {
            let (g, x) = (z[i], z[i] + gt[i]);
            let (up, dn) = (1.0 + g, 1.0 - g);
            w[i] = (1.0 + x * x + 2.0 * gth[i].powi(2) / (up * up) + 2.0 * gph[i].powi(2) / (dn * dn)).sqrt();
            fth[i] = gth[i] / (up * w[i]);
            fph[i] = gph[i] / (dn * w[i]);
        }
        let dfth = along_theta(&fth, nth, nph, |l| dth.diff(l));
        let dfph = along_phi(&fph, nph, |l| dph.diff(l));
        for i in 0..per {
            let (g, g1, g2) = (z[i], gt[i], gtt[i]);
            let (up, dn) = (1.0 + g, 1.0 - g);
            let x = g + g1;
            let xt = g1 + g2;
            let wsq_t = 2.0 * x * xt + 4.0 * gth[i] * gtth[i] / (up * up) - 4.0 * gth[i].powi(2) * g1 / up.powi(3)
                + 4.0 * gph[i] * gtph[i] / (dn * dn)
                + 4.0 * gph[i].powi(2) * g1 / dn.powi(3);
            let wi = w[i];
            let wt = wsq_t / (2.0 * wi);
            let r = xt / wi - x * wt / (wi * wi)
                + 2.0 / up * dfth[i]
                + 2.0 / dn * dfph[i]
                + (2.0 * g + 2.0 * x) / (wi * up * dn);
            out.values.push(r);
        }
        out.t.push(graph.t[it]);
    }
    Ok(out)
}

/// `⟨∧(a, b, c), x⟩ = det(a, b, c, x)` in `R⁴`.
fn wedge(a: &[f64; 4], b: &[f64; 4], c: &[f64; 4]) -> [f64; 4] {
    let minor = |skip: usize| {
        let rows: Vec<usize> = (0..4).filter(|&r| r != skip).collect();
        let m = |r: usize, v: &[f64; 4]| v[rows[r]];
        m(0, a) * (m(1, b) * m(2, c) - m(2, b) * m(1, c)) - m(0, b) * (m(1, a) * m(2, c) - m(2, a) * m(1, c))
            + m(0, c) * (m(1, a) * m(2, b) - m(2, a) * m(1, b))
    };
    let mut out = [0.0; 4];
    for (i, o) in out.iter_mut().enumerate() {
        // Cofactor of entry (i, 3) in the matrix with columns a, b, c, x.
        let sign = if (i + 3) % 2 == 0 { 1.0 } else { -1.0 };
        *o = sign * minor(i);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxResult {
    pub t: f64,
    pub flux: [f64; 4],
    pub resolution: usize,
}

impl FluxResult {
    pub fn norm(&self) -> f64 {
        self.flux.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Flux of the boundary conormal across the slice `{t} × T²` of the surface
/// `e^t (R + g N)`, with `R = (x, y)/√2`, `N = (x, -y)/√2`.
///
/// The unit normal is `∧(Y_t, Y_θ, Y_φ)` normalized, and the integrand is
/// `∧(n, Y_θ, Y_φ)`, i.e. the conormal times the slice area element; it is
/// summed with the periodic trapezoid rule on a `resolution²` grid. Values of
/// `g` and `g_t` at `t` come from six-point Lagrange interpolation in `t`,
/// then trigonometric interpolation in angle when `resolution` exceeds the
/// stored grid.
pub fn flux(graph: &TorusGraph, t: f64, resolution: usize) -> Result<FluxResult> {
    if resolution < MIN_FLUX_RESOLUTION {
        return Err(Error::GridTooCoarse { points: resolution, required: MIN_FLUX_RESOLUTION });
    }
    if resolution < graph.n_theta.max(graph.n_phi) {
        return Err(Error::InvalidInput(format!(
            "flux resolution {resolution} is below the stored grid {}x{}",
            graph.n_theta, graph.n_phi
        )));
    }
    let ts = &graph.t;
    if ts.len() < 6 || t < ts[0] || t > ts[ts.len() - 1] {
        return Err(Error::InvalidInput(format!("t = {t} outside the stored range or too few t nodes")));
    }
    let k = ts.partition_point(|&s| s <= t).saturating_sub(3).min(ts.len() - 6);
    let nodes = &ts[k..k + 6];
    // Lagrange weights for the value and the derivative at t.
    let mut wv = [0.0; 6];
    let mut wd = [0.0; 6];
    for i in 0..6 {
        let denom: f64 = (0..6).filter(|&j| j != i).map(|j| nodes[i] - nodes[j]).product();
        let num: f64 = (0..6).filter(|&j| j != i).map(|j| t - nodes[j]).product();
        wv[i] = num / denom;
        let mut d = 0.0;
        for m in (0..6).filter(|&m| m != i) {
            d += (0..6).filter(|&j| j != i && j != m).map(|j| t - nodes[j]).product::<f64>();
        }
        wd[i] = d / denom;
    }
    let per = graph.n_theta * graph.n_phi;
    let mut g = vec![0.0; per];
    let mut gt = vec![0.0; per];
    for i in 0..6 {
        let s = graph.slice(k + i);
        for c in 0..per {
            g[c] += wv[i] * s[c];
            gt[c] += wd[i] * s[c];
        }
    }
    let mut planner = FftPlanner::new();
    let m = resolution;
    let g = upsample(&mut planner, &g, graph.n_theta, graph.n_phi, m);
    let gt = upsample(&mut planner, &gt, graph.n_theta, graph.n_phi, m);
    let d = Periodic::new(&mut planner, m);
    let gth = along_theta(&g, m, m, |l| d.diff(l));
    let gph = along_phi(&g, m, |l| d.diff(l));
    // The frame is built at unit scale and the slice factor e^{2t} applied
    // at the end. The cone's own conormal, which integrates to zero, is
    // subtracted pointwise so the sum does not cancel O(e^{2t}) terms.
    let mut total = [0.0; 4];
    for i in 0..m {
        let th = 2.0 * PI * i as f64 / m as f64;
        let (st, ct) = th.sin_cos();
        for j in 0..m {
            let ph = 2.0 * PI * j as f64 / m as f64;
            let (sp, cp) = ph.sin_cos();
            let c = i * m + j;
            let r = [ct / SQRT_2, st / SQRT_2, cp / SQRT_2, sp / SQRT_2];
            let nn = [ct / SQRT_2, st / SQRT_2, -cp / SQRT_2, -sp / SQRT_2];
            let eth = [-st, ct, 0.0, 0.0];
            let eph = [0.0, 0.0, -sp, cp];
            let comb = |a: f64, u: &[f64; 4], b: f64, v: &[f64; 4]| [0, 1, 2, 3].map(|k| a * u[k] + b * v[k]);
            let conormal = |g: f64, gt: f64, gth: f64, gph: f64| {
                let yt = comb(1.0, &r, g + gt, &nn);
                let yth = comb((1.0 + g) / SQRT_2, &eth, gth, &nn);
                let yph = comb((1.0 - g) / SQRT_2, &eph, gph, &nn);
                let normal = wedge(&yt, &yth, &yph);
                let len = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
                (len > 1e-300 && len.is_finite()).then(|| wedge(&normal.map(|v| v / len), &yth, &yph))
            };
            let surface = conormal(g[c], gt[c], gth[c], gph[c]).ok_or(Error::DegenerateFrame { theta: th, phi: ph })?;
            let cone = conormal(0.0, 0.0, 0.0, 0.0).unwrap();
            for k in 0..4 {
                total[k] += surface[k] - cone[k];
            }
        }
    }
    let cell = (2.0 * PI / m as f64).powi(2) * (2.0 * t).exp();
    Ok(FluxResult { t, flux: total.map(|v| v * cell), resolution })
}

/// Limit of the flux for `g = e^{-2t} (X, N)`: `½ ∫∫ (X, N) N dθ dφ = (π²/2) X`.
pub fn synthetic_flux_limit(x: [f64; 4]) -> [f64; 4] {
    x.map(|v| 0.5 * PI * PI * v)
}

/// Samples an invariant surface over `C_{2,1}` on the uniform `t` grid
/// `t_start, t_start + dt, …` up to `t_end`, by integrating the flow with `t`
/// as the independent variable from the nearest earlier graph sample. Returns
/// the torus grid and the matching radial graph (exact `g'`, fitted `g''`).
pub fn sigma_torus(
    curve: &ProfileCurve,
    t_start: f64,
    t_end: f64,
    dt: f64,
    n_theta: usize,
    n_phi: usize,
) -> Result<(TorusGraph, RadialGraph)> {
    let params: ConeParams = curve.params;
    if (params.n(), params.p()) != (2, 1) {
        return Err(Error::InvalidInput("torus graphs exist only over C_{2,1}".into()));
    }
    if !(dt > 0.0) || !(t_end > t_start) {
        return Err(Error::InvalidInput("need dt > 0 and t_end > t_start".into()));
    }
    let graph = profile_to_graph(curve)?;
    let (g0, g1) = graph.t_range();
    if t_start < g0 || t_end > g1 {
        return Err(Error::InvalidInput(format!(
            "requested t range [{t_start}, {t_end}] outside the graph range [{g0}, {g1}]"
        )));
    }
    let start = graph.source_start().unwrap_or(0);
    let k = graph.samples().iter().rposition(|x| x.t <= t_start).unwrap();
    let sample = &curve.samples[start + k];
    let theta0 = params.theta0();
    let rhs = move |_: f64, y: &[f64; 3]| {
        let d = deviation_rhs(&params, y);
        let (u, v) = (y[1], y[2]);
        let rate = (2.0 * theta0 + 2.0 * u).sin() * v.cos() / u.cos();
        [d[0] / rate, d[1] / rate, d[2] / rate]
    };
    let y0 = [sample.state.rho, sample.deviation[0], sample.deviation[1]];
    let mut rk = Dopri5::new(rhs, graph.samples()[k].t, y0, 1e-3);
    rk.h_max = 0.05;
    let scale = |a: &[f64; 3], b: &[f64; 3]| {
        let dist = a[1].hypot(a[2]).min(1.0);
        let tol = 1e-12;
        [
            tol * (1.0 + a[0].abs()),
            (tol * (dist + a[1].abs().max(b[1].abs()))).max(f64::MIN_POSITIVE),
            (tol * (dist + a[2].abs().max(b[2].abs()))).max(f64::MIN_POSITIVE),
        ]
    };
    let count = ((t_end - t_start) / dt + 1e-9).floor() as usize + 1;
    let ts: Vec<f64> = (0..count).map(|i| t_start + i as f64 * dt).collect();
    let mut g = Vec::with_capacity(count);
    let mut dg = Vec::with_capacity(count);
    for &target in &ts {
        while rk.s < target {
            rk.step(Some(target), scale)
                .map_err(|e| Error::NonConvergence(format!("t-parametrized flow: {e:?}")))?;
        }
        let (u, v) = (rk.y[1], rk.y[2]);
        g.push(-u.tan());
        dg.push((u - v).sin() / (u.cos() * v.cos()));
    }
    let radial = RadialGraph::from_samples(&params, &ts, &g, Some(&dg))?;
    let torus = TorusGraph::invariant(ts, &g, n_theta, n_phi)?;
    Ok((torus, radial))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::residual_invariant;
    use crate::flow::{generate_sigma, OrbitControls, Sign};
    use crate::spectral::{indicial_roots, Harmonic, ModeIndex};

    fn grid(t0: f64, t1: f64, h: f64) -> Vec<f64> {
        let n = ((t1 - t0) / h).round() as usize;
        (0..=n).map(|i| t0 + i as f64 * h).collect()
    }

    #[test]
    fn wedge_of_basis() {
        let e = |i: usize| {
            let mut v = [0.0; 4];
            v[i] = 1.0;
            v
        };
        assert_eq!(wedge(&e(0), &e(1), &e(2)), [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(wedge(&e(1), &e(0), &e(2)), [0.0, 0.0, 0.0, -1.0]);
        assert_eq!(wedge(&e(1), &e(2), &e(3)), [-1.0, 0.0, 0.0, 0.0]);
        let (a, b, c) = ([0.3, -1.0, 2.0, 0.5], [1.1, 0.2, -0.7, 0.4], [-0.6, 0.9, 0.1, 1.3]);
        let w = wedge(&a, &b, &c);
        for v in [a, b, c] {
            assert!(w.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>().abs() < 1e-14);
        }
    }

    #[test]
    fn resampling_is_exact_for_band_limited_data() {
        let mut planner = FftPlanner::new();
        let f = |x: f64| 0.3 + (2.0 * x).cos() - 0.5 * (5.0 * x).sin() + 0.25 * (8.0 * x).cos();
        let data: Vec<f64> = (0..16).map(|i| f(2.0 * PI * i as f64 / 16.0)).collect();
        let fine = resample(&mut planner, &data, 64);
        for (i, v) in fine.iter().enumerate() {
            assert!((v - f(2.0 * PI * i as f64 / 64.0)).abs() < 1e-13);
        }
        let d = Periodic::new(&mut planner, 16).diff(&data);
        for (i, v) in d.iter().enumerate() {
            let x = 2.0 * PI * i as f64 / 16.0;
            // The Nyquist term cos 8x has no recoverable derivative on 16 points.
            assert!((v - (-2.0 * (2.0 * x).sin() - 2.5 * (5.0 * x).cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_graph_has_zero_residual_and_flux() {
        let g = TorusGraph::from_fn(grid(0.0, 1.0, 1.0 / 64.0), 32, 32, |_, _, _| 0.0).unwrap();
        assert_eq!(residual_full_torus(&g).unwrap().max_abs(), 0.0);
        let f = flux(&g, 0.5, 64).unwrap();
        assert!(f.norm() < 1e-12);
    }

    #[test]
    fn coarse_grids_are_rejected() {
        let g = TorusGraph::from_fn(grid(0.0, 1.0, 0.1), 16, 32, |_, _, _| 0.0).unwrap();
        assert!(matches!(residual_full_torus(&g), Err(Error::GridTooCoarse { points: 16, .. })));
        let g = TorusGraph::from_fn(grid(0.0, 1.0, 0.1), 32, 32, |_, _, _| 0.0).unwrap();
        assert!(matches!(flux(&g, 0.5, 32), Err(Error::GridTooCoarse { .. })));
        assert!(TorusGraph::from_fn(vec![0.0, 1.0], 32, 32, |_, _, _| 1.2).is_err());
    }

    /// `ε Re(e^{λt}) Φ(θ) Ψ(φ)` for each unit-L² basis product of each mode
    /// with `k + l <= 2` and each of its roots.
    #[test]
    fn kernel_modes_leave_quadratic_residuals() {
        let c = ConeParams::new(2, 1).unwrap();
        let modes = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
        for (k, l) in modes {
            let roots = indicial_roots(&c, ModeIndex::new(k, l));
            for lambda in [roots.plus, roots.minus] {
                let t0 = if lambda.re > 0.0 { -1.0 } else { 0.0 };
                for (hth, hph) in Harmonic::basis(k).into_iter().flat_map(|a| Harmonic::basis(l).into_iter().map(move |b| (a, b))) {
                    for eps in [1e-4, 1e-5, 1e-6] {
                        let g = TorusGraph::from_fn(grid(t0, t0 + 1.0, 1.0 / 128.0), 32, 32, |t, th, ph| {
                            eps * (lambda * t).exp().re * hth.eval(th) * hph.eval(ph)
                        })
                        .unwrap();
                        let r = residual_full_torus(&g).unwrap().max_abs();
                        assert!(r <= 10.0 * eps * eps, "mode ({k},{l}) λ={lambda} ε={eps}: {r:e}");
                    }
                }
            }
        }
    }

    #[test]
    fn synthetic_flux_approaches_limit() {
        let limit = synthetic_flux_limit([1.0, 0.0, 0.0, 0.0]);
        assert!((limit[0] - PI * PI / 2.0).abs() < 1e-15);
        let g = TorusGraph::from_fn(grid(3.5, 8.5, 1.0 / 64.0), 32, 32, |t, th, _| {
            (-2.0 * t).exp() * th.cos() / SQRT_2
        })
        .unwrap();
        for t in [4.0, 6.0, 8.0] {
            let f = flux(&g, t, 256).unwrap();
            let err = f.flux.iter().zip(&limit).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let lim = limit.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(err <= (-0.5 * t).exp() * lim, "t={t} err={err:e}");
        }
    }

    #[test]
    fn clifford_surface_torus_checks() {
        let c = ConeParams::new(2, 1).unwrap();
        let curve = generate_sigma(&c, Sign::Plus, &OrbitControls::default()).unwrap();
        let (torus, radial) = sigma_torus(&curve, 2.5, 8.5, 1.0 / 128.0, 32, 32).unwrap();
        let full = residual_full_torus(&torus).unwrap();
        let inv = residual_invariant(&c, &radial).unwrap();
        for (it, t) in full.t.iter().enumerate() {
            let j = radial.samples().iter().position(|x| x.t == *t).unwrap();
            let slice = &full.values[it * 1024..(it + 1) * 1024];
            for r in slice {
                assert!((r - inv.residual[j]).abs() < 1e-8, "t={t}: {r:e} vs {:e}", inv.residual[j]);
            }
        }
        for t in [3.0, 6.0, 8.0] {
            let f = flux(&torus, t, 256).unwrap();
            assert!(f.norm() <= 1e-6, "t={t}: {:e}", f.norm());
        }
    }
}
