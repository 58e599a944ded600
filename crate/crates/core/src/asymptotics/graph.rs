use serde::Serialize;

use crate::cone::ConeParams;
use crate::error::{Error, Result};
use crate::flow::ProfileCurve;
use crate::quadrature::sliding_fit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphSample {
    pub t: f64,
    pub g: f64,
    pub dg: f64,
    pub ddg: f64,
}

/// An invariant hypersurface written as `e^t (R + g(t) N)` over the cone.
#[derive(Debug, Clone, Serialize)]
pub struct RadialGraph {
    params: ConeParams,
    samples: Vec<GraphSample>,
    /// Index of the first graph sample in the source profile, if any.
    source_start: Option<usize>,
}

/// Fraction of the amplitude bound below which profile samples are accepted
/// into the graph tail.
const TAIL_FRACTION: f64 = 0.5;

impl RadialGraph {
    /// Graph from exact values `(g, g', g'')` at each `t`.
    pub fn from_fn(params: &ConeParams, ts: &[f64], f: impl Fn(f64) -> [f64; 3]) -> Result<Self> {
        let samples = ts
            .iter()
            .map(|&t| {
                let [g, dg, ddg] = f(t);
                GraphSample { t, g, dg, ddg }
            })
            .collect();
        Self::checked(params, samples, None)
    }

    /// Graph from sampled `g` (and optionally exact `g'`); missing derivatives
    /// come from quartic least-squares fits over 7-sample windows.
    pub fn from_samples(params: &ConeParams, ts: &[f64], g: &[f64], dg: Option<&[f64]>) -> Result<Self> {
        if ts.len() != g.len() || dg.is_some_and(|d| d.len() != ts.len()) {
            return Err(Error::InvalidInput("graph sample arrays differ in length".into()));
        }
        if ts.len() < 7 {
            return Err(Error::InsufficientWindow(format!("{} graph samples, need at least 7", ts.len())));
        }
        check_increasing(ts)?;
        let fitted_dg: Vec<f64>;
        let dg = match dg {
            Some(d) => d,
            None => {
                fitted_dg = sliding_fit(ts, g, 7, 4).iter().map(|f| f[1]).collect();
                &fitted_dg
            }
        };
        let ddg = sliding_fit(ts, dg, 7, 4);
        let samples = (0..ts.len())
            .map(|i| GraphSample { t: ts[i], g: g[i], dg: dg[i], ddg: ddg[i][1] })
            .collect();
        Self::checked(params, samples, None)
    }

    fn checked(params: &ConeParams, samples: Vec<GraphSample>, source_start: Option<usize>) -> Result<Self> {
        let ts: Vec<f64> = samples.iter().map(|s| s.t).collect();
        check_increasing(&ts)?;
        let bound = Self::amplitude_bound(params);
        if let Some(s) = samples.iter().find(|s| !(s.g.abs() < bound)) {
            return Err(Error::AmplitudeBound { t: s.t, g: s.g });
        }
        Ok(Self { params: *params, samples, source_start })
    }

    /// `min(√(p/(n-p)), √((n-p)/p))`: the graph must stay between the axes.
    pub fn amplitude_bound(params: &ConeParams) -> f64 {
        let (p, q) = (params.p() as f64, params.q() as f64);
        (p / q).sqrt().min((q / p).sqrt())
    }

    pub fn params(&self) -> &ConeParams {
        &self.params
    }

    pub fn samples(&self) -> &[GraphSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }

    pub fn source_start(&self) -> Option<usize> {
        self.source_start
    }

    /// The profile points `(a, b) = e^t (cos θ0 + g sin θ0, sin θ0 - g cos θ0)`.
    pub fn to_profile_points(&self) -> Vec<[f64; 2]> {
        let (c, s) = (self.params.cos_theta0(), self.params.sin_theta0());
        self.samples
            .iter()
            .map(|x| {
                let r = x.t.exp();
                [r * (c + x.g * s), r * (s - x.g * c)]
            })
            .collect()
    }

    /// Largest relative mismatch between [`to_profile_points`](Self::to_profile_points)
    /// and the profile samples this graph was built from.
    pub fn round_trip_error(&self, curve: &ProfileCurve) -> Option<f64> {
        let start = self.source_start?;
        let pts = self.to_profile_points();
        Some(
            pts.iter()
                .zip(&curve.samples[start..])
                .zip(&self.samples)
                .map(|((p, c), x)| ((p[0] - c.a).abs().max((p[1] - c.b).abs())) / x.t.exp())
                .fold(0.0, f64::max),
        )
    }
}

fn check_increasing(ts: &[f64]) -> Result<()> {
    match ts.windows(2).position(|w| !(w[1] > w[0])) {
        Some(i) => Err(Error::NonMonotone { index: i + 1 }),
        None => Ok(()),
    }
}

/// Writes the tail of a profile curve as a normal graph over the cone.
///
/// With `u = θ - θ0` and `v = φ - θ0`, the graph coordinates are
/// `t = ρ + ln cos u` and `g = -tan u`; along the flow
/// `dg/dt = sin(u - v) / (cos u cos v)` exactly. The tail starts after the
/// last sample where `|g|` exceeds half the amplitude bound or where `t`
/// fails to advance.
pub fn profile_to_graph(curve: &ProfileCurve) -> Result<RadialGraph> {
    let params = curve.params;
    let bound = RadialGraph::amplitude_bound(&params);
    let two_theta0 = 2.0 * params.theta0();
    let raw: Vec<(f64, f64, f64, bool)> = curve
        .samples
        .iter()
        .map(|x| {
            let [u, v] = x.deviation;
            let (cu, cv) = (u.cos(), v.cos());
            let t = x.state.rho + cu.ln();
            let g = -u.tan();
            let dg = (u - v).sin() / (cu * cv);
            let advancing = cu > 0.0 && (two_theta0 + 2.0 * u).sin() * cv / cu > 0.0;
            (t, g, dg, advancing && g.abs() <= TAIL_FRACTION * bound)
        })
        .collect();
    let start = raw.iter().rposition(|r| !r.3).map_or(0, |i| i + 1);
    if raw.len() < start + 7 {
        return Err(Error::InsufficientWindow(format!(
            "only {} samples in the graph tail",
            raw.len().saturating_sub(start)
        )));
    }
    let tail = &raw[start..];
    let ts: Vec<f64> = tail.iter().map(|r| r.0).collect();
    check_increasing(&ts).map_err(|e| match e {
        Error::NonMonotone { index } => Error::NonMonotone { index: index + start },
        e => e,
    })?;
    let dg: Vec<f64> = tail.iter().map(|r| r.2).collect();
    let ddg = sliding_fit(&ts, &dg, 7, 4);
    let samples = tail
        .iter()
        .zip(&ddg)
        .map(|(r, d)| GraphSample { t: r.0, g: r.1, dg: r.2, ddg: d[1] })
        .collect();
    RadialGraph::checked(&params, samples, Some(start))
}

/// Pointwise residual of the minimal-surface equation for a graph that does
/// not depend on the sphere variables.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantResidual {
    pub t: Vec<f64>,
    pub residual: Vec<f64>,
    /// `|residual| / (|g''| + (n+1)|g'| + 2n|g|)`, the residual relative to
    /// the size of the linear part.
    pub scaled: Vec<f64>,
}

impl InvariantResidual {
    pub fn max_abs(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn max_scaled(&self) -> f64 {
        self.scaled.iter().fold(0.0, |m, r| m.max(*r))
    }
}

/// Evaluates
///
/// ```text
/// (g' + g'')/W³ + (n g + (g + g')(n + n κ g)) / (W (1 + κ g - g²)),
/// W = (1 + (g + g')²)^{1/2},  κ = (n - 2p)/√(p(n-p))
/// ```
///
/// at every sample. Its linearization at `g = 0` is `g'' + (n+1) g' + 2n g`.
pub fn residual_invariant(params: &ConeParams, graph: &RadialGraph) -> Result<InvariantResidual> {
    let n = params.n() as f64;
    let (p, q) = (params.p() as f64, params.q() as f64);
    let kappa = (n - 2.0 * p) / (p * q).sqrt();
    let (up, down) = ((q / p).sqrt(), (p / q).sqrt());
    let mut out = InvariantResidual { t: Vec::new(), residual: Vec::new(), scaled: Vec::new() };
    for x in graph.samples() {
        let (g, g1, g2) = (x.g, x.dg, x.ddg);
        let f1 = 1.0 + up * g;
        let f2 = 1.0 - down * g;
        if !(f1 > 0.0 && f2 > 0.0) {
            return Err(Error::AmplitudeBound { t: x.t, g });
        }
        let m = g + g1;
        let w = (1.0 + m * m).sqrt();
        let r = (g1 + g2) / (w * w * w) + (n * g + m * (n + n * kappa * g)) / (w * f1 * f2);
        let lin = g2.abs() + (n + 1.0) * g1.abs() + 2.0 * n * g.abs();
        out.t.push(x.t);
        out.residual.push(r);
        out.scaled.push(if lin > 0.0 { r.abs() / lin } else { r.abs() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{generate_sigma, OrbitControls, Sign};

    fn params(n: i64, p: i64) -> ConeParams {
        ConeParams::new(n, p).unwrap()
    }

    #[test]
    fn cone_is_the_zero_graph() {
        let c = params(3, 1);
        let cone = ProfileCurve::exact_cone(&c, -1.0, 4.0, 0.05).unwrap();
        let g = profile_to_graph(&cone).unwrap();
        assert_eq!(g.len(), cone.len());
        assert!(g.samples().iter().all(|x| x.g.abs() < 1e-15 && x.dg.abs() < 1e-15));
        assert!(residual_invariant(&c, &g).unwrap().max_abs() < 1e-14);
        assert!(g.round_trip_error(&cone).unwrap() < 1e-14);
    }

    #[test]
    fn non_minimal_test_function_sees_the_linear_operator() {
        let c = params(2, 1);
        let ts: Vec<f64> = (0..200).map(|i| 2.0 + 0.05 * i as f64).collect();
        let eps = 0.01;
        let g = RadialGraph::from_fn(&c, &ts, |t| {
            let e = eps * (-2.0 * t).exp();
            [e, -2.0 * e, 4.0 * e]
        })
        .unwrap();
        let r = residual_invariant(&c, &g).unwrap();
        for (t, res) in r.t.iter().zip(&r.residual) {
            let lin = 2.0 * eps * (-2.0 * t).exp();
            // The remainder is quadratic in g.
            assert!((res - lin).abs() < 10.0 * (eps * (-2.0 * t).exp()).powi(2), "t={t}");
        }
    }

    #[test]
    fn kernel_exponentials_are_annihilated_to_first_order() {
        let c = params(7, 3);
        let roots = crate::spectral::indicial_roots(&c, crate::spectral::ModeIndex::new(0, 0));
        let l = roots.plus.re;
        let ts: Vec<f64> = (0..100).map(|i| 0.1 * i as f64).collect();
        for eps in [1e-3, 1e-5] {
            let g = RadialGraph::from_fn(&c, &ts, |t| {
                let e = eps * (l * t).exp();
                [e, l * e, l * l * e]
            })
            .unwrap();
            assert!(residual_invariant(&c, &g).unwrap().max_abs() < 100.0 * eps * eps);
        }
    }

    #[test]
    fn sigma_graph_round_trip_and_residual() {
        for (n, p, sign) in [(2, 1, Sign::Plus), (3, 1, Sign::Minus), (7, 3, Sign::Plus)] {
            let c = params(n, p);
            let curve = generate_sigma(&c, sign, &OrbitControls::default()).unwrap();
            let g = profile_to_graph(&curve).unwrap();
            assert!(g.round_trip_error(&curve).unwrap() < 1e-10);
            let r = residual_invariant(&c, &g).unwrap();
            assert!(r.max_scaled() < 1e-5, "({n},{p}) {}", r.max_scaled());
        }
    }

    #[test]
    fn clifford_graph_oscillates() {
        let c = params(2, 1);
        let curve = generate_sigma(&c, Sign::Plus, &OrbitControls::default()).unwrap();
        let g = profile_to_graph(&curve).unwrap();
        let changes = g.samples().windows(2).filter(|w| w[0].g * w[1].g < 0.0).count();
        assert!(changes >= 3);
        let head = g.samples()[..20].iter().fold(0.0f64, |m, x| m.max(x.g.abs()));
        let tail = g.samples()[g.len() - 20..].iter().fold(0.0f64, |m, x| m.max(x.g.abs()));
        assert!(tail < 1e-6 * head);
    }

    #[test]
    fn rejects_bad_graphs() {
        let c = params(2, 1);
        assert!(matches!(
            RadialGraph::from_fn(&c, &[0.0, 1.0], |_| [1.5, 0.0, 0.0]),
            Err(Error::AmplitudeBound { .. })
        ));
        assert!(matches!(
            RadialGraph::from_fn(&c, &[0.0, 0.0], |_| [0.0, 0.0, 0.0]),
            Err(Error::NonMonotone { index: 1 })
        ));
    }
}
