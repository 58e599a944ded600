use serde::Serialize;

use super::graph::RadialGraph;
use crate::error::{Error, Result};
use crate::spectral::IndicialRoots;

/// Minimum number of sign changes for an oscillatory fit.
pub const MIN_SIGN_CHANGES: usize = 10;
/// Minimum decay, in e-folds, for a monotone fit.
pub const MIN_EFOLDS: f64 = 5.0;
/// Minimum window length in `t`.
pub const MIN_WINDOW: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayKind {
    Oscillatory,
    Monotone,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub kind: DecayKind,
    /// Fitted exponential rate (negative for decay).
    pub rate: f64,
    /// Fitted angular frequency; zero for a monotone fit.
    pub frequency: f64,
    pub window: (f64, f64),
    /// RMS residual of the log-linear regression.
    pub residual: f64,
    /// Sign changes (oscillatory) or e-folds (monotone) inside the window.
    pub support: f64,
    /// Peak or sample points used by the regression, `(t, ln|g|)`.
    pub points: Vec<(f64, f64)>,
    /// Zero crossings used for the frequency.
    pub crossings: Vec<f64>,
}

/// Fits the decay of `g` over the last three quarters of its `t` range.
pub fn fit_decay(graph: &RadialGraph, expected: &IndicialRoots) -> Result<DecayFit> {
    let (t0, t1) = graph.t_range();
    fit_decay_in(graph, expected, (t0 + 0.25 * (t1 - t0), t1))
}

/// Fits `g ~ A e^{rate t} cos(frequency t + c)` (complex expected roots) or
/// `g ~ A e^{rate t}` (real roots) on the given window.
pub fn fit_decay_in(graph: &RadialGraph, expected: &IndicialRoots, window: (f64, f64)) -> Result<DecayFit> {
    if !(window.1 - window.0 >= MIN_WINDOW) {
        return Err(Error::InsufficientWindow(format!(
            "window [{}, {}] shorter than {MIN_WINDOW}",
            window.0, window.1
        )));
    }
    let pts: Vec<(f64, f64)> = graph
        .samples()
        .iter()
        .filter(|x| x.t >= window.0 && x.t <= window.1)
        .map(|x| (x.t, x.g))
        .collect();
    if pts.len() < 7 {
        return Err(Error::InsufficientWindow(format!("{} samples in window", pts.len())));
    }
    if expected.is_oscillatory() {
        fit_oscillatory(&pts, window)
    } else {
        fit_monotone(&pts, window)
    }
}

fn fit_monotone(pts: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let logs: Vec<(f64, f64)> = pts.iter().filter(|p| p.1 != 0.0).map(|&(t, g)| (t, g.abs().ln())).collect();
    let (slope, _, residual) = regress(&logs);
    let (first, last) = (logs[0].1, logs[logs.len() - 1].1);
    let efolds = (first - last).abs();
    if efolds < MIN_EFOLDS {
        return Err(Error::InsufficientWindow(format!("{efolds:.2} e-folds, need {MIN_EFOLDS}")));
    }
    Ok(DecayFit {
        kind: DecayKind::Monotone,
        rate: slope,
        frequency: 0.0,
        window,
        residual,
        support: efolds,
        points: logs,
        crossings: Vec::new(),
    })
}

fn fit_oscillatory(pts: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    // Crossing positions by linear interpolation, with the sample index before each.
    let mut crossings = Vec::new();
    let mut crossing_idx = Vec::new();
    for (i, w) in pts.windows(2).enumerate() {
        let ((t0, g0), (t1, g1)) = (w[0], w[1]);
        if g0 != 0.0 && g0 * g1 <= 0.0 && g1 != 0.0 {
            crossings.push(t0 - g0 * (t1 - t0) / (g1 - g0));
            crossing_idx.push(i);
        }
    }
    if crossings.len() < MIN_SIGN_CHANGES {
        return Err(Error::InsufficientWindow(format!(
            "{} sign changes, need {MIN_SIGN_CHANGES}",
            crossings.len()
        )));
    }
    let mut peaks = Vec::new();
    for w in crossing_idx.windows(2) {
        let (lo, hi) = (w[0] + 1, w[1]);
        if hi < lo {
            continue;
        }
        let k = (lo..=hi).max_by(|&a, &b| pts[a].1.abs().total_cmp(&pts[b].1.abs())).unwrap();
        peaks.push(refine_peak(pts, k));
    }
    let (slope, _, residual) = regress(&peaks);
    let spacing = (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
    Ok(DecayFit {
        kind: DecayKind::Oscillatory,
        rate: slope,
        frequency: std::f64::consts::PI / spacing,
        window,
        residual,
        support: crossings.len() as f64,
        points: peaks,
        crossings,
    })
}

/// Vertex of the parabola through `ln|g|` at samples `k-1, k, k+1`.
fn refine_peak(pts: &[(f64, f64)], k: usize) -> (f64, f64) {
    let lg = |i: usize| pts[i].1.abs().ln();
    if k == 0 || k + 1 >= pts.len() {
        return (pts[k].0, lg(k));
    }
    let (x0, x1, x2) = (pts[k - 1].0, pts[k].0, pts[k + 1].0);
    let (y0, y1, y2) = (lg(k - 1), lg(k), lg(k + 1));
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let c2 = (d12 - d01) / (x2 - x0);
    if !(c2 < 0.0) {
        return (x1, y1);
    }
    let c1 = d01 - c2 * (x0 + x1);
    let xv = (-c1 / (2.0 * c2)).clamp(x0, x2);
    let yv = y1 + (xv - x1) * (d01 + c2 * (xv - x0));
    (xv, yv)
}

/// Least squares line; returns slope, intercept and RMS residual.
fn regress(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in pts {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss = pts.iter().map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>();
    (slope, intercept, (rss / m).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::ConeParams;
    use crate::spectral::{indicial_roots, ModeIndex};

    fn synthetic(c: &ConeParams, f: impl Fn(f64) -> f64) -> RadialGraph {
        let ts: Vec<f64> = (0..4000).map(|i| 0.01 * i as f64).collect();
        RadialGraph::from_fn(c, &ts, |t| [f(t), 0.0, 0.0]).unwrap()
    }

    #[test]
    fn pure_exponential_rate() {
        let c = ConeParams::new(7, 3).unwrap();
        let roots = indicial_roots(&c, ModeIndex::new(0, 0));
        let g = synthetic(&c, |t| 0.3 * (-2.0 * t).exp());
        let fit = fit_decay(&g, &roots).unwrap();
        assert!((fit.rate + 2.0).abs() < 1e-6);
        assert_eq!(fit.frequency, 0.0);
        assert!(fit.residual < 1e-10);
    }

    #[test]
    fn damped_cosine() {
        let c = ConeParams::new(2, 1).unwrap();
        let roots = indicial_roots(&c, ModeIndex::new(0, 0));
        let w = 7f64.sqrt() / 2.0;
        let g = synthetic(&c, |t| 0.2 * (-1.5 * t).exp() * (w * t + 0.4).cos());
        let fit = fit_decay(&g, &roots).unwrap();
        assert!((fit.rate + 1.5).abs() < 1e-3, "{}", fit.rate);
        assert!((fit.frequency - w).abs() < 1e-3, "{}", fit.frequency);
    }

    #[test]
    fn short_windows_are_rejected() {
        let c = ConeParams::new(2, 1).unwrap();
        let roots = indicial_roots(&c, ModeIndex::new(0, 0));
        let g = synthetic(&c, |t| 0.2 * (-1.5 * t).exp() * (1.3 * t).cos());
        assert!(matches!(fit_decay_in(&g, &roots, (0.0, 3.0)), Err(Error::InsufficientWindow(_))));
        assert!(matches!(fit_decay_in(&g, &roots, (0.0, 8.0)), Err(Error::InsufficientWindow(_))));
        let c = ConeParams::new(7, 3).unwrap();
        let roots = indicial_roots(&c, ModeIndex::new(0, 0));
        let g = synthetic(&c, |t| 0.2 * (-0.5 * t).exp());
        assert!(matches!(fit_decay_in(&g, &roots, (0.0, 6.0)), Err(Error::InsufficientWindow(_))));
    }
}
