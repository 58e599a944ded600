//! Gauss–Legendre rules and local polynomial fitting on scattered samples.

use std::f64::consts::PI;

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..(order + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // Three-term recurrence for P_n(x) and its derivative.
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=order {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if order == 1 { x } else { p1 };
            let pm = if order == 1 { 1.0 } else { p0 };
            dp = n * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    (nodes, weights)
}

/// A Gauss–Legendre rule mapped onto arbitrary panels.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self { nodes, weights }
    }

    /// Absolute nodes and scaled weights on `[a, b]`.
    pub fn panel(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, half * w))
    }
}

/// Value and first two derivatives at `xs[center]` of the least-squares
/// polynomial of `degree` through the window `[lo, hi)`.
pub fn local_fit(xs: &[f64], ys: &[f64], lo: usize, hi: usize, center: usize, degree: usize) -> [f64; 3] {
    let m = degree + 1;
    debug_assert!(hi - lo >= m && center >= lo && center < hi);
    let x0 = xs[center];
    let scale = (lo..hi).map(|i| (xs[i] - x0).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    // Normal equations in the scaled abscissa (x - x0)/scale.
    let mut a = vec![vec![0.0; m + 1]; m];
    for i in lo..hi {
        let u = (xs[i] - x0) / scale;
        let mut pow = vec![1.0; 2 * m];
        for j in 1..2 * m {
            pow[j] = pow[j - 1] * u;
        }
        for r in 0..m {
            for c in 0..m {
                a[r][c] += pow[r + c];
            }
            a[r][m] += pow[r] * ys[i];
        }
    }
    let coef = solve_dense(a);
    let c1 = if m > 1 { coef[1] / scale } else { 0.0 };
    let c2 = if m > 2 { 2.0 * coef[2] / (scale * scale) } else { 0.0 };
    [coef[0], c1, c2]
}

/// Derivatives at every sample using centered windows of `width` points
/// (shifted inward near the ends).
pub fn sliding_fit(xs: &[f64], ys: &[f64], width: usize, degree: usize) -> Vec<[f64; 3]> {
    let n = xs.len();
    assert!(n >= width && width > degree);
    let half = width / 2;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half).min(n - width);
            local_fit(xs, ys, lo, lo + width, i, degree)
        })
        .collect()
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_dense(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let m = a.len();
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        for r in col + 1..m {
            let f = a[r][col] / a[col][col];
            for c in col..=m {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][m] - s) / a[r][r];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for order in 1..=10 {
            let (x, w) = gauss_legendre(order);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for deg in 0..2 * order {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-14, "order {order} deg {deg}");
            }
        }
    }

    #[test]
    fn eight_point_nodes() {
        let (x, _) = gauss_legendre(8);
        assert!((x[7] - 0.960_289_856_497_536_2).abs() < 1e-15);
        assert!((x[4] - 0.183_434_642_495_649_8).abs() < 1e-15);
    }

    #[test]
    fn panel_rule_integrates_exponential() {
        let rule = GaussRule::new(8);
        let exact = 1.0 - (-3.0f64).exp();
        let approx: f64 = (0..30)
            .flat_map(|i| rule.panel(0.1 * i as f64, 0.1 * (i + 1) as f64).collect::<Vec<_>>())
            .map(|(x, w)| w * (-x).exp())
            .sum();
        assert!((approx - exact).abs() < 4e-15);
    }

    #[test]
    fn local_fit_recovers_quartic_on_uneven_grid() {
        let xs: Vec<f64> = (0..9).map(|i| (i as f64 * 0.37).powf(1.3)).collect();
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - 0.3 * x.powi(3) + 0.1 * x.powi(4);
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let fits = sliding_fit(&xs, &ys, 7, 4);
        for (i, &x) in xs.iter().enumerate() {
            let d1 = -2.0 + x - 0.9 * x * x + 0.4 * x.powi(3);
            let d2 = 1.0 - 1.8 * x + 1.2 * x * x;
            assert!((fits[i][0] - f(x)).abs() < 1e-11);
            assert!((fits[i][1] - d1).abs() < 1e-10);
            assert!((fits[i][2] - d2).abs() < 1e-9);
        }
    }
}
