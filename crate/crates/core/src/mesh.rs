//! Point clouds of the invariant surfaces in `R^{n+2}` and, for `n = 2`, an
//! OBJ mesh of a three-dimensional projection.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::flow::ProfileCurve;

/// Points of the unit sphere `S^m ⊂ R^{m+1}`: `±1` for `m = 0`, `count`
/// equally spaced points for `m = 1`, and `count` seeded uniform samples
/// (normalized Gaussian vectors) otherwise.
pub fn sphere_samples(m: u32, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match m {
        0 => vec![vec![1.0], vec![-1.0]],
        1 => (0..count)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut normal = move || {
                // Box–Muller; u1 is kept away from zero.
                let u1: f64 = 1.0 - rng.gen::<f64>();
                let u2: f64 = rng.gen();
                (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
            };
            (0..count)
                .map(|_| {
                    let v: Vec<f64> = (0..=m).map(|_| normal()).collect();
                    let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.into_iter().map(|x| x / r).collect()
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    /// Use every `stride`-th profile sample.
    pub stride: usize,
    /// Points per sphere factor.
    pub sphere_points: usize,
    /// Profile samples with `ρ` above this are dropped.
    pub rho_max: f64,
    pub seed: u64,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self { stride: 8, sphere_points: 16, rho_max: 2.0, seed: 7 }
    }
}

fn profile_indices(curve: &ProfileCurve, opts: &MeshOptions) -> Result<Vec<usize>> {
    if opts.stride == 0 || opts.sphere_points < 3 {
        return Err(Error::InvalidInput("mesh needs stride >= 1 and at least 3 sphere points".into()));
    }
    let idx: Vec<usize> = (0..curve.len())
        .step_by(opts.stride)
        .filter(|&i| curve.samples[i].state.rho <= opts.rho_max)
        .collect();
    if idx.len() < 2 {
        return Err(Error::InvalidInput(format!("fewer than two profile samples below rho = {}", opts.rho_max)));
    }
    Ok(idx)
}

/// Points `(a x, b y)` with `x ∈ S^p`, `y ∈ S^{n-p}` over the selected profile samples.
pub fn point_cloud(curve: &ProfileCurve, opts: &MeshOptions) -> Result<Vec<Vec<f64>>> {
    let params = curve.params;
    let xs = sphere_samples(params.p(), opts.sphere_points, opts.seed);
    let ys = sphere_samples(params.q(), opts.sphere_points, opts.seed.wrapping_add(1));
    let mut out = Vec::new();
    for i in profile_indices(curve, opts)? {
        let (a, b) = (curve.samples[i].a, curve.samples[i].b);
        for x in &xs {
            for y in &ys {
                out.push(x.iter().map(|v| a * v).chain(y.iter().map(|v| b * v)).collect());
            }
        }
    }
    Ok(out)
}

/// CSV with header `x1,...,x_{n+2}`.
pub fn point_cloud_csv(points: &[Vec<f64>]) -> String {
    let dim = points.first().map_or(0, |p| p.len());
    let header: Vec<String> = (1..=dim).map(|k| format!("x{k}")).collect();
    let mut s = header.join(",");
    s.push('\n');
    for p in points {
        let row: Vec<String> = p.iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// OBJ mesh for `n = 2`: the surface in `R^4` is projected to `R^3` by
/// dropping `x4`, and each of `slices` values of the second circle's angle
/// contributes one quad strip over (profile sample, first circle's angle).
pub fn obj_mesh(curve: &ProfileCurve, opts: &MeshOptions, slices: usize) -> Result<String> {
    let params = curve.params;
    if params.n() != 2 {
        return Err(Error::InvalidInput("OBJ export is only defined for n = 2".into()));
    }
    if slices == 0 {
        return Err(Error::InvalidInput("at least one slice is required".into()));
    }
    let idx = profile_indices(curve, opts)?;
    let m = opts.sphere_points;
    let mut s = String::new();
    let _ = writeln!(s, "# invariant minimal surface, n = 2, p = 1");
    let _ = writeln!(s, "# projection: (x1, x2, x3, x4) -> (x1, x2, x3), last coordinate dropped");
    let _ = writeln!(s, "# {} slices x {} profile samples x {} angles", slices, idx.len(), m);
    for j in 0..slices {
        let beta = 2.0 * PI * j as f64 / slices as f64;
        for &i in &idx {
            let (a, b) = (curve.samples[i].a, curve.samples[i].b);
            for k in 0..m {
                let alpha = 2.0 * PI * k as f64 / m as f64;
                let _ = writeln!(s, "v {:.9e} {:.9e} {:.9e}", a * alpha.cos(), a * alpha.sin(), b * beta.cos());
            }
        }
    }
    let rows = idx.len();
    for j in 0..slices {
        let _ = writeln!(s, "g slice{j}");
        let base = j * rows * m;
        for r in 0..rows - 1 {
            for k in 0..m {
                let v = |rr: usize, kk: usize| base + rr * m + (kk % m) + 1;
                let _ = writeln!(s, "f {} {} {} {}", v(r, k), v(r + 1, k), v(r + 1, k + 1), v(r, k + 1));
            }
        }
    }
    Ok(s)
}
