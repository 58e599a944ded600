//! Dormand–Prince 5(4) embedded Runge–Kutta stepper with FSAL.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum StepFailure {
    StepUnderflow,
    NonFinite,
}

pub(crate) struct Dopri5<const N: usize, F> {
    f: F,
    pub s: f64,
    pub y: [f64; N],
    /// Derivative at `(s, y)`.
    pub dy: [f64; N],
    h: f64,
    pub h_max: f64,
    pub accepted: usize,
    pub rejected: usize,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

impl<const N: usize, F: FnMut(f64, &[f64; N]) -> [f64; N]> Dopri5<N, F> {
    pub fn new(mut f: F, s0: f64, y0: [f64; N], h0: f64) -> Self {
        let dy = f(s0, &y0);
        Self { f, s: s0, y: y0, dy, h: h0, h_max: f64::INFINITY, accepted: 0, rejected: 0 }
    }

    /// Takes one accepted step, never stepping past `limit`.
    ///
    /// `scale(y_old, y_new)` gives the per-component error scale; the step is
    /// accepted when the RMS of `err_i / scale_i` is at most one.
    pub fn step<S>(&mut self, limit: Option<f64>, scale: S) -> Result<(), StepFailure>
    where
        S: Fn(&[f64; N], &[f64; N]) -> [f64; N],
    {
        loop {
            let mut h = self.h.min(self.h_max);
            let mut clipped = false;
            if let Some(end) = limit {
                if self.s + h >= end {
                    h = end - self.s;
                    clipped = true;
                }
            }
            if h <= 1e-15 * self.s.abs().max(1.0) {
                if clipped && h >= 0.0 {
                    self.s = limit.unwrap();
                    return Ok(());
                }
                return Err(StepFailure::StepUnderflow);
            }
            let s = self.s;
            let y = self.y;
            let k1 = self.dy;
            let f = &mut self.f;
            let k2 = f(s + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = f(s + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(s + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                s + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                s + h,
                &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = f(s + h, &y_new);
            let err = axpy(
                &[0.0; N],
                h,
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            );
            let sc = scale(&y, &y_new);
            let norm = (err.iter().zip(&sc).map(|(e, s)| (e / s).powi(2)).sum::<f64>() / N as f64).sqrt();
            if !norm.is_finite() || !y_new.iter().all(|v| v.is_finite()) {
                self.rejected += 1;
                self.h *= MIN_FACTOR;
                if self.h < 1e-15 {
                    return Err(StepFailure::NonFinite);
                }
                continue;
            }
            let factor = if norm == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if norm <= 1.0 {
                self.s = if clipped { limit.unwrap() } else { s + h };
                self.y = y_new;
                self.dy = k7;
                self.accepted += 1;
                // A clipped step says nothing about the natural step size.
                if !clipped || factor < 1.0 {
                    self.h = h * factor;
                }
                return Ok(());
            }
            self.rejected += 1;
            self.h = h * factor.min(1.0);
        }
    }
}

/// Standard mixed absolute/relative error scale.
pub(crate) fn mixed_scale<const N: usize>(atol: f64, rtol: f64) -> impl Fn(&[f64; N], &[f64; N]) -> [f64; N] {
    move |a, b| {
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = atol + rtol * a[i].abs().max(b[i].abs());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let mut rk = Dopri5::new(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], 1e-3);
        let end = 2.0 * std::f64::consts::PI;
        while rk.s < end {
            rk.step(Some(end), mixed_scale(1e-12, 1e-12)).unwrap();
        }
        assert_eq!(rk.s, end);
        assert!((rk.y[0] - 1.0).abs() < 1e-10 && rk.y[1].abs() < 1e-10);
    }

    #[test]
    fn fifth_order_convergence_on_exponential() {
        // Local truncation error of an accepted step scales like h^6 on y' = y.
        let one_step = |h: f64| {
            let mut rk = Dopri5::new(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], h);
            rk.step(None, |_, _| [1.0]).unwrap();
            (rk.y[0] - rk.s.exp()).abs()
        };
        let ratio = one_step(0.1) / one_step(0.05);
        assert!(ratio > 50.0 && ratio < 80.0, "ratio {ratio}");
    }
}
