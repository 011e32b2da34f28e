//! Adaptive Dormand-Prince 5(4) stepping for small autonomous systems,
//! with sign-change event location.
//!
//! Events are scalar functions that are positive before the event and reach
//! zero at it. A step whose end value is `<= 0` is truncated at the refined
//! root; the earliest root among all triggered events wins.

use crate::error::{EscapeError, Result};

// Dormand-Prince 5(4) tableau; the systems here are autonomous so the
// abscissae are not needed.
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (w, k) in terms {
        for i in 0..N {
            out[i] += h * w * k[i];
        }
    }
    out
}

/// One Dormand-Prince step of size `h`. Returns the fifth-order solution and
/// the embedded error estimate.
pub fn dopri_step<const N: usize, F>(f: &F, y: &[f64; N], h: f64) -> ([f64; N], [f64; N])
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let k1 = f(y);
    let k2 = f(&axpy(y, h, &[(A21, &k1)]));
    let k3 = f(&axpy(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = f(&axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(&axpy(
        y,
        h,
        &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
    ));
    let k6 = f(&axpy(
        y,
        h,
        &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    ));
    let y5 = axpy(
        y,
        h,
        &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
    );
    let k7 = f(&y5);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y5, err)
}

/// Event function; the event fires when the value drops to zero or below.
pub type EventFn<const N: usize> = dyn Fn(&[f64; N]) -> f64;

/// Accepted step returned by [`Stepper::advance`].
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub h: f64,
    pub y: [f64; N],
    /// Index of the event that truncated this step, if any.
    pub event: Option<usize>,
}

/// Adaptive step-size controller with mixed absolute/relative tolerance.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub tol: f64,
    pub h_max: f64,
    pub h_min: f64,
    /// Event functions are refined until `|g| <= event_tol`.
    pub event_tol: f64,
    h: f64,
}

impl Stepper {
    pub fn new(tol: f64, h_max: f64) -> Self {
        Self {
            tol,
            h_max,
            h_min: 1e-14,
            event_tol: 1e-12,
            h: h_max.min(1e-3),
        }
    }

    fn error_norm<const N: usize>(&self, y0: &[f64; N], y1: &[f64; N], err: &[f64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let scale = self.tol + self.tol * y0[i].abs().max(y1[i].abs());
            acc += (err[i] / scale).powi(2);
        }
        (acc / N as f64).sqrt()
    }

    /// Take one accepted step from `y` at time `t`, no longer than `h_cap`.
    /// The step is cut at the earliest event whose function changes from
    /// positive to non-positive.
    pub fn advance<const N: usize, F>(
        &mut self,
        f: &F,
        t: f64,
        y: &[f64; N],
        h_cap: f64,
        events: &[&EventFn<N>],
    ) -> Result<Step<N>>
    where
        F: Fn(&[f64; N]) -> [f64; N],
    {
        let mut h = self.h.min(self.h_max).min(h_cap);
        loop {
            if !(h >= self.h_min) {
                return Err(EscapeError::StepFailure { t, h });
            }
            let (y1, err) = dopri_step(f, y, h);
            let e = self.error_norm(y, &y1, &err);
            if !e.is_finite() {
                h *= 0.2;
                continue;
            }
            if e > 1.0 {
                h *= (0.9 * e.powf(-0.2)).max(0.2);
                continue;
            }
            let grow = if e == 0.0 {
                5.0
            } else {
                (0.9 * e.powf(-0.2)).min(5.0)
            };
            self.h = (h * grow).min(self.h_max);

            let mut best: Option<(f64, [f64; N], usize)> = None;
            for (idx, g) in events.iter().enumerate() {
                if g(y) > 0.0 && g(&y1) <= 0.0 {
                    let (s, ys) = self.refine(f, y, h, *g);
                    if best.is_none_or(|(bs, _, _)| s < bs) {
                        best = Some((s, ys, idx));
                    }
                }
            }
            return Ok(match best {
                Some((s, ys, idx)) => Step {
                    h: s,
                    y: ys,
                    event: Some(idx),
                },
                None => Step {
                    h,
                    y: y1,
                    event: None,
                },
            });
        }
    }

    /// Locate the root of `g` along a single step from `y` by the Illinois
    /// variant of regula falsi on the step length.
    fn refine<const N: usize, F>(
        &self,
        f: &F,
        y: &[f64; N],
        h: f64,
        g: &dyn Fn(&[f64; N]) -> f64,
    ) -> (f64, [f64; N])
    where
        F: Fn(&[f64; N]) -> [f64; N],
    {
        let (mut a, mut ga) = (0.0, g(y));
        let yb = dopri_step(f, y, h).0;
        let (mut b, mut gb) = (h, g(&yb));
        let mut best = (b, yb, gb);
        let mut side = 0i8;
        for _ in 0..200 {
            let mut s = (a * gb - b * ga) / (gb - ga);
            if !(s > a && s < b) {
                s = 0.5 * (a + b);
            }
            let ys = dopri_step(f, y, s).0;
            let gs = g(&ys);
            if gs.abs() < best.2.abs() {
                best = (s, ys, gs);
            }
            if gs.abs() <= self.event_tol || b - a <= 4.0 * f64::EPSILON * h {
                return (s, ys);
            }
            if gs > 0.0 {
                a = s;
                ga = gs;
                if side == 1 {
                    gb *= 0.5;
                }
                side = 1;
            } else {
                b = s;
                gb = gs;
                if side == -1 {
                    ga *= 0.5;
                }
                side = -1;
            }
        }
        (best.0, best.1)
    }
}
