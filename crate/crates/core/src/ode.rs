//! Dormand–Prince 5(4) integrator with PI step-size control.
//!
//! The integrator works on fixed-size states `[f64; N]` and lands exactly on
//! a caller-supplied list of stop times, so samples on a grid never go
//! through interpolation. The accepted mesh is recorded; replaying it with
//! [`DoPri5::solve_on_mesh`] makes the result a smooth function of any
//! parameter hidden inside the right-hand side, which matters when an outer
//! root finder needs to resolve that parameter beyond the local tolerance.

use crate::error::{Error, Result};

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

// difference between the 5th and embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;

#[derive(Debug, Clone, Copy)]
pub struct DoPri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    /// State at each requested stop time, in order.
    pub at_stops: Vec<[f64; N]>,
    /// Accepted step endpoints, starting with `t0`.
    pub mesh: Vec<f64>,
    /// Index into `mesh` of each stop time.
    pub stop_index: Vec<usize>,
    pub accepted: usize,
    pub rejected: usize,
    /// Sum over accepted steps of the embedded error estimate, per component.
    pub err_sum: [f64; N],
}

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])], h: f64) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

struct Step<const N: usize> {
    y: [f64; N],
    err: [f64; N],
    k_last: [f64; N],
}

fn dp_step<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> Step<N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let k2 = f(t + C2 * h, &axpy(y, &[(A21, k1)], h));
    let k3 = f(t + C3 * h, &axpy(y, &[(A31, k1), (A32, &k2)], h));
    let k4 = f(t + C4 * h, &axpy(y, &[(A41, k1), (A42, &k2), (A43, &k3)], h));
    let k5 = f(
        t + C5 * h,
        &axpy(y, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
    );
    let k6 = f(
        t + h,
        &axpy(y, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h),
    );
    let y_new = axpy(
        y,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        h,
    );
    let k7 = f(t + h, &y_new);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Step {
        y: y_new,
        err,
        k_last: k7,
    }
}

impl DoPri5 {
    /// Absolute and relative tolerance both set to `tol`, initial step `1e-3`.
    pub fn new(tol: f64) -> Self {
        DoPri5 {
            rtol: tol,
            atol: tol,
            h_init: 1e-3,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }

    fn error_norm<const N: usize>(&self, y: &[f64; N], y_new: &[f64; N], err: &[f64; N]) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..N {
            let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            worst = worst.max((err[i] / scale).abs());
        }
        worst
    }

    /// Integrate from `t0` through every time in `stops` (strictly increasing,
    /// all greater than `t0`). `guard` is called after every accepted step and
    /// may abort the integration.
    pub fn solve<const N: usize, F, G>(
        &self,
        mut f: F,
        t0: f64,
        y0: [f64; N],
        stops: &[f64],
        mut guard: G,
    ) -> Result<Solution<N>>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        G: FnMut(f64, &[f64; N]) -> Result<()>,
    {
        let mut sol = Solution {
            at_stops: Vec::with_capacity(stops.len()),
            mesh: vec![t0],
            stop_index: Vec::with_capacity(stops.len()),
            accepted: 0,
            rejected: 0,
            err_sum: [0.0; N],
        };
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut h = self.h_init.min(self.h_max);
        let mut err_old = 1e-4_f64;
        let mut last_rejected = false;

        for &stop in stops {
            if stop <= t {
                return Err(Error::domain(format!(
                    "stop times must increase past t = {t}, got {stop}"
                )));
            }
            while t < stop {
                if sol.accepted + sol.rejected >= self.max_steps {
                    return Err(Error::Integration {
                        t,
                        reason: format!("step budget of {} exhausted", self.max_steps),
                    });
                }
                let remaining = stop - t;
                // land exactly on the stop; stretch by up to 10% rather than leave a sliver
                let landing = 1.1 * h >= remaining;
                let step_h = if landing { remaining } else { h.min(remaining) };
                if step_h <= 1e-15 * t.abs().max(1.0) && !landing {
                    return Err(Error::Integration {
                        t,
                        reason: format!("step size underflow (h = {step_h:e})"),
                    });
                }
                let step = dp_step(&mut f, t, &y, &k1, step_h);
                let err = self.error_norm(&y, &step.y, &step.err);
                if !err.is_finite() || step.y.iter().any(|v| !v.is_finite()) {
                    if step_h < 1e-15 {
                        return Err(Error::Integration {
                            t,
                            reason: "non-finite state".into(),
                        });
                    }
                    h = step_h * FAC_MIN;
                    sol.rejected += 1;
                    last_rejected = true;
                    continue;
                }
                if err <= 1.0 {
                    t = if landing { stop } else { t + step_h };
                    y = step.y;
                    k1 = step.k_last;
                    for i in 0..N {
                        sol.err_sum[i] += step.err[i].abs();
                    }
                    sol.accepted += 1;
                    sol.mesh.push(t);
                    guard(t, &y)?;
                    let err_c = err.max(1e-10);
                    let mut fac = SAFETY * err_c.powf(-EXPO) * err_old.powf(BETA);
                    fac = fac.clamp(FAC_MIN, FAC_MAX);
                    if last_rejected {
                        fac = fac.min(1.0);
                    }
                    // a forced short landing step says nothing about the natural step size
                    if !(landing && step_h < h) {
                        h = (step_h * fac).min(self.h_max);
                    }
                    err_old = err_c;
                    last_rejected = false;
                } else {
                    let fac = (SAFETY * err.powf(-0.2)).max(FAC_MIN);
                    h = step_h * fac;
                    sol.rejected += 1;
                    last_rejected = true;
                }
            }
            sol.at_stops.push(y);
            sol.stop_index.push(sol.mesh.len() - 1);
        }
        Ok(sol)
    }

    /// Take one Dormand–Prince step between each consecutive pair of mesh
    /// points, with no error control. Returns the state at every mesh point.
    pub fn solve_on_mesh<const N: usize, F, G>(
        &self,
        mut f: F,
        mesh: &[f64],
        y0: [f64; N],
        mut guard: G,
    ) -> Result<Vec<[f64; N]>>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        G: FnMut(f64, &[f64; N]) -> Result<()>,
    {
        let mut out = Vec::with_capacity(mesh.len());
        let mut y = y0;
        out.push(y);
        for w in mesh.windows(2) {
            let k1 = f(w[0], &y);
            let step = dp_step(&mut f, w[0], &y, &k1, w[1] - w[0]);
            y = step.y;
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::Integration {
                    t: w[1],
                    reason: "non-finite state".into(),
                });
            }
            guard(w[1], &y)?;
            out.push(y);
        }
        Ok(out)
    }
}
