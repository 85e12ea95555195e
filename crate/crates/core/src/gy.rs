//! Gelfand–Yaglom evaluation of `det(-d²/dt² + V)` with Dirichlet conditions.
//!
//! The determinant equals `2 y(1)` where `-y'' + V y = 0`, `y(0) = 0`,
//! `y'(0) = 1`. Piecewise-constant potentials are propagated cell by cell with
//! exact 2×2 transfer matrices, so rounding is the only error on that path.
//! Everything else goes through the adaptive Dormand–Prince integrator.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::DoPri5;
use crate::potential::{simpson_refined, Cell, PotentialSpec};

/// Largest argument accepted by `exp` before the result leaves binary64.
pub(crate) const MAX_EXP_ARG: f64 = 709.782712893384;

/// Below this value of `sqrt(|a|) h` the hyperbolic entries switch to expm1 forms.
const SMALL_ARG: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DetMethod {
    #[serde(rename = "exact-piecewise")]
    ExactPiecewise,
    #[serde(rename = "adaptive-rk")]
    AdaptiveRk,
}

impl DetMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            DetMethod::ExactPiecewise => "exact-piecewise",
            DetMethod::AdaptiveRk => "adaptive-rk",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetResult {
    /// `y(1)`
    pub y1: f64,
    /// `y'(1)`
    pub dy1: f64,
    /// `2 y(1)`
    pub det: f64,
    pub method: DetMethod,
    /// Cells traversed or integrator steps accepted.
    pub steps: usize,
    pub est_error: f64,
    /// Sign changes of `y` observed between consecutive cell ends or steps.
    pub sign_changes: usize,
}

/// `sinh(z) / z`, accurate down to `z = 0`.
pub fn shc(z: f64) -> f64 {
    if z.abs() < SMALL_ARG {
        let z2 = z * z;
        1.0 + z2 / 6.0 * (1.0 + z2 / 20.0)
    } else {
        z.sinh() / z
    }
}

/// Transfer matrix of `(y, y')` across a cell of width `h` carrying the constant value `a`.
pub fn transfer(a: f64, h: f64) -> [[f64; 2]; 2] {
    if a == 0.0 {
        return [[1.0, h], [0.0, 1.0]];
    }
    let k = a.abs().sqrt();
    let z = k * h;
    if a > 0.0 {
        let (ch, sh) = if z < SMALL_ARG {
            let (ep, em) = (z.exp_m1(), (-z).exp_m1());
            (1.0 + 0.5 * (ep + em), 0.5 * (ep - em))
        } else {
            (z.cosh(), z.sinh())
        };
        [[ch, h * shc(z)], [k * sh, ch]]
    } else {
        let (s, c) = z.sin_cos();
        let sinc = if z < SMALL_ARG { 1.0 - z * z / 6.0 } else { s / z };
        [[c, h * sinc], [-k * s, c]]
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(1e-14..=1e-2).contains(&tol) {
        return Err(Error::domain(format!("tolerance {tol:e} is outside [1e-14, 1e-2]")));
    }
    Ok(())
}

fn check_range(v: &PotentialSpec) -> Result<f64> {
    let l1 = v.l1_norm();
    if !l1.is_finite() || 1.0 + l1 > MAX_EXP_ARG {
        return Err(Error::Range(format!(
            "a priori bound exp(1 + ||V||_1) = exp({}) exceeds the binary64 range",
            1.0 + l1
        )));
    }
    Ok(l1)
}

fn propagate_cells(cells: &[Cell]) -> DetResult {
    let (mut y, mut dy) = (0.0_f64, 1.0_f64);
    let mut sign_changes = 0;
    let mut prev_sign = 1.0_f64;
    for c in cells {
        let m = transfer(c.value, c.width);
        (y, dy) = (m[0][0] * y + m[0][1] * dy, m[1][0] * y + m[1][1] * dy);
        let s = if y > 0.0 { 1.0 } else { -1.0 };
        if s != prev_sign {
            sign_changes += 1;
            prev_sign = s;
        }
    }
    let est_error = 8.0 * f64::EPSILON * cells.len() as f64 * y.hypot(dy);
    DetResult {
        y1: y,
        dy1: dy,
        det: 2.0 * y,
        method: DetMethod::ExactPiecewise,
        steps: cells.len(),
        est_error,
        sign_changes,
    }
}

fn propagate_adaptive(v: &PotentialSpec, tol: f64) -> Result<DetResult> {
    let mut stops = v.breakpoints();
    stops.push(1.0);
    let mut sign_changes = 0;
    let mut prev_sign = 1.0_f64;
    let sol = DoPri5::new(tol).solve(
        |t, x: &[f64; 2]| [x[1], v.eval_unchecked(t.clamp(0.0, 1.0)) * x[0]],
        0.0,
        [0.0, 1.0],
        &stops,
        |_, x| {
            let s = if x[0] > 0.0 { 1.0 } else { -1.0 };
            if s != prev_sign {
                sign_changes += 1;
                prev_sign = s;
            }
            Ok(())
        },
    )?;
    let end = *sol.at_stops.last().expect("at least one stop");
    Ok(DetResult {
        y1: end[0],
        dy1: end[1],
        det: 2.0 * end[0],
        method: DetMethod::AdaptiveRk,
        steps: sol.accepted,
        est_error: sol.err_sum[0],
        sign_changes,
    })
}

/// Evaluate the determinant, choosing exact transfer matrices whenever `V`
/// is piecewise constant and the adaptive integrator otherwise.
pub fn propagate(v: &PotentialSpec, tol: f64) -> Result<DetResult> {
    let method = if v.cells().is_some() {
        DetMethod::ExactPiecewise
    } else {
        DetMethod::AdaptiveRk
    };
    propagate_with(v, tol, method)
}

/// Like [`propagate`] with the method forced. `ExactPiecewise` is only
/// available for piecewise-constant variants.
pub fn propagate_with(v: &PotentialSpec, tol: f64, method: DetMethod) -> Result<DetResult> {
    check_tol(tol)?;
    v.validate()?;
    check_range(v)?;
    match method {
        DetMethod::ExactPiecewise => {
            let cells = v.cells().ok_or_else(|| {
                Error::domain("exact propagation needs a piecewise-constant potential")
            })?;
            Ok(propagate_cells(&cells))
        }
        DetMethod::AdaptiveRk => propagate_adaptive(v, tol),
    }
}

/// Closed-form determinant of the pulse `m * chi_[x1, x2]`.
///
/// The solution is `t` left of the pulse, `a e^{kt} + b e^{-kt}` on it and
/// `c t + d` right of it, with `k = sqrt(m)`; the determinant is `2 (c + d)`.
/// The products `a e^{k x2}` and `b e^{-k x2}` are formed from the exponent
/// difference `k (x2 - x1)` so that no intermediate overflows.
pub fn pulse_det_closed_form(x1: f64, x2: f64, m: f64) -> Result<f64> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::domain(format!(
            "pulse height m = {m} must be positive (use propagate for m = 0)"
        )));
    }
    if !(0.0 <= x1 && x1 < x2 && x2 <= 1.0) {
        return Err(Error::domain(format!(
            "pulse support [{x1}, {x2}] is not inside [0, 1] with x1 < x2"
        )));
    }
    let k = m.sqrt();
    let grow = (k * (x2 - x1)).exp();
    let a_x2 = 0.5 * (x1 + 1.0 / k) * grow;
    let b_x2 = 0.5 * (x1 - 1.0 / k) / grow;
    let c = k * (a_x2 - b_x2);
    let d = a_x2 * (1.0 - k * x2) + b_x2 * (1.0 + k * x2);
    Ok(2.0 * (c + d))
}

/// `sum_{m >= 1} norm1^m / (m + 1)^(m + 1)`, truncated once a term drops below
/// `1e-18` of the running sum or after `max_terms` terms. Bounds `|y(1) - 1|`
/// for every potential with `||V||_1 = norm1`.
pub fn upper_bound_series(norm1: f64, max_terms: usize) -> f64 {
    if norm1 <= 0.0 {
        return 0.0;
    }
    let ln_x = norm1.ln();
    let mut sum = 0.0;
    for m in 1..=max_terms {
        let mf = m as f64;
        let term = (mf * ln_x - (mf + 1.0) * (mf + 1.0).ln()).exp();
        sum += term;
        // terms are eventually decreasing; stop past the peak
        if term < 1e-18 * sum && mf > norm1 / std::f64::consts::E {
            break;
        }
    }
    sum
}

/// `||V1 - V2||_1`, exact when both potentials are piecewise constant.
pub fn l1_distance(v1: &PotentialSpec, v2: &PotentialSpec) -> f64 {
    if v1.cells().is_some() && v2.cells().is_some() {
        let mut edges: Vec<f64> = vec![0.0, 1.0];
        edges.extend(v1.breakpoints());
        edges.extend(v2.breakpoints());
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        return edges
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                (w[1] - w[0]) * (v1.eval_unchecked(mid) - v2.eval_unchecked(mid)).abs()
            })
            .sum();
    }
    let f = |t: f64| (v1.eval_unchecked(t) - v2.eval_unchecked(t)).abs();
    simpson_refined(&f, 1024).0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzGap {
    /// `|y_1(1) - y_2(1)|`
    pub gap: f64,
    pub l1_distance: f64,
    /// `max(||V1||_1, ||V2||_1)`
    pub radius: f64,
    /// `e^{2(1 + radius)} ||V1 - V2||_1`
    pub bound: f64,
}

impl LipschitzGap {
    pub fn holds(&self) -> bool {
        self.gap <= self.bound
    }
}

pub fn lipschitz_gap(v1: &PotentialSpec, v2: &PotentialSpec, tol: f64) -> Result<LipschitzGap> {
    let d1 = propagate(v1, tol)?;
    let d2 = propagate(v2, tol)?;
    let radius = v1.l1_norm().max(v2.l1_norm());
    let dist = l1_distance(v1, v2);
    Ok(LipschitzGap {
        gap: (d1.y1 - d2.y1).abs(),
        l1_distance: dist,
        radius,
        bound: (2.0 * (1.0 + radius)).exp() * dist,
    })
}
