//! Dirichlet eigenvalues of `-y'' + V y = λ y` on `[0, 1]`, the regularised
//! eigenvalue product and heat-trace partial sums.
//!
//! Eigenvalues are located with the Prüfer phase `θ`, defined through
//! `s y = ρ sin θ`, `y' = ρ cos θ` with a fixed scale `s`. `θ(1; λ)` is
//! increasing in `λ` and crosses `nπ` exactly at `λ_n`, which gives certified
//! counting; the final digits come from a bracketed secant on `y(1; λ)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gy::transfer;
use crate::potential::{Cell, PotentialSpec};

pub const DEFAULT_N: usize = 200;
pub const DEFAULT_MESH: usize = 4096;
const MAX_N: usize = 10_000;
const MIN_MESH: usize = 64;
const MAX_WIDENINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectrumMethod {
    #[serde(rename = "pruefer-shooting")]
    PrueferShooting,
    #[serde(rename = "fd-matrix")]
    FdMatrix,
}

impl SpectrumMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SpectrumMethod::PrueferShooting => "pruefer-shooting",
            SpectrumMethod::FdMatrix => "fd-matrix",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub lambdas: Vec<f64>,
    pub n: usize,
    pub method: SpectrumMethod,
    /// Cells used to represent `V` (shooting) or grid intervals (fd-matrix).
    pub mesh: usize,
    /// Error bound per eigenvalue.
    pub est_error: Vec<f64>,
    /// `∫ V`, which drives the tail of the regularised product.
    pub potential_integral: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetProduct {
    /// `2 Π λ_n / (n²π²)`
    pub raw: f64,
    /// `raw` times the first-order tail factor `exp(Σ_{n>N} ∫V / (n²π²))`.
    pub corrected: f64,
}

fn check_args(n: usize, mesh: usize) -> Result<()> {
    if n == 0 || n > MAX_N {
        return Err(Error::domain(format!("n = {n} must lie in [1, {MAX_N}]")));
    }
    if mesh < MIN_MESH {
        return Err(Error::domain(format!("mesh = {mesh} must be at least {MIN_MESH}")));
    }
    Ok(())
}

/// Piecewise-constant representation used for shooting: the potential's own
/// cells when it has them, otherwise `mesh` midpoint cells.
fn shooting_cells(v: &PotentialSpec, mesh: usize) -> Vec<Cell> {
    v.cells().unwrap_or_else(|| {
        let h = 1.0 / mesh as f64;
        (0..mesh)
            .map(|i| Cell {
                start: i as f64 * h,
                width: h,
                value: v.eval_unchecked((i as f64 + 0.5) * h),
            })
            .collect()
    })
}

fn reduce(theta: f64) -> (f64, f64) {
    let k = (theta / PI).round();
    (k * PI, theta - k * PI)
}

/// `θ(1; λ)` together with `y(1; λ)` for the unit-amplitude solution.
fn phase(cells: &[Cell], lambda: f64) -> (f64, f64) {
    let s = lambda.abs().max(1.0).sqrt();
    let mut theta = 0.0_f64;
    for c in cells {
        let gap = lambda - c.value;
        if gap > 0.0 {
            // exact rotation in the cell's own angle, then back to scale s
            let w = gap.sqrt();
            let (base, r) = reduce(theta);
            let phi = (w / s * r.tan()).atan() + w * c.width;
            let (k, r1) = reduce(phi);
            theta = base + k + (s / w * r1.tan()).atan();
        } else {
            // at most one zero of y in the cell; θ never falls back through a multiple of π
            let m = transfer(-gap, c.width);
            let (y0, dy0) = (theta.sin() / s, theta.cos());
            let y = m[0][0] * y0 + m[0][1] * dy0;
            let dy = m[1][0] * y0 + m[1][1] * dy0;
            let floor = (theta / PI).floor() * PI;
            let raw = (s * y).atan2(dy);
            theta = floor + (raw - floor).rem_euclid(2.0 * PI);
        }
    }
    (theta, theta.sin() / s)
}

/// Exact `y(1; λ)` up to a positive factor, for sign tests and secant steps.
fn miss(cells: &[Cell], lambda: f64) -> f64 {
    let (mut y, mut dy) = (0.0_f64, 1.0_f64);
    for c in cells {
        let m = transfer(c.value - lambda, c.width);
        (y, dy) = (m[0][0] * y + m[0][1] * dy, m[1][0] * y + m[1][1] * dy);
        let scale = y.abs().max(dy.abs());
        if scale > 1e100 {
            y /= scale;
            dy /= scale;
        }
    }
    y
}

fn eigenvalue(cells: &[Cell], n: usize, radius: f64) -> Result<(f64, f64)> {
    let target = n as f64 * PI;
    let centre = (n as f64 * PI).powi(2);
    let mut half = radius + 1.0;
    let (mut lo, mut hi);
    let mut widenings = 0;
    loop {
        lo = centre - half;
        hi = centre + half;
        if phase(cells, lo).0 < target && phase(cells, hi).0 >= target {
            break;
        }
        widenings += 1;
        if widenings > MAX_WIDENINGS {
            return Err(Error::Bracket { index: n, lo, hi });
        }
        half *= 2.0;
    }
    // bisect on the phase until only λ_n is left in the bracket
    loop {
        let (tl, th) = (phase(cells, lo).0, phase(cells, hi).0);
        if tl > target - PI && th < target + PI {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if phase(cells, mid).0 < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            return Ok((0.5 * (lo + hi), hi - lo));
        }
    }
    // bracketed secant (Illinois) on y(1; λ)
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (miss(cells, a), miss(cells, b));
    if fa == 0.0 {
        return Ok((a, 0.0));
    }
    if fb == 0.0 {
        return Ok((b, 0.0));
    }
    let mut side = 0;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c > a && c < b { c } else { 0.5 * (a + b) };
        let fc = miss(cells, c);
        if fc == 0.0 {
            return Ok((c, 0.0));
        }
        if (fc > 0.0) == (fb > 0.0) {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
        if b - a <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
            break;
        }
    }
    Ok((0.5 * (a + b), b - a))
}

/// The first `n` Dirichlet eigenvalues by Prüfer shooting.
pub fn dirichlet_eigenvalues(v: &PotentialSpec, n: usize, mesh: usize) -> Result<SpectrumResult> {
    check_args(n, mesh)?;
    v.validate()?;
    let cells = shooting_cells(v, mesh);
    let radius = v.l1_norm();
    let found: Vec<(f64, f64)> = (1..=n)
        .into_par_iter()
        .map(|k| eigenvalue(&cells, k, radius))
        .collect::<Result<_>>()?;
    let (lambdas, est_error) = found.into_iter().unzip();
    Ok(SpectrumResult {
        lambdas,
        n,
        method: SpectrumMethod::PrueferShooting,
        mesh: cells.len(),
        est_error,
        potential_integral: v.integral(),
    })
}

/// Number of eigenvalues of the tridiagonal matrix below `x` (Sturm count).
fn sturm_count(diag: &[f64], off2: f64, x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0_f64;
    for (i, &a) in diag.iter().enumerate() {
        d = if i == 0 { a - x } else { a - x - off2 / d };
        if d == 0.0 {
            d = f64::EPSILON * (a.abs() + x.abs()).max(1.0);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Second-order finite differences on `mesh` intervals; the eigenvalues of
/// the tridiagonal matrix are found by Sturm bisection.
pub fn fd_eigenvalues(v: &PotentialSpec, n: usize, mesh: usize) -> Result<SpectrumResult> {
    check_args(n, mesh)?;
    v.validate()?;
    if n >= mesh {
        return Err(Error::domain(format!(
            "fd-matrix with mesh = {mesh} has only {} eigenvalues",
            mesh - 1
        )));
    }
    let h = 1.0 / mesh as f64;
    let inv_h2 = 1.0 / (h * h);
    let diag: Vec<f64> = (1..mesh)
        .map(|i| 2.0 * inv_h2 + v.eval_unchecked(i as f64 * h))
        .collect();
    let off2 = inv_h2 * inv_h2;
    let vmin = diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * inv_h2;
    let vmax = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0 * inv_h2;
    let found: Vec<f64> = (1..=n)
        .into_par_iter()
        .map(|k| {
            let (mut lo, mut hi) = (vmin, vmax);
            while hi - lo > 2.0 * f64::EPSILON * hi.abs().max(lo.abs()).max(1.0) {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if sturm_count(&diag, off2, mid) >= k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect();
    let est_error = found.iter().map(|l| l * l * h * h / 12.0).collect();
    Ok(SpectrumResult {
        lambdas: found,
        n,
        method: SpectrumMethod::FdMatrix,
        mesh,
        est_error,
        potential_integral: v.integral(),
    })
}

/// `Σ_{n > N} 1 / n²`
fn basel_tail(n: usize) -> f64 {
    let partial: f64 = (1..=n).rev().map(|k| 1.0 / (k as f64 * k as f64)).sum();
    PI * PI / 6.0 - partial
}

pub fn regularized_det_product(spec: &SpectrumResult) -> Result<DetProduct> {
    let mut log = 0.0;
    for (i, &l) in spec.lambdas.iter().enumerate() {
        if l.is_nan() || l <= 0.0 {
            return Err(Error::domain(format!(
                "eigenvalue {} = {l} is not positive; the product is undefined",
                i + 1
            )));
        }
        let k = (i + 1) as f64 * PI;
        log += (l / (k * k)).ln();
    }
    let tail = spec.potential_integral / (PI * PI) * basel_tail(spec.lambdas.len());
    Ok(DetProduct {
        raw: 2.0 * log.exp(),
        corrected: 2.0 * (log + tail).exp(),
    })
}

/// Largest observed `|λ_n - n²π²|`.
pub fn max_shift(spec: &SpectrumResult) -> f64 {
    spec.lambdas
        .iter()
        .enumerate()
        .map(|(i, l)| (l - ((i + 1) as f64 * PI).powi(2)).abs())
        .fold(0.0, f64::max)
}

/// `1/(2√(πt)) − 1/2`
pub fn heat_asymptote(t: f64) -> f64 {
    0.5 / (PI * t).sqrt() - 0.5
}

/// Bound on the terms with `n > N` missing from the partial sum.
pub fn heat_truncation(spec: &SpectrumResult, t: f64) -> f64 {
    let next = (spec.lambdas.len() + 1) as f64;
    let c = max_shift(spec) + 1.0;
    let first = (-((next * PI).powi(2) - c) * t).exp();
    first / -(-(2.0 * next + 1.0) * PI * PI * t).exp_m1()
}

pub fn heat_trace_partial(spec: &SpectrumResult, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("t = {t} must be positive and finite")));
    }
    let estimate = heat_truncation(spec, t);
    if estimate > 1e-8 {
        return Err(Error::Truncation { t, estimate });
    }
    Ok(spec.lambdas.iter().rev().map(|l| (-l * t).exp()).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatFit {
    /// `(t, partial sum, asymptote)`
    pub samples: Vec<(f64, f64, f64)>,
    /// `max |partial − asymptote| / √t` over the samples.
    pub c_fit: f64,
    /// The same ratio bounded through `|λ_n − n²π²| ≤ max_shift` and the
    /// theta function `ψ(t) = Σ e^{−n²π²t}`.
    pub c_bound: f64,
}

/// `ψ(t) = Σ_{n≥1} e^{−n²π²t}`
pub fn theta_psi(t: f64) -> f64 {
    let mut sum = 0.0;
    let mut n = 1.0_f64;
    loop {
        let term = (-(n * PI).powi(2) * t).exp();
        sum += term;
        if term < 1e-18 * sum {
            return sum;
        }
        n += 1.0;
    }
}

pub fn heat_trace_fit(spec: &SpectrumResult, ts: &[f64]) -> Result<HeatFit> {
    let c = max_shift(spec);
    let mut samples = Vec::with_capacity(ts.len());
    let (mut c_fit, mut c_bound) = (0.0_f64, 0.0_f64);
    for &t in ts {
        let value = heat_trace_partial(spec, t)?;
        let asym = heat_asymptote(t);
        let psi = theta_psi(t);
        c_fit = c_fit.max((value - asym).abs() / t.sqrt());
        let bound = (c * t).exp_m1() * psi + (psi - asym).abs() + heat_truncation(spec, t);
        c_bound = c_bound.max(bound / t.sqrt());
        samples.push((t, value, asym));
    }
    Ok(HeatFit {
        samples,
        c_fit,
        c_bound,
    })
}
