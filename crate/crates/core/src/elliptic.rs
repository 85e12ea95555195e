//! The `q = 2` extremal in closed form through the Weierstrass ℘ function.
//!
//! For `q = 2` the profile `Ψ = 3V` satisfies `Ψ'' = Ψ² − 2H`. Substituting
//! `Ψ(t) = ℘(z)` with `dz/dt = 1/√6` turns this into `℘'' = 6℘² − g₂/2` for
//! the invariants `g₂ = 24H`, `g₃ = −6(H − 9A²/2)²`. The lattice is
//! rectangular with real half-period `ω` and imaginary half-period `ω'`, and
//! the bounded real orbit is `℘` on the line `ℝ + ω'`, where it oscillates
//! between `e₃ < 0` (at `ω'`) and `e₂ > 0` (at `ω + ω'`).
//!
//! `Ψ` vanishes at both ends and peaks at `t = ½`, so the midpoint maps to
//! `ω + ω'` and the ends to `ω ± ξ₀ + ω'` with `ξ₀ = 1/(2√6)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extremal_lq::{ExtremalSolution, DEFAULT_GRID};
use crate::ode::DoPri5;
use crate::potential::simpson;

/// Half-length in `z` of the image of `[0, 1]`.
pub fn xi0() -> f64 {
    0.5 / 6f64.sqrt()
}

/// Offset of `z(t)` from the lattice point that `t = ½` maps to.
pub fn time_map(t: f64) -> f64 {
    (2.0 * t - 1.0) * xi0()
}

/// Carlson's symmetric integral `R_F(x, y, z)` by duplication.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> Result<f64> {
    if x < 0.0 || y < 0.0 || z < 0.0 || [x + y, y + z, z + x].contains(&0.0) {
        return Err(Error::domain(format!(
            "R_F({x}, {y}, {z}) needs non-negative arguments with at most one zero"
        )));
    }
    let (mut x, mut y, mut z) = (x, y, z);
    loop {
        let mean = (x + y + z) / 3.0;
        let (dx, dy, dz) = (1.0 - x / mean, 1.0 - y / mean, 1.0 - z / mean);
        // the truncated series below is accurate to ~d^6
        if dx.abs().max(dy.abs()).max(dz.abs()) < 2e-3 {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return Ok((1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / mean.sqrt());
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
    }
}

fn mass_term(a: f64) -> f64 {
    4.5 * a * a
}

/// The unique root of `128H³ − 9(H − 9A²/2)⁴` above `9A²/2`.
pub fn h_star(a: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("A = {a} must be positive and finite")));
    }
    let c = mass_term(a);
    // sign of the polynomial divided by H³
    let positive = |h: f64| 128.0 > 9.0 * (h - c).powi(4) / (h * h * h);
    let (mut lo, mut hi) = (c, 2.0 * c);
    while positive(hi) {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if positive(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticInvariants {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub g2: f64,
    pub g3: f64,
    pub disc: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub omega: f64,
    pub omega_p_im: f64,
}

pub fn g2_g3(a: f64, h: f64) -> (f64, f64) {
    (24.0 * h, -6.0 * (h - mass_term(a)).powi(2))
}

fn cubic(u: f64, g2: f64, g3: f64) -> f64 {
    4.0 * u * u * u - g2 * u - g3
}

pub fn invariants(a: f64, h: f64) -> Result<EllipticInvariants> {
    if !(a > 0.0 && a.is_finite() && h.is_finite()) {
        return Err(Error::domain(format!("A = {a}, H = {h} must be finite with A > 0")));
    }
    let (g2, g3) = g2_g3(a, h);
    let disc = g2.powi(3) - 27.0 * g3 * g3;
    if disc <= 0.0 || h <= mass_term(a) {
        return Err(Error::Degenerate {
            h,
            h_star: h_star(a)?,
        });
    }
    // u³ + p u + r = 0 with three real roots
    let p = -g2 / 4.0;
    let r = -g3 / 4.0;
    let amp = 2.0 * (-p / 3.0).sqrt();
    let phi = ((3.0 * r / (2.0 * p)) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0).acos() / 3.0;
    let mut roots: [f64; 3] =
        std::array::from_fn(|k| amp * (phi - 2.0 * PI * k as f64 / 3.0).cos());
    for u in roots.iter_mut() {
        for _ in 0..3 {
            let d = 12.0 * *u * *u - g2;
            if d != 0.0 {
                *u -= cubic(*u, g2, g3) / d;
            }
        }
    }
    roots.sort_by(|x, y| y.total_cmp(x));
    let [e1, e2, e3] = roots;
    Ok(EllipticInvariants {
        a,
        h,
        g2,
        g3,
        disc,
        e1,
        e2,
        e3,
        omega: carlson_rf(0.0, e1 - e3, e1 - e2)?,
        omega_p_im: carlson_rf(0.0, e1 - e3, e2 - e3)?,
    })
}

const LAURENT_TERMS: usize = 16;

/// `c_k` in `℘(z) = z⁻² + Σ_{k≥2} c_k z^{2k−2}`, indexed from `k = 2`.
fn laurent(g2: f64, g3: f64) -> [f64; LAURENT_TERMS] {
    let mut c = [0.0; LAURENT_TERMS + 2];
    c[2] = g2 / 20.0;
    c[3] = g3 / 28.0;
    for k in 4..LAURENT_TERMS + 2 {
        let s: f64 = (2..=k - 2).map(|m| c[m] * c[k - m]).sum();
        c[k] = 3.0 / ((2 * k + 1) as f64 * (k - 3) as f64) * s;
    }
    std::array::from_fn(|i| c[i + 2])
}

/// `(℘(x), ℘'(x))` for real `x ∈ (0, ω]`.
fn wp_real(x: f64, inv: &EllipticInvariants) -> (f64, f64) {
    let r0 = 0.5 * inv.omega.min(inv.omega_p_im);
    let mut doublings = 0;
    let mut z = x;
    while z > r0 {
        z *= 0.5;
        doublings += 1;
    }
    let coeff = laurent(inv.g2, inv.g3);
    let z2 = z * z;
    let (mut p, mut dp) = (1.0 / z2, -2.0 / (z2 * z));
    let mut pow = z2; // z^{2k−2} for k = 2
    for (i, c) in coeff.iter().enumerate() {
        let k = (i + 2) as f64;
        p += c * pow;
        dp += c * (2.0 * k - 2.0) * pow / z;
        pow *= z2;
    }
    for _ in 0..doublings {
        let slope = (6.0 * p * p - 0.5 * inv.g2) / dp;
        let p2 = 0.25 * slope * slope - 2.0 * p;
        dp = -dp - slope * (p2 - p);
        p = p2;
    }
    (p, dp)
}

/// `(℘(x + ω'), d/dx ℘(x + ω'))` for real `x`, checked against the
/// differential equation `℘'² = 4℘³ − g₂℘ − g₃`.
pub fn wp_shift_with_derivative(x: f64, inv: &EllipticInvariants) -> Result<(f64, f64)> {
    if !x.is_finite() {
        return Err(Error::domain(format!("x = {x} is not finite")));
    }
    let period = 2.0 * inv.omega;
    let mut r = x.rem_euclid(period);
    let mut sign = 1.0;
    if r > inv.omega {
        r = period - r;
        sign = -sign;
    }
    if !(0.0..=inv.omega).contains(&r) {
        return Err(Error::domain(format!(
            "x = {x} did not reduce into [0, ω] (ω = {})",
            inv.omega
        )));
    }
    let (e1, e2, e3) = (inv.e1, inv.e2, inv.e3);
    let k = (e1 - e3) * (e2 - e3);
    if r == 0.0 {
        return Ok((e3, 0.0));
    }
    let (p, dp) = wp_real(r, inv);
    let gap = p - e3;
    let f = e3 + k / gap;
    let df = -k * dp / (gap * gap) * sign;
    let lhs = df * df;
    let rhs = cubic(f, inv.g2, inv.g3);
    let scale = (4.0 * f.abs().powi(3)).max(inv.g2 * f.abs()).max(inv.g3.abs()).max(lhs);
    if (lhs - rhs).abs() > 1e-9 * scale {
        return Err(Error::Solver {
            message: format!(
                "℘ residual {:e} at x = {x} exceeds 1e-9 relative",
                (lhs - rhs).abs() / scale
            ),
            ladder: Vec::new(),
        });
    }
    Ok((f, df))
}

/// `℘(x + ω')`, real and in `[e₃, e₂]`.
pub fn wp_on_imag_shift(x: f64, inv: &EllipticInvariants) -> Result<f64> {
    wp_shift_with_derivative(x, inv).map(|(f, _)| f)
}

/// `Ψ(1; H)` in closed form: `℘(ω − ξ₀ + ω')` when `ξ₀ < ω`. For `ξ₀ ≥ ω`
/// the orbit would pass its minimum before `t = 1`; that only happens below
/// the optimal `H` and is reported as `−∞`.
fn end_value(a: f64, h: f64) -> Result<f64> {
    let inv = invariants(a, h)?;
    if xi0() >= inv.omega {
        return Ok(f64::NEG_INFINITY);
    }
    wp_on_imag_shift(inv.omega - xi0(), &inv)
}

pub fn solve_l2(a: f64, tol: f64) -> Result<ExtremalSolution> {
    solve_l2_on_grid(a, tol, DEFAULT_GRID)
}

pub fn solve_l2_on_grid(a: f64, tol: f64, grid_n: usize) -> Result<ExtremalSolution> {
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(Error::domain(format!("tol = {tol:e} is outside [1e-12, 1e-6]")));
    }
    if grid_n < 33 || grid_n.is_multiple_of(2) {
        return Err(Error::domain(format!("grid_n = {grid_n} must be odd and at least 33")));
    }
    let c = mass_term(a);
    let hs = h_star(a)?;
    let span = hs - c;
    let mut ladder = Vec::new();
    let mut lo = c + 1e-9 * span;
    let mut hi = hs - 1e-9 * span;
    let (g_lo, g_hi) = (end_value(a, lo)?, end_value(a, hi)?);
    ladder.push((lo, g_lo));
    ladder.push((hi, g_hi));
    if !(g_lo < 0.0 && g_hi > 0.0) && !(g_lo > 0.0 && g_hi < 0.0) {
        return Err(Error::Solver {
            message: format!("℘(ω − ξ₀ + ω') has no sign change on ({c}, {hs}) for A = {a}"),
            ladder,
        });
    }
    let rising = g_lo < 0.0;
    let mut iterations = 2;
    while hi - lo > 2.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = end_value(a, mid)?;
        iterations += 1;
        ladder.push((mid, g));
        if g == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (g < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let h = if end_value(a, lo)?.abs() <= end_value(a, hi)?.abs() { lo } else { hi };
    let inv = invariants(a, h)?;
    if xi0() >= inv.omega {
        return Err(Error::Geometry(format!(
            "ξ₀ = {} is not below ω = {} at H = {h}",
            xi0(),
            inv.omega
        )));
    }
    let profile = |t: f64| -> Result<(f64, f64)> {
        let tau = time_map(t);
        let (f, df) = wp_shift_with_derivative(inv.omega - tau.abs(), &inv)?;
        let dir = if t < 0.5 { 1.0 } else { -1.0 };
        Ok((f, dir * df / 6f64.sqrt()))
    };
    let cells = (grid_n - 1) as f64;
    let mut psi = Vec::with_capacity(grid_n);
    let mut dpsi = Vec::with_capacity(grid_n);
    for i in 0..grid_n {
        let (p, dp) = profile(i as f64 / cells)?;
        psi.push(p);
        dpsi.push(dp);
    }
    let miss = *psi.last().expect("non-empty grid");
    if miss.abs() > tol {
        return Err(Error::Solver {
            message: format!("|Ψ(1)| = {:e} exceeds tol = {tol:e} at H = {h}", miss.abs()),
            ladder,
        });
    }

    let e0 = 0.5 * (h - c).powi(2);
    let energy = |p: f64, dp: f64| 0.5 * dp * dp - p * p * p.abs() / 3.0 + 2.0 * h * p;
    let phase = |p: f64| (h - c).powi(2) + 2.0 * p * p * p.abs() / 3.0 - 4.0 * h * p;
    let mut drift = 0.0_f64;
    let mut phase_residual = 0.0_f64;
    for (&p, &dp) in psi.iter().zip(&dpsi) {
        drift = drift.max((energy(p, dp) - e0).abs());
        phase_residual = phase_residual.max((dp * dp - phase(p)).abs());
    }
    let symmetry_defect = psi
        .iter()
        .zip(psi.iter().rev())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let v: Vec<f64> = psi.iter().map(|p| p.max(0.0) / 3.0).collect();

    // ||V||_2 and the determinant straight from the closed form
    let v_at = |t: f64| profile(t).map(|(p, _)| p.max(0.0) / 3.0).unwrap_or(f64::NAN);
    let norm = simpson(&|t| v_at(t).powi(2), 2 * (grid_n - 1)).sqrt();
    let sol = DoPri5::new(1e-12).solve(
        |t, y: &[f64; 2]| [y[1], v_at(t.clamp(0.0, 1.0)) * y[0]],
        0.0,
        [0.0, 1.0],
        &[1.0],
        |_, _| Ok(()),
    )?;
    let y1 = sol.at_stops[0][0];
    if !y1.is_finite() || !norm.is_finite() {
        return Err(Error::Solver {
            message: "closed-form profile produced a non-finite value".into(),
            ladder,
        });
    }
    Ok(ExtremalSolution {
        q: 2.0,
        a,
        h,
        c,
        h_upper: hs,
        psi,
        dpsi,
        v,
        miss,
        first_integral: e0,
        first_integral_drift: drift,
        phase_residual,
        symmetry_defect,
        norm,
        norm_residual: (norm - a).abs(),
        det: 2.0 * y1,
        d_max: y1,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn carlson_known_values() {
        // R_F(0, 1, 2) = K(1/√2) / 1 ... tabulated constant
        assert!((carlson_rf(0.0, 1.0, 2.0).unwrap() - 1.311_028_777_146_06).abs() < 1e-14);
        assert!((carlson_rf(1.0, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((carlson_rf(0.0, 1.0, 1.0).unwrap() - PI / 2.0).abs() < 1e-14);
        assert!(carlson_rf(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn invariants_at_five() {
        let inv = invariants(1.0, 5.0).unwrap();
        assert_eq!(inv.g2, 120.0);
        assert_eq!(inv.g3, -1.5);
        assert!((inv.e1 + inv.e2 + inv.e3).abs() < 1e-13);
        assert!(inv.e1 > inv.e2 && inv.e2 > inv.e3);
        for e in [inv.e1, inv.e2, inv.e3] {
            assert!(cubic(e, inv.g2, inv.g3).abs() < 1e-10 * 4.0 * e.abs().powi(3));
        }
    }

    #[test]
    fn degenerate_beyond_h_star() {
        let hs = h_star(1.0).unwrap();
        assert!(invariants(1.0, hs * (1.0 - 1e-9)).unwrap().disc > 0.0);
        assert!(matches!(
            invariants(1.0, hs * (1.0 + 1e-9)),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn half_period_values() {
        let inv = invariants(1.0, 22.0).unwrap();
        assert_eq!(wp_on_imag_shift(0.0, &inv).unwrap(), inv.e3);
        let top = wp_on_imag_shift(inv.omega, &inv).unwrap();
        assert!((top - inv.e2).abs() < 1e-10 * inv.e2.abs());
        let x = 0.3 * inv.omega;
        let f = wp_on_imag_shift(x, &inv).unwrap();
        assert!((f - wp_on_imag_shift(-x, &inv).unwrap()).abs() < 1e-13);
        assert!((f - wp_on_imag_shift(x + 2.0 * inv.omega, &inv).unwrap()).abs() < 1e-11);
    }

    #[test]
    fn time_map_endpoints() {
        assert_eq!(time_map(0.5), 0.0);
        assert!((time_map(1.0) - time_map(0.0) - 1.0 / 6f64.sqrt()).abs() < 1e-16);
    }
}
