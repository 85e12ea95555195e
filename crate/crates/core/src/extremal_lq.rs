//! Maximising the determinant under `||V||_q = A` for `q > 1`.
//!
//! The maximiser is `V = q/(4q−2) · Ψ^{1/(q−1)}` where `Ψ` solves
//!
//! ```text
//! Ψ'' = |Ψ|^α − 2H,   Ψ(0) = 0,   Ψ'(0) = H − c(A, q),   α = q/(q−1)
//! ```
//!
//! and the constant `H` is fixed by `Ψ(1) = 0`. The orbit lies on the level
//! set `Ψ'² = f(Ψ)` of the first integral
//! `E = ½Ψ'² − Ψ|Ψ|^α/(α+1) + 2HΨ`, which has a bounded component only for
//! `H < h(A, q)`. `Ψ(1; H)` increases with `H` on `(c, h)`, so the root is
//! found by bisection, finished with a secant on a frozen integration mesh.
//!
//! The determinant and the norm are integrated alongside `Ψ`, so they carry
//! the integrator's accuracy rather than that of the sampled grid.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gy::MAX_EXP_ARG;
use crate::ode::DoPri5;
use crate::potential::{extremal_value, PotentialSpec};

pub const DEFAULT_GRID: usize = 4097;
/// Integrator tolerance for every shot.
pub const RK_TOL: f64 = 1e-12;
/// Bisection on adaptive meshes stops at this relative bracket width.
const FREEZE_WIDTH: f64 = 1e-6;

fn check_params(a: f64, q: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("A = {a} must be positive and finite")));
    }
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::domain(format!("q = {q} must be finite and greater than 1")));
    }
    Ok(())
}

/// `c(A, q) = ½ (A(4q−2)/q)^q`, the lower end of the admissible `H` range.
pub fn c_of(a: f64, q: f64) -> Result<f64> {
    check_params(a, q)?;
    let log_c = q * (a * (4.0 * q - 2.0) / q).ln() - std::f64::consts::LN_2;
    // leave headroom for squaring inside g
    if log_c > 0.5 * MAX_EXP_ARG - 1.0 {
        return Err(Error::Range(format!(
            "c(A, q) = exp({log_c:.1}) for A = {a}, q = {q} is too large to shoot"
        )));
    }
    Ok(log_c.exp())
}

/// `g(H) = (H−c)² − (2α/(α+1)) (2H)^{1+1/α}`: the minimum of the phase
/// function `f`. Negative exactly when the orbit has a bounded component.
pub fn phase_min(a: f64, q: f64, h: f64) -> Result<f64> {
    let c = c_of(a, q)?;
    Ok(g(h, c, alpha_of(q)))
}

fn alpha_of(q: f64) -> f64 {
    q / (q - 1.0)
}

fn g(h: f64, c: f64, alpha: f64) -> f64 {
    (h - c).powi(2) - 2.0 * alpha / (alpha + 1.0) * (2.0 * h).powf(1.0 + 1.0 / alpha)
}

/// `h(A, q)`, the unique root of [`phase_min`] above `c(A, q)`.
pub fn h_of(a: f64, q: f64) -> Result<f64> {
    let c = c_of(a, q)?;
    let alpha = alpha_of(q);
    let mut lo = c;
    let mut hi = 2.0 * c;
    while g(hi, c, alpha) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Range(format!(
                "no sign change of g above c = {c} for A = {a}, q = {q}"
            )));
        }
    }
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if g(mid, c, alpha) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootingProblem {
    pub q: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub alpha: f64,
    pub c: f64,
    pub h: f64,
    pub grid_n: usize,
}

impl ShootingProblem {
    pub fn new(a: f64, q: f64) -> Result<Self> {
        Ok(ShootingProblem {
            q,
            a,
            alpha: alpha_of(q),
            c: c_of(a, q)?,
            h: h_of(a, q)?,
            grid_n: DEFAULT_GRID,
        })
    }

    /// `grid_n` must be odd so the grid has a midpoint and suits Simpson.
    pub fn with_grid(mut self, grid_n: usize) -> Result<Self> {
        if grid_n < 33 || grid_n.is_multiple_of(2) {
            return Err(Error::domain(format!(
                "grid_n = {grid_n} must be odd and at least 33"
            )));
        }
        self.grid_n = grid_n;
        Ok(self)
    }

    pub fn grid(&self) -> Vec<f64> {
        let cells = (self.grid_n - 1) as f64;
        (0..self.grid_n).map(|i| i as f64 / cells).collect()
    }

    fn kappa(&self) -> f64 {
        self.q / (4.0 * self.q - 2.0)
    }

    /// `f(ψ) = (H−c)² + 2ψ|ψ|^α/(α+1) − 4Hψ`, so that `Ψ'² = f(Ψ)` on the orbit.
    pub fn phase_function(&self, h: f64, psi: f64) -> f64 {
        (h - self.c).powi(2) + 2.0 * psi * psi.abs().powf(self.alpha) / (self.alpha + 1.0)
            - 4.0 * h * psi
    }

    pub fn first_integral(&self, h: f64, psi: f64, dpsi: f64) -> f64 {
        0.5 * dpsi * dpsi - psi * psi.abs().powf(self.alpha) / (self.alpha + 1.0) + 2.0 * h * psi
    }

    /// Past `(2H)^{1/α}` with `Ψ' > 0` the orbit is on the unbounded branch.
    pub fn blowup_threshold(&self, h: f64) -> f64 {
        (2.0 * h).powf(1.0 / self.alpha)
    }

    fn check_h(&self, h: f64) -> Result<()> {
        if !(h > self.c && h < self.h) {
            return Err(Error::domain(format!(
                "H = {h} is outside the open interval ({}, {})",
                self.c, self.h
            )));
        }
        Ok(())
    }
}

/// Samples of one shot on the problem grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Shot {
    pub h: f64,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
    /// `Ψ(1; H)`
    pub miss: f64,
    /// `y(1)` for `-y'' + V y = 0`, `y(0) = 0`, `y'(0) = 1`.
    pub y1: f64,
    /// `∫ V^q`
    pub vq_integral: f64,
}

type State = [f64; 5];

/// Right-hand side for `[Ψ, Ψ', y, y', ∫V^q]`.
fn rhs(prob: &ShootingProblem, h: f64) -> impl Fn(f64, &State) -> State + '_ {
    let kappa = prob.kappa();
    let kappa_q = kappa.powf(prob.q);
    move |_, s| {
        let psi = s[0];
        // |Ψ|^(α−1); note α − 1 = 1/(q − 1)
        let p = psi.abs().powf(prob.alpha - 1.0);
        let (v, vq) = if psi > 0.0 {
            (kappa * p, kappa_q * p * psi)
        } else {
            (0.0, 0.0)
        };
        [s[1], p * psi.abs() - 2.0 * h, s[3], v * s[2], vq]
    }
}

fn blowup_guard(prob: &ShootingProblem, h: f64) -> impl FnMut(f64, &State) -> Result<()> {
    let threshold = prob.blowup_threshold(h);
    move |t, s| {
        if s[0] > threshold && s[1] > 0.0 {
            Err(Error::BlowUp {
                t,
                psi: s[0],
                threshold,
            })
        } else {
            Ok(())
        }
    }
}

fn initial(prob: &ShootingProblem, h: f64) -> State {
    [0.0, h - prob.c, 0.0, 1.0, 0.0]
}

fn shot_from(h: f64, states: Vec<State>) -> Shot {
    let last = *states.last().expect("non-empty grid");
    Shot {
        h,
        psi: states.iter().map(|s| s[0]).collect(),
        dpsi: states.iter().map(|s| s[1]).collect(),
        miss: last[0],
        y1: last[2],
        vq_integral: last[4],
    }
}

/// A shot together with the adaptive mesh it was computed on.
struct Traced {
    shot: Shot,
    mesh: Vec<f64>,
    stop_index: Vec<usize>,
}

fn shoot_adaptive(h: f64, prob: &ShootingProblem) -> Result<Traced> {
    let grid = prob.grid();
    let sol = DoPri5::new(RK_TOL).solve(
        rhs(prob, h),
        0.0,
        initial(prob, h),
        &grid[1..],
        blowup_guard(prob, h),
    )?;
    let mut states = Vec::with_capacity(prob.grid_n);
    states.push(initial(prob, h));
    states.extend(sol.at_stops);
    let mut stop_index = vec![0];
    stop_index.extend(sol.stop_index);
    Ok(Traced {
        shot: shot_from(h, states),
        mesh: sol.mesh,
        stop_index,
    })
}

fn shoot_frozen(h: f64, prob: &ShootingProblem, mesh: &[f64], stop_index: &[usize]) -> Result<Shot> {
    let all = DoPri5::new(RK_TOL).solve_on_mesh(
        rhs(prob, h),
        mesh,
        initial(prob, h),
        blowup_guard(prob, h),
    )?;
    Ok(shot_from(h, stop_index.iter().map(|&i| all[i]).collect()))
}

/// Integrate the initial value problem for one `H` in `(c, h)`.
pub fn psi_shoot(h: f64, prob: &ShootingProblem) -> Result<Shot> {
    prob.check_h(h)?;
    Ok(shoot_adaptive(h, prob)?.shot)
}

/// Sign of the miss with blow-up counted as overshoot.
fn miss_sign(result: &Result<f64>) -> Result<f64> {
    match result {
        Ok(m) => Ok(*m),
        Err(Error::BlowUp { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e.clone()),
    }
}

/// `(H, Ψ(1; H))` at `points` Chebyshev nodes of `(c, h)`, in increasing
/// order. The nodes cluster at both ends, where the root can sit very close
/// to `h`. A shot that escapes to the unbounded branch is reported as `+∞`.
pub fn miss_ladder(prob: &ShootingProblem, points: usize) -> Result<Vec<(f64, f64)>> {
    let span = prob.h - prob.c;
    let n = points as f64;
    (1..=points)
        .map(|k| {
            let x = (std::f64::consts::PI * (k as f64 - 0.5) / n).cos();
            let h = prob.c + 0.5 * span * (1.0 - x);
            let m = psi_shoot(h, prob).map(|s| s.miss);
            Ok((h, miss_sign(&m)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalSolution {
    pub q: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "H")]
    pub h: f64,
    /// `c(A, q)`
    pub c: f64,
    /// `h(A, q)`
    pub h_upper: f64,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
    pub v: Vec<f64>,
    pub miss: f64,
    /// `E` at `t = 0`.
    pub first_integral: f64,
    /// `max_t |E(t) − E(0)|`
    pub first_integral_drift: f64,
    /// `max_t |Ψ'² − f(Ψ)|`
    pub phase_residual: f64,
    /// `max_t |Ψ(t) − Ψ(1−t)|`
    pub symmetry_defect: f64,
    pub norm: f64,
    pub norm_residual: f64,
    pub det: f64,
    #[serde(rename = "D_max")]
    pub d_max: f64,
    /// Shots taken by the root finder.
    pub iterations: usize,
}

impl ExtremalSolution {
    pub fn grid(&self) -> Vec<f64> {
        let cells = (self.psi.len() - 1) as f64;
        (0..self.psi.len()).map(|i| i as f64 / cells).collect()
    }

    pub fn to_potential(&self) -> PotentialSpec {
        PotentialSpec::ExtremalLq {
            q: self.q,
            a: self.a,
            h: self.h,
            psi: self.psi.clone(),
        }
    }

    /// `max Ψ`, attained at `t = ½`.
    pub fn psi_max(&self) -> f64 {
        self.psi.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Whether `Ψ` is strictly increasing on the grid points in `[0, ½]`.
    pub fn increasing_on_first_half(&self) -> bool {
        let mid = (self.psi.len() - 1) / 2;
        self.psi[..=mid].windows(2).all(|w| w[0] < w[1])
    }

    /// CSV with header `t,psi,dpsi,v`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,psi,dpsi,v")?;
        for (i, t) in self.grid().into_iter().enumerate() {
            writeln!(out, "{},{},{},{}", t, self.psi[i], self.dpsi[i], self.v[i])?;
        }
        Ok(())
    }
}

fn finish(prob: &ShootingProblem, shot: Shot, iterations: usize) -> ExtremalSolution {
    let h = shot.h;
    let e0 = prob.first_integral(h, 0.0, h - prob.c);
    let mut drift = 0.0_f64;
    let mut phase_residual = 0.0_f64;
    for (&p, &dp) in shot.psi.iter().zip(&shot.dpsi) {
        drift = drift.max((prob.first_integral(h, p, dp) - e0).abs());
        phase_residual = phase_residual.max((dp * dp - prob.phase_function(h, p)).abs());
    }
    let symmetry_defect = shot
        .psi
        .iter()
        .zip(shot.psi.iter().rev())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let norm = shot.vq_integral.max(0.0).powf(1.0 / prob.q);
    let v = shot.psi.iter().map(|&p| extremal_value(prob.q, p)).collect();
    ExtremalSolution {
        q: prob.q,
        a: prob.a,
        h,
        c: prob.c,
        h_upper: prob.h,
        v,
        miss: shot.miss,
        first_integral: e0,
        first_integral_drift: drift,
        phase_residual,
        symmetry_defect,
        norm,
        norm_residual: (norm - prob.a).abs(),
        det: 2.0 * shot.y1,
        d_max: shot.y1,
        iterations,
        psi: shot.psi,
        dpsi: shot.dpsi,
    }
}

pub fn solve_extremal(a: f64, q: f64, shoot_tol: f64) -> Result<ExtremalSolution> {
    solve_extremal_with(&ShootingProblem::new(a, q)?, shoot_tol)
}

pub fn solve_extremal_with(prob: &ShootingProblem, shoot_tol: f64) -> Result<ExtremalSolution> {
    if !(1e-12..=1e-6).contains(&shoot_tol) {
        return Err(Error::domain(format!(
            "shoot_tol = {shoot_tol:e} is outside [1e-12, 1e-6]"
        )));
    }
    let span = prob.h - prob.c;
    let mut ladder = Vec::new();
    let mut iterations = 0;
    let mut probe = |h: f64, ladder: &mut Vec<(f64, f64)>| -> Result<(f64, Option<Traced>)> {
        iterations += 1;
        match shoot_adaptive(h, prob) {
            Ok(tr) => {
                ladder.push((h, tr.shot.miss));
                Ok((tr.shot.miss, Some(tr)))
            }
            Err(Error::BlowUp { .. }) => {
                ladder.push((h, f64::INFINITY));
                Ok((f64::INFINITY, None))
            }
            Err(e) => Err(e),
        }
    };

    // the sign at each end of (c, h) is found by probing just inside it
    let mut lo = prob.c + 1e-9 * span;
    let mut hi = prob.h - 1e-9 * span;
    let (m_lo, _) = probe(lo, &mut ladder)?;
    let (m_hi, _) = probe(hi, &mut ladder)?;
    if !(m_lo < 0.0 && m_hi > 0.0) && !(m_lo > 0.0 && m_hi < 0.0) {
        return Err(Error::Solver {
            message: format!(
                "Ψ(1; H) has no sign change on ({}, {}) for A = {}, q = {}",
                prob.c, prob.h, prob.a, prob.q
            ),
            ladder,
        });
    }
    let rising = m_lo < 0.0;
    let below = |m: f64| (m < 0.0) == rising;

    let mut last: Option<Traced> = None;
    while hi - lo > FREEZE_WIDTH * hi {
        let mid = 0.5 * (lo + hi);
        let (m, tr) = probe(mid, &mut ladder)?;
        if m == 0.0 {
            let shot = tr.expect("finite miss").shot;
            return Ok(finish(prob, shot, iterations));
        }
        if below(m) {
            lo = mid;
        } else {
            hi = mid;
        }
        if tr.is_some() {
            last = tr;
        }
        if hi - lo <= 1e-13 * span {
            return Err(Error::Solver {
                message: format!(
                    "bracket collapsed to [{lo}, {hi}] before reaching the freeze width"
                ),
                ladder,
            });
        }
    }
    let frozen = match last {
        Some(tr) => tr,
        None => shoot_adaptive(0.5 * (lo + hi), prob)?,
    };

    // on a frozen mesh Ψ(1; H) is smooth in H, so a secant converges cleanly
    let shoot = |h: f64| shoot_frozen(h, prob, &frozen.mesh, &frozen.stop_index);
    let (mut a, mut b) = (lo, hi);
    let (sa, sb) = (shoot(a)?, shoot(b)?);
    iterations += 2;
    if below(sb.miss) || !below(sa.miss) {
        return Err(Error::Solver {
            message: format!("frozen mesh lost the sign change on [{a}, {b}]"),
            ladder,
        });
    }
    let mut side = 0;
    let (mut fa, mut fb) = (sa.miss, sb.miss);
    let mut best = if fa.abs() < fb.abs() { sa } else { sb };
    for _ in 0..200 {
        if best.miss.abs() <= 1e-3 * shoot_tol || b - a <= 4.0 * f64::EPSILON * b {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let sc = shoot(c)?;
        iterations += 1;
        let m = sc.miss;
        if m.abs() < best.miss.abs() {
            best = sc;
        }
        if m == 0.0 {
            break;
        }
        if below(m) {
            a = c;
            fa = m;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = m;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    if best.miss.abs() > shoot_tol {
        ladder.push((best.h, best.miss));
        return Err(Error::Solver {
            message: format!(
                "|Ψ(1; H)| = {:e} at H = {} exceeds shoot_tol = {shoot_tol:e}",
                best.miss.abs(),
                best.h
            ),
            ladder,
        });
    }
    Ok(finish(prob, best, iterations))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EndpointBehaviour {
    /// `V'(0) = 0`
    #[serde(rename = "zero-derivative")]
    ZeroDerivative,
    #[serde(rename = "finite-nonzero")]
    FiniteNonzero,
    #[serde(rename = "vertical-tangent")]
    VerticalTangent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndpointFit {
    pub slope: f64,
    pub behaviour: EndpointBehaviour,
    pub points: usize,
}

/// Least-squares slope of `log V` against `log t` over `[1e-3, 1e-2]`.
pub fn endpoint_exponent(sol: &ExtremalSolution) -> Result<EndpointFit> {
    endpoint_exponent_in(sol, 1e-3, 1e-2)
}

pub fn endpoint_exponent_in(sol: &ExtremalSolution, t_lo: f64, t_hi: f64) -> Result<EndpointFit> {
    if !(0.0 < t_lo && t_lo < t_hi && t_hi <= 0.5) {
        return Err(Error::domain(format!("fit window [{t_lo}, {t_hi}] is invalid")));
    }
    let pts: Vec<(f64, f64)> = sol
        .grid()
        .into_iter()
        .zip(&sol.v)
        .filter(|(t, v)| *t >= t_lo && *t <= t_hi && **v > 0.0)
        .map(|(t, v)| (t.ln(), v.ln()))
        .collect();
    if pts.len() < 8 {
        return Err(Error::Resolution(format!(
            "only {} grid points with V > 0 in [{t_lo}, {t_hi}]; increase grid_n",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |(sx, sy), (x, y)| (sx + x / n, sy + y / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(sxy, sxx), (x, y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    let slope = sxy / sxx;
    let behaviour = if (slope - 1.0).abs() <= 0.05 {
        EndpointBehaviour::FiniteNonzero
    } else if slope > 1.0 {
        EndpointBehaviour::ZeroDerivative
    } else {
        EndpointBehaviour::VerticalTangent
    };
    Ok(EndpointFit {
        slope,
        behaviour,
        points: pts.len(),
    })
}
