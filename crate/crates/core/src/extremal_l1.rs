//! Maximising the determinant under `||V||_1 = A`.
//!
//! The maximiser is a single pulse centred at `1/2` of length
//! `ℓ(A) = A/(1+√(1+A))²` and height `A/ℓ`. For a pulse of mass `A`, centre
//! `s` and length `ℓ` the Gelfand–Yaglom value has the closed form
//! [`pulse_objective`]; [`grid_oracle`] maximises it by brute force.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gy::{shc, MAX_EXP_ARG};
use crate::optim::NelderMead;
use crate::potential::PotentialSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L1Optimum {
    #[serde(rename = "A")]
    pub a: f64,
    pub s: f64,
    pub ell: f64,
    pub height: f64,
    pub det_max: f64,
    #[serde(rename = "D_max")]
    pub d_max: f64,
}

impl L1Optimum {
    pub fn potential(&self) -> PotentialSpec {
        PotentialSpec::Pulse {
            x1: 0.5 - 0.5 * self.ell,
            x2: 0.5 + 0.5 * self.ell,
            m: self.height,
        }
    }
}

fn check_mass(a: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("A = {a} must be positive and finite")));
    }
    if 1.0 + a > MAX_EXP_ARG {
        return Err(Error::Range(format!(
            "A = {a} exceeds the determinant overflow guard"
        )));
    }
    Ok(())
}

pub fn optimal_ell(a: f64) -> f64 {
    let r = 1.0 + (1.0 + a).sqrt();
    a / (r * r)
}

pub fn optimal_pulse(a: f64) -> Result<L1Optimum> {
    check_mass(a)?;
    let r = 1.0 + (1.0 + a).sqrt();
    let ell = optimal_ell(a);
    let det_max = 4.0 / r * (a / r).exp();
    let width = (0.5 + 0.5 * ell) - (0.5 - 0.5 * ell);
    Ok(L1Optimum {
        a,
        s: 0.5,
        ell,
        height: a / width,
        det_max,
        d_max: 0.5 * det_max,
    })
}

/// `y(1)` for the pulse of mass `a`, centre `s` and length `ell`.
pub fn pulse_objective(s: f64, ell: f64, a: f64) -> Result<f64> {
    check_mass(a)?;
    if !(ell > 0.0 && ell <= 2.0 * s.min(1.0 - s)) {
        return Err(Error::domain(format!(
            "(s, ell) = ({s}, {ell}) violates 0 < ell <= 2 min(s, 1 - s)"
        )));
    }
    Ok(objective(s, ell, a))
}

fn objective(s: f64, ell: f64, a: f64) -> f64 {
    let z = (a * ell).sqrt();
    (1.0 - ell) * z.cosh()
        + a * ((s - s * s) + (1.0 / a - 0.5) * ell + 0.25 * ell * ell) * shc(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridOptimum {
    pub s: f64,
    pub ell: f64,
    pub y: f64,
    /// Best value on the grid before polishing.
    pub grid_y: f64,
}

/// Exhaustive search of the feasible triangle on a `grid_n × grid_n` grid,
/// polished by Nelder–Mead.
pub fn grid_oracle(a: f64, grid_n: usize) -> Result<GridOptimum> {
    check_mass(a)?;
    if grid_n < 32 {
        return Err(Error::domain(format!("grid_n = {grid_n} must be at least 32")));
    }
    let g = grid_n as f64;
    let best = (0..grid_n * grid_n)
        .into_par_iter()
        .filter_map(|k| {
            let s = (k / grid_n) as f64 / (g - 1.0);
            let ell = ((k % grid_n) + 1) as f64 / g;
            (ell <= 2.0 * s.min(1.0 - s)).then(|| (s, ell, objective(s, ell, a)))
        })
        .reduce_with(|p, q| {
            // argmax with lexicographic tie-break so the result is schedule independent
            match p.2.total_cmp(&q.2) {
                std::cmp::Ordering::Greater => p,
                std::cmp::Ordering::Less => q,
                std::cmp::Ordering::Equal => {
                    if (p.0, p.1) <= (q.0, q.1) {
                        p
                    } else {
                        q
                    }
                }
            }
        })
        .expect("the grid has feasible points");
    let polished = NelderMead::default().minimize(
        |x: &[f64; 2]| {
            let (s, ell) = (x[0], x[1]);
            if ell > 0.0 && ell <= 2.0 * s.min(1.0 - s) {
                -objective(s, ell, a)
            } else {
                f64::INFINITY
            }
        },
        [best.0, best.1],
        0.5 / g,
    );
    let (s, ell, y) = if -polished.value >= best.2 {
        (polished.x[0], polished.x[1], -polished.value)
    } else {
        best
    };
    Ok(GridOptimum {
        s,
        ell,
        y,
        grid_y: best.2,
    })
}
