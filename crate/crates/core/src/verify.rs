//! A quick self-check over every solver, used by `specdet verify`.

use serde::Serialize;

use crate::elliptic::{h_star, solve_l2};
use crate::error::Result;
use crate::extremal_l1::{grid_oracle, optimal_ell, optimal_pulse};
use crate::extremal_lq::{h_of, solve_extremal};
use crate::gy::{lipschitz_gap, propagate, pulse_det_closed_form, upper_bound_series};
use crate::potential::PotentialSpec;
use crate::spectrum::{dirichlet_eigenvalues, regularized_det_product, DEFAULT_MESH};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, run: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match run() {
        Ok((passed, detail)) => Check {
            name,
            passed,
            detail,
        },
        Err(e) => Check {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

pub fn run_all() -> Vec<Check> {
    let tol = 1e-10;
    vec![
        check("gy.zero_potential", || {
            let d = propagate(&PotentialSpec::Zero, tol)?.det;
            Ok((d == 2.0, format!("det = {d}")))
        }),
        check("gy.constant_closed_form", || {
            let mut worst = 0.0_f64;
            for a in [0.1_f64, 1.0, 10.0] {
                let y1 = propagate(&PotentialSpec::constant(a)?, tol)?.y1;
                worst = worst.max(rel(y1, a.sqrt().sinh() / a.sqrt()));
            }
            Ok((worst <= 1e-12, format!("max rel err = {worst:e}")))
        }),
        check("gy.pulse_closed_form", || {
            let mut worst = 0.0_f64;
            for (x1, x2, m) in [(0.1, 0.4, 3.0), (0.25, 0.9, 50.0), (0.0, 1.0, 0.5)] {
                let d = propagate(&PotentialSpec::pulse(x1, x2, m)?, tol)?.det;
                worst = worst.max(rel(d, pulse_det_closed_form(x1, x2, m)?));
            }
            Ok((worst <= 1e-10, format!("max rel err = {worst:e}")))
        }),
        check("gy.series_bound", || {
            let v = PotentialSpec::pulse(0.2, 0.5, 20.0)?;
            let y1 = propagate(&v, tol)?.y1;
            let bound = upper_bound_series(v.l1_norm(), 10_000);
            Ok(((y1 - 1.0).abs() <= bound, format!("|y1 - 1| = {}, bound = {bound}", (y1 - 1.0).abs())))
        }),
        check("gy.lipschitz", || {
            let g = lipschitz_gap(
                &PotentialSpec::pulse(0.2, 0.5, 4.0)?,
                &PotentialSpec::pulse(0.3, 0.6, 5.0)?,
                tol,
            )?;
            Ok((g.holds(), format!("gap = {:e}, bound = {:e}", g.gap, g.bound)))
        }),
        check("gy.absolute_value_dominates", || {
            let v = PotentialSpec::piecewise(
                vec![0.0, 0.3, 0.6, 1.0],
                vec![2.0, -3.0, 1.5],
                true,
            )?;
            let d = propagate(&v, tol)?.det;
            let d_abs = propagate(&v.abs(), tol)?.det;
            Ok((d_abs >= d, format!("D(|V|) = {d_abs}, D(V) = {d}")))
        }),
        check("extremal_l1.closed_form_vs_propagation", || {
            let o = optimal_pulse(3.0)?;
            let d = propagate(&o.potential(), tol)?.det;
            Ok((rel(d, o.det_max) <= 1e-12, format!("rel err = {:e}", rel(d, o.det_max))))
        }),
        check("extremal_l1.grid_oracle", || {
            let g = grid_oracle(3.0, 256)?;
            let ok = (g.s - 0.5).abs() <= 1e-3 && (g.ell - optimal_ell(3.0)).abs() <= 1e-3;
            Ok((ok, format!("s* = {}, ell* = {}", g.s, g.ell)))
        }),
        check("extremal_lq.q2_structure", || {
            let s = solve_extremal(1.0, 2.0, 1e-9)?;
            let ok = s.miss.abs() <= 1e-9
                && s.symmetry_defect <= 1e-8
                && s.norm_residual <= 1e-6
                && s.increasing_on_first_half()
                && s.h > s.c
                && s.h < s.h_upper;
            Ok((ok, format!("H = {}, miss = {:e}", s.h, s.miss)))
        }),
        check("elliptic.matches_shooting", || {
            let e = solve_l2(1.0, 1e-10)?;
            let s = solve_extremal(1.0, 2.0, 1e-10)?;
            let gap = e.v.iter().zip(&s.v).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            let ok = gap <= 1e-8 && rel(e.h, s.h) <= 1e-10;
            Ok((ok, format!("max |ΔV| = {gap:e}, ΔH/H = {:e}", rel(e.h, s.h))))
        }),
        check("elliptic.h_star_matches_h", || {
            let r = rel(h_star(1.0)?, h_of(1.0, 2.0)?);
            Ok((r <= 1e-10, format!("rel diff = {r:e}")))
        }),
        check("spectrum.regularized_product", || {
            let s = dirichlet_eigenvalues(&PotentialSpec::constant(1.0)?, 200, DEFAULT_MESH)?;
            let p = regularized_det_product(&s)?.corrected;
            let exact = 2.0 * 1f64.sinh();
            Ok((rel(p, exact) <= 1e-3, format!("product = {p}, exact = {exact}")))
        }),
        check("value_monotone_in_q", || {
            let qs = [1.25, 1.5, 2.0, 3.0];
            let d: Vec<f64> = qs
                .iter()
                .map(|&q| solve_extremal(1.0, q, 1e-9).map(|s| s.d_max))
                .collect::<Result<_>>()?;
            let ok = d.windows(2).all(|w| w[0] > w[1]) && d[0] <= optimal_pulse(1.0)?.d_max;
            Ok((ok, format!("D_max = {d:?}")))
        }),
    ]
}
