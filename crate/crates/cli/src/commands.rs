use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};
use specdet::elliptic::solve_l2_on_grid;
use specdet::extremal_l1::optimal_pulse;
use specdet::extremal_lq::{endpoint_exponent, solve_extremal_with, ShootingProblem};
use specdet::spectrum::{dirichlet_eigenvalues, fd_eigenvalues, regularized_det_product, SpectrumMethod};
use specdet::verify::run_all;
use specdet::{propagate, propagate_with, Error, ExtremalSolution, PotentialSpec};

use crate::output::{num, Report, Table};
use crate::{DetArgs, Failure, OptimizeArgs, SpectrumArgs, SweepArgs};

const CROSS_GAP: f64 = 1e-8;
const CROSS_H: f64 = 1e-10;

fn check_tol(tol: f64, lo: f64, hi: f64) -> Result<(), Failure> {
    if (lo..=hi).contains(&tol) {
        Ok(())
    } else {
        Err(Failure::Input(format!("--tol {tol:e} is outside [{lo:e}, {hi:e}]")))
    }
}

fn check_problem(a: f64, q: f64) -> Result<(), Failure> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Failure::Input(format!("--A {a} must be positive and finite")));
    }
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Failure::Input(format!("--q {q} must be finite and at least 1")));
    }
    Ok(())
}

fn load_potential(path: &Path) -> Result<PotentialSpec, Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(PotentialSpec::from_json(&bytes)?)
}

pub fn det(args: &DetArgs) -> Result<Report, Failure> {
    check_tol(args.tol, 1e-14, 1e-2)?;
    let v = load_potential(&args.potential)?;
    let r = match args.method {
        Some(m) => propagate_with(&v, args.tol, m.into())?,
        None => propagate(&v, args.tol)?,
    };
    let mut table = Table::new(vec!["y1", "det", "method", "est_error"]);
    table.push(vec![num(r.y1), num(r.det), r.method.as_str().into(), num(r.est_error)]);
    Ok(Report {
        json: json!({
            "y1": r.y1,
            "det": r.det,
            "method": r.method.as_str(),
            "est_error": r.est_error,
        }),
        table,
        disagreement: None,
    })
}

enum Optimum {
    Pulse(specdet::extremal_l1::L1Optimum),
    Profile {
        sol: ExtremalSolution,
        method: &'static str,
    },
}

fn solve(a: f64, q: f64, tol: f64, grid: usize) -> Result<Optimum, Failure> {
    if q == 1.0 {
        return Ok(Optimum::Pulse(optimal_pulse(a)?));
    }
    if q == 2.0 {
        return Ok(Optimum::Profile {
            sol: solve_l2_on_grid(a, tol, grid)?,
            method: "elliptic",
        });
    }
    let prob = ShootingProblem::new(a, q)?.with_grid(grid)?;
    Ok(Optimum::Profile {
        sol: solve_extremal_with(&prob, tol)?,
        method: "shooting",
    })
}

fn uniform_grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| i as f64 / (n - 1) as f64)
}

pub fn optimize(args: &OptimizeArgs) -> Result<Report, Failure> {
    check_problem(args.a, args.q)?;
    check_tol(args.tol, 1e-12, 1e-6)?;
    if args.verify_cross && args.q != 2.0 {
        return Err(Failure::Input("--verify-cross needs --q 2".into()));
    }
    let optimum = solve(args.a, args.q, args.tol, args.grid)?;
    let mut samples = Table::new(vec!["t", "v"]);
    let mut disagreement = None;
    let (json, potential) = match &optimum {
        Optimum::Pulse(o) => {
            let pot = o.potential();
            for t in uniform_grid(args.grid) {
                samples.push(vec![num(t), num(pot.eval(t)?)]);
            }
            let PotentialSpec::Pulse { x1, x2, m } = pot else {
                unreachable!("the L1 optimum is a pulse")
            };
            let json = json!({
                "q": args.q,
                "A": args.a,
                "method": "closed-form",
                "det": o.det_max,
                "D_max": o.d_max,
                "norm_residual": (pot.l1_norm() - args.a).abs(),
                "pulse": { "x1": x1, "x2": x2, "height": m },
            });
            (json, pot)
        }
        Optimum::Profile { sol, method } => {
            for (t, v) in sol.grid().into_iter().zip(&sol.v) {
                samples.push(vec![num(t), num(*v)]);
            }
            let endpoint = match endpoint_exponent(sol) {
                Ok(fit) => json!({
                    "slope": fit.slope,
                    "behaviour": fit.behaviour,
                    "points": fit.points,
                }),
                Err(_) => Value::Null,
            };
            let mut json = json!({
                "q": args.q,
                "A": args.a,
                "H": sol.h,
                "method": method,
                "det": sol.det,
                "D_max": sol.d_max,
                "norm": sol.norm,
                "norm_residual": sol.norm_residual,
                "miss": sol.miss,
                "symmetry_defect": sol.symmetry_defect,
                "first_integral": sol.first_integral,
                "first_integral_drift": sol.first_integral_drift,
                "iterations": sol.iterations,
                "bracket": { "c": sol.c, "h": sol.h_upper },
                "endpoint": endpoint,
            });
            if args.verify_cross {
                let prob = ShootingProblem::new(args.a, args.q)?.with_grid(args.grid)?;
                let shot = solve_extremal_with(&prob, args.tol)?;
                let gap = sol
                    .v
                    .iter()
                    .zip(&shot.v)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                let h_rel = ((sol.h - shot.h) / shot.h).abs();
                let agrees = gap <= CROSS_GAP && h_rel <= CROSS_H;
                if !agrees {
                    disagreement = Some(format!(
                        "closed form and shooting disagree: max |ΔV| = {gap:e}, ΔH/H = {h_rel:e}"
                    ));
                }
                json["cross_check"] = json!({
                    "H_shooting": shot.h,
                    "H_rel_diff": h_rel,
                    "max_v_gap": gap,
                    "agrees": agrees,
                });
            }
            (json, sol.to_potential())
        }
    };
    if let Some(path) = &args.out {
        samples.write_file(path)?;
    }
    if let Some(path) = &args.save_potential {
        std::fs::write(path, potential.to_json())
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    let mut table = Table::new(vec!["q", "A", "H", "det", "D_max", "norm_residual"]);
    table.push(vec![
        num(args.q),
        num(args.a),
        json["H"].as_f64().map(num).unwrap_or_default(),
        num(json["det"].as_f64().unwrap_or(f64::NAN)),
        num(json["D_max"].as_f64().unwrap_or(f64::NAN)),
        num(json["norm_residual"].as_f64().unwrap_or(f64::NAN)),
    ]);
    Ok(Report {
        json,
        table,
        disagreement,
    })
}

pub fn spectrum(args: &SpectrumArgs) -> Result<Report, Failure> {
    let v = load_potential(&args.potential)?;
    let spec = match SpectrumMethod::from(args.method) {
        SpectrumMethod::PrueferShooting => dirichlet_eigenvalues(&v, args.n, args.mesh)?,
        SpectrumMethod::FdMatrix => fd_eigenvalues(&v, args.n, args.mesh)?,
    };
    let mut table = Table::new(vec!["n", "lambda", "est_error"]);
    let mut rows = Vec::with_capacity(spec.n);
    for (k, (l, e)) in spec.lambdas.iter().zip(&spec.est_error).enumerate() {
        table.push(vec![(k + 1).to_string(), num(*l), num(*e)]);
        rows.push(json!({ "n": k + 1, "lambda": l, "est_error": e }));
    }
    let product = match regularized_det_product(&spec) {
        Ok(p) => json!({ "raw": p.raw, "corrected": p.corrected }),
        Err(Error::Domain(msg)) => json!({ "unavailable": msg }),
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = &args.out {
        table.write_file(path)?;
    }
    Ok(Report {
        json: json!({
            "method": spec.method.as_str(),
            "n": spec.n,
            "mesh": spec.mesh,
            "potential_integral": spec.potential_integral,
            "eigenvalues": rows,
            "regularized_product": product,
        }),
        table,
        disagreement: None,
    })
}

pub fn sweep(args: &SweepArgs) -> Result<Report, Failure> {
    check_tol(args.tol, 1e-12, 1e-6)?;
    let mut qs = args.q_list.clone();
    for &q in &qs {
        check_problem(args.a, q)?;
    }
    qs.sort_by(f64::total_cmp);
    qs.dedup();
    let solved: Vec<(f64, Optimum)> = qs
        .par_iter()
        .map(|&q| {
            solve(args.a, q, args.tol, specdet::extremal_lq::DEFAULT_GRID).map(|o| (q, o))
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(vec!["q", "H", "det", "D_max"]);
    let mut rows = Vec::with_capacity(solved.len());
    let mut d_max = Vec::with_capacity(solved.len());
    for (q, o) in &solved {
        let (h, det, d) = match o {
            Optimum::Pulse(p) => (None, p.det_max, p.d_max),
            Optimum::Profile { sol, .. } => (Some(sol.h), sol.det, sol.d_max),
        };
        table.push(vec![num(*q), h.map(num).unwrap_or_default(), num(det), num(d)]);
        rows.push(json!({ "q": q, "H": h, "det": det, "D_max": d }));
        d_max.push(d);
    }
    Ok(Report {
        json: json!({
            "A": args.a,
            "rows": rows,
            "strictly_decreasing": d_max.windows(2).all(|w| w[0] > w[1]),
        }),
        table,
        disagreement: None,
    })
}

pub fn verify() -> (Report, bool) {
    let checks = run_all();
    let all_passed = checks.iter().all(|c| c.passed);
    let mut table = Table::new(vec!["name", "passed", "detail"]);
    for c in &checks {
        table.push(vec![c.name.into(), c.passed.to_string(), c.detail.clone()]);
    }
    let report = Report {
        json: json!({ "checks": checks, "passed": all_passed }),
        table,
        disagreement: None,
    };
    (report, all_passed)
}
