use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use specdet::elliptic::{h_star, invariants, solve_l2, wp_shift_with_derivative};
use specdet::extremal_l1::{optimal_ell, optimal_pulse, pulse_objective};
use specdet::extremal_lq::{
    c_of, endpoint_exponent, h_of, miss_ladder, phase_min, psi_shoot, solve_extremal,
    solve_extremal_with, ShootingProblem,
};
use specdet::gy::DetMethod;
use specdet::spectrum::{dirichlet_eigenvalues, fd_eigenvalues, DEFAULT_MESH};
use specdet::{propagate, propagate_with, Error, PotentialSpec};

const TOL: f64 = 1e-10;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn piecewise_strategy(signed: bool) -> impl Strategy<Value = PotentialSpec> {
    let lo = if signed { -20.0 } else { 0.0 };
    (1usize..7)
        .prop_flat_map(move |cells| {
            (
                prop::collection::vec(0.01f64..0.99, cells - 1),
                prop::collection::vec(lo..20.0, cells),
            )
        })
        .prop_map(move |(mut cuts, mut values)| {
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut breakpoints = vec![0.0];
            breakpoints.extend(cuts);
            breakpoints.push(1.0);
            values.truncate(breakpoints.len() - 1);
            PotentialSpec::piecewise(breakpoints, values, signed).unwrap()
        })
}

fn refine(v: &PotentialSpec) -> PotentialSpec {
    let PotentialSpec::PiecewiseConstant {
        breakpoints,
        values,
        signed,
    } = v
    else {
        unreachable!()
    };
    let mut bp = vec![0.0];
    let mut vals = Vec::new();
    for (w, &x) in breakpoints.windows(2).zip(values) {
        bp.extend([0.5 * (w[0] + w[1]), w[1]]);
        vals.extend([x, x]);
    }
    PotentialSpec::piecewise(bp, vals, *signed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nonnegative_potentials_keep_y_positive_and_bounded(v in piecewise_strategy(false)) {
        let r = propagate(&v, TOL).unwrap();
        prop_assert!(r.y1 > 0.0);
        prop_assert_eq!(r.sign_changes, 0);
        prop_assert!(r.y1.hypot(r.dy1) <= (1.0 + v.l1_norm()).exp());
    }

    #[test]
    fn determinant_ignores_cell_refinement(v in piecewise_strategy(true)) {
        let d = propagate(&v, TOL).unwrap().det;
        let d_fine = propagate(&refine(&v), TOL).unwrap().det;
        prop_assert!((d - d_fine).abs() <= 1e-12 * d.abs().max(1.0));
    }

    #[test]
    fn potential_json_round_trips(v in piecewise_strategy(true)) {
        let back = PotentialSpec::from_json(v.to_json().as_bytes()).unwrap();
        prop_assert_eq!(back, v);
    }
}

#[test]
fn adaptive_integration_agrees_with_exact_cells() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let cells = rng.gen_range(1..6);
        let mut bp: Vec<f64> = (0..cells - 1).map(|_| rng.gen_range(0.05..0.95)).collect();
        bp.sort_by(f64::total_cmp);
        bp.insert(0, 0.0);
        bp.push(1.0);
        let values = (0..cells).map(|_| rng.gen_range(0.0..10.0)).collect();
        let v = PotentialSpec::piecewise(bp, values, false).unwrap();
        let exact = propagate_with(&v, 1e-12, DetMethod::ExactPiecewise).unwrap();
        let rk = propagate_with(&v, 1e-12, DetMethod::AdaptiveRk).unwrap();
        assert!(rel(rk.det, exact.det) <= 1e-9, "{} vs {}", rk.det, exact.det);
    }
}

#[test]
fn constant_shift_moves_every_eigenvalue() {
    let zero = dirichlet_eigenvalues(&PotentialSpec::Zero, 50, DEFAULT_MESH).unwrap();
    let shifted = dirichlet_eigenvalues(&PotentialSpec::constant(7.5).unwrap(), 50, DEFAULT_MESH).unwrap();
    for (a, b) in zero.lambdas.iter().zip(&shifted.lambdas) {
        assert!((b - a - 7.5).abs() <= 1e-8 * b, "{a} {b}");
    }
}

#[test]
fn nested_pulses_order_the_spectrum() {
    let inner = PotentialSpec::pulse(0.4, 0.6, 5.0).unwrap();
    let outer = PotentialSpec::pulse(0.3, 0.7, 5.0).unwrap();
    let taller = PotentialSpec::pulse(0.3, 0.7, 12.0).unwrap();
    let l = |v: &PotentialSpec| dirichlet_eigenvalues(v, 40, DEFAULT_MESH).unwrap().lambdas;
    let (a, b, c) = (l(&inner), l(&outer), l(&taller));
    for n in 0..40 {
        assert!(a[n] <= b[n] && b[n] <= c[n], "n = {}", n + 1);
    }
}

#[test]
fn eigenvalue_shifts_lie_between_zero_and_the_peak() {
    let v = PotentialSpec::pulse(1.0 / 3.0, 2.0 / 3.0, 9.0).unwrap();
    let s = dirichlet_eigenvalues(&v, 200, DEFAULT_MESH).unwrap();
    for (k, l) in s.lambdas.iter().enumerate() {
        let n = (k + 1) as f64;
        let shift = l - n * n * std::f64::consts::PI.powi(2);
        assert!((0.0..=9.0).contains(&shift), "n = {n}: shift {shift}");
    }
    let tail = s.lambdas[199] - (200.0 * std::f64::consts::PI).powi(2);
    assert!((tail - v.integral()).abs() <= 0.05, "shift at n = 200: {tail}");
}

#[test]
fn finite_differences_track_shooting() {
    let v = PotentialSpec::pulse(0.2, 0.7, 6.0).unwrap();
    let exact = dirichlet_eigenvalues(&v, 10, DEFAULT_MESH).unwrap();
    let fd = fd_eigenvalues(&v, 10, 4000).unwrap();
    for (a, b) in exact.lambdas.iter().zip(&fd.lambdas) {
        assert!(rel(*b, *a) <= 1e-3, "{a} {b}");
    }
}

#[test]
fn optimal_pulse_beats_the_point_mass() {
    for a in [1e-4, 0.1, 1.0, 5.0, 40.0, 300.0] {
        let o = optimal_pulse(a).unwrap();
        assert!(o.d_max > 1.0 + a / 4.0, "A = {a}");
        assert!(rel(o.potential().l1_norm(), a) <= 1e-14);
    }
}

#[test]
fn optimal_length_is_stationary() {
    for a in [0.5, 3.0, 16.0] {
        let ell = optimal_ell(a);
        assert!((a * (ell - 1.0).powi(2) - 4.0 * ell).abs() <= 1e-12 * a.max(1.0));
        let d = 1e-5;
        let slope = (pulse_objective(0.5, ell + d, a).unwrap()
            - pulse_objective(0.5, ell - d, a).unwrap())
            / (2.0 * d);
        assert!(slope.abs() <= 1e-6, "A = {a}: dy/dell = {slope:e}");
    }
}

const CASES: [(f64, f64); 15] = [
    (0.5, 1.25), (0.5, 1.5), (0.5, 2.0), (0.5, 3.0), (0.5, 5.0),
    (1.0, 1.25), (1.0, 1.5), (1.0, 2.0), (1.0, 3.0), (1.0, 5.0),
    (4.0, 1.25), (4.0, 1.5), (4.0, 2.0), (4.0, 3.0), (4.0, 5.0),
];

#[test]
fn phase_function_brackets_the_shooting_interval() {
    for (a, q) in CASES {
        let c = c_of(a, q).unwrap();
        let h = h_of(a, q).unwrap();
        assert!(phase_min(a, q, c).unwrap() < 0.0);
        assert!(phase_min(a, q, h).unwrap().abs() <= 1e-9 * (h - c).powi(2));
    }
}

#[test]
fn miss_changes_sign_once_on_a_fine_ladder() {
    for (a, q) in CASES {
        let prob = ShootingProblem::new(a, q).unwrap();
        let ladder = miss_ladder(&prob, 64).unwrap();
        let changes = ladder.windows(2).filter(|w| (w[0].1 < 0.0) != (w[1].1 < 0.0)).count();
        assert_eq!(changes, 1, "(A, q) = ({a}, {q})");
    }
}

#[test]
fn miss_increases_with_h_above_the_root() {
    for (a, q) in [(1.0, 2.0), (1.0, 1.5), (1.0, 3.0)] {
        let prob = ShootingProblem::new(a, q).unwrap();
        let root = solve_extremal_with(&prob, 1e-9).unwrap().h;
        let misses: Vec<f64> = (0..10)
            .map(|k| {
                let h = root + (prob.h - root) * k as f64 / 10.0;
                let shot = psi_shoot(h, &prob).unwrap();
                assert!(shot.psi.iter().all(|&p| p >= -1e-9), "H = {h}");
                shot.miss
            })
            .collect();
        assert!(misses.windows(2).all(|w| w[1] > w[0]), "(A, q) = ({a}, {q}): {misses:?}");
        let dh = 1e-6 * root;
        let dmiss = psi_shoot(root + dh, &prob).unwrap().miss - psi_shoot(root - dh, &prob).unwrap().miss;
        assert!(dmiss > 0.0);
    }
}

#[test]
fn orbits_stay_on_their_phase_curve() {
    for (a, q) in CASES {
        let s = solve_extremal(a, q, 1e-9).unwrap();
        let scale = s.first_integral.abs();
        let bound = if scale <= 1e3 { 1e-8 } else { 1e-10 * scale };
        assert!(s.phase_residual <= bound, "(A, q) = ({a}, {q}): {:e}", s.phase_residual);
        assert!(s.symmetry_defect <= 10.0 * 1e-9);
    }
}

#[test]
fn endpoint_fit_needs_a_fine_grid() {
    let prob = ShootingProblem::new(1.0, 2.0).unwrap().with_grid(65).unwrap();
    let s = solve_extremal_with(&prob, 1e-9).unwrap();
    let err = endpoint_exponent(&s).unwrap_err();
    assert!(matches!(err, Error::Resolution(_)), "{err}");
}

#[test]
fn shifted_weierstrass_is_even_and_spans_the_oval() {
    let a = 1.0;
    let h = solve_l2(a, 1e-10).unwrap().h;
    let inv = invariants(a, h).unwrap();
    assert!((inv.e1 + inv.e2 + inv.e3).abs() <= 1e-12 * inv.e1.abs());
    for k in 0..100 {
        let x = inv.omega * k as f64 / 99.0;
        let (f, df) = wp_shift_with_derivative(x, &inv).unwrap();
        let (g, dg) = wp_shift_with_derivative(-x, &inv).unwrap();
        assert!((f - g).abs() <= 1e-10 * inv.e1.abs());
        assert!((df + dg).abs() <= 1e-8 * inv.e1.abs().powf(1.5));
        assert!(f >= inv.e3 - 1e-10 * inv.e1.abs() && f <= inv.e2 + 1e-10 * inv.e1.abs());
    }
    assert_eq!(wp_shift_with_derivative(0.0, &inv).unwrap().0, inv.e3);
    let top = wp_shift_with_derivative(inv.omega, &inv).unwrap().0;
    assert!(rel(top, inv.e2) <= 1e-10);
}

#[test]
fn h_star_solves_its_polynomial() {
    for a in [0.5, 1.0, 2.0, 5.0] {
        let h = h_star(a).unwrap();
        let lhs = 128.0 * h.powi(3);
        let rhs = 9.0 * (h - 4.5 * a * a).powi(4);
        assert!(rel(lhs, rhs) <= 1e-9, "A = {a}");
        assert!(h > 4.5 * a * a);
    }
}

#[test]
fn l2_extremal_beats_the_constant() {
    for a in [0.5, 1.0, 2.0] {
        let s = solve_l2(a, 1e-10).unwrap();
        let flat = propagate(&PotentialSpec::constant(a).unwrap(), TOL).unwrap().det;
        assert!(s.det > flat, "A = {a}: {} vs {flat}", s.det);
    }
}
