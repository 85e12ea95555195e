//! Derivative-free minimisation (Nelder–Mead).

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum<const N: usize> {
    pub x: [f64; N],
    pub value: f64,
    pub iterations: usize,
    /// Largest distance from the best vertex when the search stopped.
    pub diameter: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub max_iter: usize,
    pub diameter_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            max_iter: 200,
            diameter_tol: 1e-9,
        }
    }
}

fn lerp<const N: usize>(a: &[f64; N], b: &[f64; N], t: f64) -> [f64; N] {
    std::array::from_fn(|i| a[i] + t * (b[i] - a[i]))
}

fn dist<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

impl NelderMead {
    /// Minimise `f` from an axis-aligned simplex of edge `step` at `x0`.
    /// Infeasible points should return `+inf`.
    pub fn minimize<const N: usize, F: Fn(&[f64; N]) -> f64>(
        &self,
        f: F,
        x0: [f64; N],
        step: f64,
    ) -> Minimum<N> {
        let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
        simplex.push((x0, f(&x0)));
        for i in 0..N {
            let mut x = x0;
            x[i] += step;
            simplex.push((x, f(&x)));
        }
        let diameter = |s: &[([f64; N], f64)]| {
            s[1..].iter().map(|v| dist(&v.0, &s[0].0)).fold(0.0, f64::max)
        };
        let mut iterations = 0;
        while iterations < self.max_iter {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if diameter(&simplex) < self.diameter_tol {
                break;
            }
            iterations += 1;
            let centroid: [f64; N] = std::array::from_fn(|i| {
                simplex[..N].iter().map(|v| v.0[i]).sum::<f64>() / N as f64
            });
            let (worst, f_worst) = simplex[N];
            let reflected = lerp(&centroid, &worst, -1.0);
            let f_r = f(&reflected);
            if f_r < simplex[0].1 {
                let expanded = lerp(&centroid, &worst, -2.0);
                let f_e = f(&expanded);
                simplex[N] = if f_e < f_r { (expanded, f_e) } else { (reflected, f_r) };
                continue;
            }
            if f_r < simplex[N - 1].1 {
                simplex[N] = (reflected, f_r);
                continue;
            }
            let (contracted, f_c) = if f_r < f_worst {
                let c = lerp(&centroid, &reflected, 0.5);
                (c, f(&c))
            } else {
                let c = lerp(&centroid, &worst, 0.5);
                (c, f(&c))
            };
            if f_c < f_worst.min(f_r) {
                simplex[N] = (contracted, f_c);
                continue;
            }
            let best = simplex[0].0;
            for v in simplex.iter_mut().skip(1) {
                v.0 = lerp(&best, &v.0, 0.5);
                v.1 = f(&v.0);
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        Minimum {
            x: simplex[0].0,
            value: simplex[0].1,
            iterations,
            diameter: diameter(&simplex),
        }
    }
}
