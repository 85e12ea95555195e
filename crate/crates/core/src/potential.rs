//! Potentials on the unit interval.
//!
//! A [`PotentialSpec`] is an immutable description of `V` on `[0, 1]`. Every
//! solver in the crate consumes this type, and its JSON form is the
//! interchange format used by the command-line tool.
//!
//! Stored values must be finite and non-negative. The `signed` flag on the
//! piecewise and sampled variants lifts the sign restriction; it exists so
//! that comparison experiments between `V` and `|V|` can be run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Refinement stops once successive Simpson values agree to this relative level.
const SIMPSON_RTOL: f64 = 1e-10;
/// Upper bound on the number of quadrature points.
const SIMPSON_MAX_POINTS: usize = 1 << 20;

/// Interpolation rule for [`PotentialSpec::Sampled`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Interp {
    /// Piecewise constant: the value at node `i` holds on `[t_i, t_{i+1})`.
    #[default]
    #[serde(rename = "left")]
    Left,
    #[serde(rename = "linear")]
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum PotentialSpec {
    #[serde(rename = "zero")]
    Zero,
    #[serde(rename = "constant")]
    Constant { a: f64 },
    /// `m` on the closed interval `[x1, x2]`, zero elsewhere.
    #[serde(rename = "pulse")]
    Pulse { x1: f64, x2: f64, m: f64 },
    /// `values[i]` on `[breakpoints[i], breakpoints[i + 1])`.
    #[serde(rename = "piecewise")]
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        #[serde(default)]
        signed: bool,
    },
    /// `n` samples on the uniform grid `t_i = i / (n - 1)`.
    #[serde(rename = "sampled")]
    Sampled {
        n: usize,
        values: Vec<f64>,
        #[serde(default)]
        interp: Interp,
        #[serde(default)]
        signed: bool,
    },
    /// Extremal potential `V = q / (4q - 2) * psi^(1 / (q - 1))`, with `psi`
    /// given on a uniform grid and interpolated linearly.
    #[serde(rename = "extremal_lq")]
    ExtremalLq {
        q: f64,
        #[serde(rename = "A")]
        a: f64,
        #[serde(rename = "H")]
        h: f64,
        psi: Vec<f64>,
    },
}

/// A cell of a piecewise-constant potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub start: f64,
    pub width: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureRule {
    Exact,
    /// Composite Simpson with the given (even) number of intervals.
    Simpson { intervals: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    /// Exponent, `f64::INFINITY` for the sup norm.
    pub q: f64,
    pub value: f64,
    pub rule: QuadratureRule,
}

fn check_finite(field: &str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::invalid(field, format!("entry {i} is not finite"))),
        None => Ok(()),
    }
}

fn check_nonnegative(field: &str, values: &[f64], signed: bool) -> Result<()> {
    if signed {
        return Ok(());
    }
    match values.iter().position(|&v| v < 0.0) {
        Some(i) => Err(Error::invalid(
            field,
            format!("entry {i} is negative ({}) and `signed` is false", values[i]),
        )),
        None => Ok(()),
    }
}

/// Linear interpolation on the uniform grid spanned by `samples` over `[0, 1]`.
pub(crate) fn interp_uniform(samples: &[f64], t: f64) -> f64 {
    let cells = samples.len() - 1;
    let x = t * cells as f64;
    let i = (x.floor() as usize).min(cells - 1);
    let frac = x - i as f64;
    samples[i] + (samples[i + 1] - samples[i]) * frac
}

/// Composite Simpson on `[0, 1]` with `intervals` (even) subintervals.
pub(crate) fn simpson<F: Fn(f64) -> f64>(f: &F, intervals: usize) -> f64 {
    debug_assert!(intervals.is_multiple_of(2) && intervals > 0);
    let h = 1.0 / intervals as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..intervals {
        let v = f(i as f64 * h);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (f(0.0) + f(1.0) + 4.0 * odd + 2.0 * even)
}

/// Simpson with interval doubling, starting from `2 * base_cells` intervals so
/// that every panel sits inside one cell of the underlying grid.
pub(crate) fn simpson_refined<F: Fn(f64) -> f64>(f: &F, base_cells: usize) -> (f64, usize) {
    let mut intervals = 2 * base_cells.max(1);
    let mut prev = simpson(f, intervals);
    while intervals * 2 < SIMPSON_MAX_POINTS {
        intervals *= 2;
        let next = simpson(f, intervals);
        if (next - prev).abs() <= SIMPSON_RTOL * next.abs() {
            return (next, intervals);
        }
        prev = next;
    }
    (prev, intervals)
}

/// `(sum w_i |v_i|^q)^(1/q)` evaluated with a max-rescaling so large `q` does not overflow.
fn cell_norm(cells: &[Cell], q: f64) -> f64 {
    let peak = cells
        .iter()
        .filter(|c| c.width > 0.0)
        .fold(0.0_f64, |m, c| m.max(c.value.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    if q.is_infinite() {
        return peak;
    }
    let sum: f64 = cells
        .iter()
        .map(|c| c.width * (c.value.abs() / peak).powf(q))
        .sum();
    peak * sum.powf(1.0 / q)
}

impl PotentialSpec {
    pub fn constant(a: f64) -> Result<Self> {
        let v = PotentialSpec::Constant { a };
        v.validate()?;
        Ok(v)
    }

    pub fn pulse(x1: f64, x2: f64, m: f64) -> Result<Self> {
        let v = PotentialSpec::Pulse { x1, x2, m };
        v.validate()?;
        Ok(v)
    }

    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>, signed: bool) -> Result<Self> {
        let v = PotentialSpec::PiecewiseConstant {
            breakpoints,
            values,
            signed,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn sampled(values: Vec<f64>, interp: Interp, signed: bool) -> Result<Self> {
        let v = PotentialSpec::Sampled {
            n: values.len(),
            values,
            interp,
            signed,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Zero => Ok(()),
            PotentialSpec::Constant { a } => {
                check_finite("a", &[*a])?;
                check_nonnegative("a", &[*a], false)
            }
            PotentialSpec::Pulse { x1, x2, m } => {
                check_finite("x1", &[*x1])?;
                check_finite("x2", &[*x2])?;
                check_finite("m", &[*m])?;
                if *x1 < 0.0 {
                    return Err(Error::invalid("x1", format!("{x1} is below 0")));
                }
                if *x2 > 1.0 {
                    return Err(Error::invalid("x2", format!("{x2} is above 1")));
                }
                if x1 >= x2 {
                    return Err(Error::invalid("x1", format!("x1 = {x1} must be below x2 = {x2}")));
                }
                check_nonnegative("m", &[*m], false)
            }
            PotentialSpec::PiecewiseConstant {
                breakpoints,
                values,
                signed,
            } => {
                if breakpoints.len() < 2 {
                    return Err(Error::invalid("breakpoints", "need at least two entries"));
                }
                check_finite("breakpoints", breakpoints)?;
                if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
                    return Err(Error::invalid("breakpoints", "must start at 0 and end at 1"));
                }
                if let Some(i) = breakpoints.windows(2).position(|w| w[1] <= w[0]) {
                    return Err(Error::invalid(
                        "breakpoints",
                        format!("not strictly increasing at index {}", i + 1),
                    ));
                }
                if values.len() + 1 != breakpoints.len() {
                    return Err(Error::invalid(
                        "values",
                        format!(
                            "expected {} cell values, got {}",
                            breakpoints.len() - 1,
                            values.len()
                        ),
                    ));
                }
                check_finite("values", values)?;
                check_nonnegative("values", values, *signed)
            }
            PotentialSpec::Sampled {
                n, values, signed, ..
            } => {
                if *n < 2 {
                    return Err(Error::invalid("n", format!("grid size {n} is below 2")));
                }
                if values.len() != *n {
                    return Err(Error::invalid(
                        "values",
                        format!("expected {n} samples, got {}", values.len()),
                    ));
                }
                check_finite("values", values)?;
                check_nonnegative("values", values, *signed)
            }
            PotentialSpec::ExtremalLq { q, a, h, psi } => {
                if !(q.is_finite() && *q > 1.0) {
                    return Err(Error::invalid("q", format!("{q} must be a finite number above 1")));
                }
                if !(a.is_finite() && *a > 0.0) {
                    return Err(Error::invalid("A", format!("{a} must be positive")));
                }
                check_finite("H", &[*h])?;
                if psi.len() < 2 {
                    return Err(Error::invalid("psi", "need at least two samples"));
                }
                check_finite("psi", psi)
            }
        }
    }

    pub fn from_json(text: &[u8]) -> Result<Self> {
        let spec: PotentialSpec =
            serde_json::from_slice(text).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("potential serialization is infallible")
    }

    pub fn is_signed(&self) -> bool {
        matches!(
            self,
            PotentialSpec::PiecewiseConstant { signed: true, .. }
                | PotentialSpec::Sampled { signed: true, .. }
        )
    }

    /// Pointwise value. `t` must lie in `[0, 1]`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::domain(format!("t = {t} is outside [0, 1]")));
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        match self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::Constant { a } => *a,
            PotentialSpec::Pulse { x1, x2, m } => {
                if *x1 <= t && t <= *x2 {
                    *m
                } else {
                    0.0
                }
            }
            PotentialSpec::PiecewiseConstant {
                breakpoints,
                values,
                ..
            } => {
                // first breakpoint strictly greater than t
                let idx = breakpoints.partition_point(|&b| b <= t);
                values[idx.saturating_sub(1).min(values.len() - 1)]
            }
            PotentialSpec::Sampled {
                n, values, interp, ..
            } => match interp {
                Interp::Left => {
                    let i = ((t * (*n - 1) as f64).floor() as usize).min(*n - 1);
                    values[i]
                }
                Interp::Linear => interp_uniform(values, t),
            },
            PotentialSpec::ExtremalLq { q, psi, .. } => {
                extremal_value(*q, interp_uniform(psi, t))
            }
        }
    }

    /// Exact piecewise-constant decomposition, when the variant has one.
    pub fn cells(&self) -> Option<Vec<Cell>> {
        let cell = |start: f64, end: f64, value: f64| Cell {
            start,
            width: end - start,
            value,
        };
        match self {
            PotentialSpec::Zero => Some(vec![cell(0.0, 1.0, 0.0)]),
            PotentialSpec::Constant { a } => Some(vec![cell(0.0, 1.0, *a)]),
            PotentialSpec::Pulse { x1, x2, m } => {
                let mut cells = Vec::with_capacity(3);
                if *x1 > 0.0 {
                    cells.push(cell(0.0, *x1, 0.0));
                }
                cells.push(cell(*x1, *x2, *m));
                if *x2 < 1.0 {
                    cells.push(cell(*x2, 1.0, 0.0));
                }
                Some(cells)
            }
            PotentialSpec::PiecewiseConstant {
                breakpoints,
                values,
                ..
            } => Some(
                breakpoints
                    .windows(2)
                    .zip(values)
                    .map(|(w, &v)| cell(w[0], w[1], v))
                    .collect(),
            ),
            PotentialSpec::Sampled {
                n,
                values,
                interp: Interp::Left,
                ..
            } => {
                let step = 1.0 / (*n - 1) as f64;
                Some(
                    (0..*n - 1)
                        .map(|i| {
                            let end = if i + 2 == *n { 1.0 } else { (i + 1) as f64 * step };
                            cell(i as f64 * step, end, values[i])
                        })
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// Interior points where `V` or its derivative may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        let grid = |len: usize| -> Vec<f64> {
            (1..len - 1).map(|i| i as f64 / (len - 1) as f64).collect()
        };
        match self {
            PotentialSpec::Sampled { n, .. } => grid(*n),
            PotentialSpec::ExtremalLq { psi, .. } => grid(psi.len()),
            _ => self
                .cells()
                .map(|cells| cells.iter().skip(1).map(|c| c.start).collect())
                .unwrap_or_default(),
        }
    }

    fn grid_cells(&self) -> usize {
        match self {
            PotentialSpec::Sampled { n, .. } => *n - 1,
            PotentialSpec::ExtremalLq { psi, .. } => psi.len() - 1,
            _ => 1,
        }
    }

    fn node_peak(&self) -> f64 {
        match self {
            PotentialSpec::Sampled { values, .. } => {
                values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
            }
            PotentialSpec::ExtremalLq { q, psi, .. } => psi
                .iter()
                .fold(0.0_f64, |m, &p| m.max(extremal_value(*q, p))),
            _ => 0.0,
        }
    }

    /// `||V||_q` on `[0, 1]`; `q` may be `f64::INFINITY`.
    pub fn lq_norm(&self, q: f64) -> Result<NormReport> {
        if q.is_nan() || q < 1.0 {
            return Err(Error::domain(format!("norm exponent q = {q} is below 1")));
        }
        if let Some(cells) = self.cells() {
            return Ok(NormReport {
                q,
                value: cell_norm(&cells, q),
                rule: QuadratureRule::Exact,
            });
        }
        let peak = self.node_peak();
        if peak == 0.0 || q.is_infinite() {
            return Ok(NormReport {
                q,
                value: peak,
                rule: QuadratureRule::Exact,
            });
        }
        let f = |t: f64| (self.eval_unchecked(t).abs() / peak).powf(q);
        let (integral, intervals) = simpson_refined(&f, self.grid_cells());
        Ok(NormReport {
            q,
            value: peak * integral.powf(1.0 / q),
            rule: QuadratureRule::Simpson { intervals },
        })
    }

    pub fn l1_norm(&self) -> f64 {
        self.lq_norm(1.0).map(|r| r.value).unwrap_or(f64::NAN)
    }

    /// Signed integral of `V` over `[0, 1]`.
    pub fn integral(&self) -> f64 {
        if let Some(cells) = self.cells() {
            return cells.iter().map(|c| c.value * c.width).sum();
        }
        simpson_refined(&|t| self.eval_unchecked(t), self.grid_cells()).0
    }

    /// The pointwise absolute value, with the `signed` flag cleared.
    pub fn abs(&self) -> Self {
        match self {
            PotentialSpec::PiecewiseConstant {
                breakpoints,
                values,
                ..
            } => PotentialSpec::PiecewiseConstant {
                breakpoints: breakpoints.clone(),
                values: values.iter().map(|v| v.abs()).collect(),
                signed: false,
            },
            PotentialSpec::Sampled {
                n, values, interp, ..
            } => PotentialSpec::Sampled {
                n: *n,
                values: values.iter().map(|v| v.abs()).collect(),
                interp: *interp,
                signed: false,
            },
            other => other.clone(),
        }
    }

    /// Multiply `V` by a non-negative factor.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            PotentialSpec::Zero => PotentialSpec::Zero,
            PotentialSpec::Constant { a } => PotentialSpec::Constant { a: a * factor },
            PotentialSpec::Pulse { x1, x2, m } => PotentialSpec::Pulse {
                x1: *x1,
                x2: *x2,
                m: m * factor,
            },
            PotentialSpec::PiecewiseConstant {
                breakpoints,
                values,
                signed,
            } => PotentialSpec::PiecewiseConstant {
                breakpoints: breakpoints.clone(),
                values: values.iter().map(|v| v * factor).collect(),
                signed: *signed,
            },
            PotentialSpec::Sampled {
                n,
                values,
                interp,
                signed,
            } => PotentialSpec::Sampled {
                n: *n,
                values: values.iter().map(|v| v * factor).collect(),
                interp: *interp,
                signed: *signed,
            },
            PotentialSpec::ExtremalLq { q, a, h, psi } => {
                let s = factor.powf(q - 1.0);
                PotentialSpec::ExtremalLq {
                    q: *q,
                    a: a * factor,
                    h: *h,
                    psi: psi.iter().map(|p| p * s).collect(),
                }
            }
        }
    }
}

/// `q / (4q - 2) * max(psi, 0)^(1 / (q - 1))`.
pub fn extremal_value(q: f64, psi: f64) -> f64 {
    q / (4.0 * q - 2.0) * psi.max(0.0).powf(1.0 / (q - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pulse_third() -> PotentialSpec {
        PotentialSpec::pulse(1.0 / 3.0, 2.0 / 3.0, 9.0).unwrap()
    }

    #[test]
    fn eval_basic_variants() {
        assert_eq!(PotentialSpec::Zero.eval(0.5).unwrap(), 0.0);
        assert_eq!(pulse_third().eval(0.5).unwrap(), 9.0);
        assert_eq!(pulse_third().eval(0.1).unwrap(), 0.0);
        // closed support
        assert_eq!(pulse_third().eval(1.0 / 3.0).unwrap(), 9.0);
        assert_eq!(pulse_third().eval(2.0 / 3.0).unwrap(), 9.0);
    }

    #[test]
    fn eval_rejects_outside_unit_interval() {
        assert!(matches!(
            PotentialSpec::Zero.eval(1.5),
            Err(Error::Domain(_))
        ));
        assert!(PotentialSpec::Zero.eval(-1e-9).is_err());
    }

    #[test]
    fn eval_piecewise_and_sampled() {
        let pw = PotentialSpec::piecewise(vec![0.0, 0.25, 1.0], vec![2.0, 5.0], false).unwrap();
        assert_eq!(pw.eval(0.0).unwrap(), 2.0);
        assert_eq!(pw.eval(0.25).unwrap(), 5.0);
        assert_eq!(pw.eval(1.0).unwrap(), 5.0);

        let s = PotentialSpec::sampled(vec![0.0, 1.0, 4.0], Interp::Linear, false).unwrap();
        assert_eq!(s.eval(0.25).unwrap(), 0.5);
        assert_eq!(s.eval(0.75).unwrap(), 2.5);
        let s = PotentialSpec::sampled(vec![0.0, 1.0, 4.0], Interp::Left, false).unwrap();
        assert_eq!(s.eval(0.75).unwrap(), 1.0);
        assert_eq!(s.eval(1.0).unwrap(), 4.0);
    }

    #[test]
    fn eval_extremal_uses_power_law() {
        let v = PotentialSpec::ExtremalLq {
            q: 2.0,
            a: 1.0,
            h: 5.0,
            psi: vec![0.0, 3.0, 0.0],
        };
        assert!((v.eval(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((v.eval(0.25).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn closed_form_norms() {
        assert_eq!(PotentialSpec::constant(2.5).unwrap().lq_norm(3.0).unwrap().value, 2.5);
        assert!((pulse_third().lq_norm(1.0).unwrap().value - 3.0).abs() < 1e-15);
        let p = PotentialSpec::pulse(0.2, 0.7, 4.0).unwrap();
        for q in [1.0, 1.5, 2.0, 7.0] {
            let expected = 4.0 * 0.5_f64.powf(1.0 / q);
            assert!((p.lq_norm(q).unwrap().value - expected).abs() < 1e-14 * expected);
        }
        assert_eq!(p.lq_norm(f64::INFINITY).unwrap().value, 4.0);
        assert_eq!(PotentialSpec::Zero.lq_norm(2.0).unwrap().value, 0.0);
        assert!(matches!(p.lq_norm(0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn large_exponent_norm_does_not_overflow() {
        let c = PotentialSpec::constant(1e10).unwrap();
        let r = c.lq_norm(400.0).unwrap();
        assert!((r.value - 1e10).abs() < 1e-4);
    }

    #[test]
    fn aligned_sampled_pulse_matches_closed_form() {
        let n = 10_001;
        let values: Vec<f64> = (0..n)
            .map(|i| if (2500..7500).contains(&i) { 2.0 } else { 0.0 })
            .collect();
        let sampled = PotentialSpec::sampled(values, Interp::Left, false).unwrap();
        let pulse = PotentialSpec::pulse(0.25, 0.75, 2.0).unwrap();
        for q in [1.0, 2.0, 3.5] {
            let a = sampled.lq_norm(q).unwrap().value;
            let b = pulse.lq_norm(q).unwrap().value;
            assert!(((a - b) / b).abs() < 1e-6, "q = {q}: {a} vs {b}");
        }
    }

    #[test]
    fn linear_sampled_norm_uses_simpson() {
        // V(t) = t on a coarse grid; ||V||_2 = 1/sqrt(3)
        let values: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
        let v = PotentialSpec::sampled(values, Interp::Linear, false).unwrap();
        let r = v.lq_norm(2.0).unwrap();
        assert!(matches!(r.rule, QuadratureRule::Simpson { .. }));
        assert!((r.value - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            PotentialSpec::from_json(br#"{"type":"zero"}"#).unwrap(),
            PotentialSpec::Zero
        );
        assert_eq!(
            PotentialSpec::from_json(br#"{"type":"pulse","x1":0.25,"x2":0.75,"m":2.0}"#).unwrap(),
            PotentialSpec::Pulse {
                x1: 0.25,
                x2: 0.75,
                m: 2.0
            }
        );
        let err = PotentialSpec::from_json(br#"{"type":"pulse","x1":0.9,"x2":0.1,"m":1.0}"#)
            .unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "x1"));
    }

    #[test]
    fn parse_errors_name_the_field() {
        let err = PotentialSpec::from_json(br#"{"type":"pulse","x1":0.1,"m":1.0}"#).unwrap_err();
        assert!(err.to_string().contains("x2"), "{err}");
        let err = PotentialSpec::from_json(
            br#"{"type":"piecewise","breakpoints":[0,0.5,1],"values":[1,-1]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "values"));
        let ok = PotentialSpec::from_json(
            br#"{"type":"piecewise","breakpoints":[0,0.5,1],"values":[1,-1],"signed":true}"#,
        )
        .unwrap();
        assert!(ok.is_signed());
        let err = PotentialSpec::from_json(br#"{"type":"sampled","n":3,"values":[1,2]}"#)
            .unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "values"));
        assert!(matches!(
            PotentialSpec::from_json(b"{not json"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn json_field_names() {
        let v = PotentialSpec::ExtremalLq {
            q: 1.5,
            a: 2.0,
            h: 3.0,
            psi: vec![0.0, 1.0],
        };
        let json: serde_json::Value = serde_json::from_str(&v.to_json()).unwrap();
        assert_eq!(json["type"], "extremal_lq");
        assert_eq!(json["A"], 2.0);
        assert_eq!(json["H"], 3.0);
        let s = PotentialSpec::sampled(vec![1.0, 2.0], Interp::Linear, false).unwrap();
        let json: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(json["interp"], "linear");
        assert_eq!(json["n"], 2);
    }

    #[test]
    fn cells_cover_unit_interval() {
        let p = PotentialSpec::pulse(0.0, 0.4, 1.0).unwrap();
        let cells = p.cells().unwrap();
        assert_eq!(cells.len(), 2);
        let total: f64 = cells.iter().map(|c| c.width).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert_eq!(p.breakpoints(), vec![0.4]);
    }
}
