//! Continuous T-periodic scalar functions used for forcing and coefficient data.
//!
//! A [`PeriodicFunction`] pairs a period with a [`Body`]. Bodies are evaluated on
//! `[0, T)` after wrapping, so every variant is periodic by construction. Means are
//! closed-form for every variant; extrema are exact for piecewise-linear data and
//! scan-plus-Brent refined otherwise.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric;

/// Uniform scan density for non-exact extrema.
pub const EXTREMA_SCAN_POINTS: usize = 8192;
/// Argument tolerance of the extremum refinement.
pub const EXTREMA_T_TOL: f64 = 1e-12;

/// Anything that can be sampled as a T-periodic function, with known kink locations.
pub trait Periodic: Sync {
    fn period(&self) -> f64;
    fn eval(&self, t: f64) -> f64;
    /// Points in `[0, T)` where the derivative may jump.
    fn kinks(&self) -> Vec<f64>;
}

/// One cosine term `amplitude * cos(2π k t / T + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub amplitude: f64,
    pub harmonic: u32,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Body {
    Constant {
        value: f64,
    },
    TrigPoly {
        #[serde(default)]
        offset: f64,
        terms: Vec<Harmonic>,
    },
    /// Polynomial in `t` (coefficients of `t^0, t^1, ...`) on `[0, T)`, then wrapped.
    PolyOnPeriod {
        coeffs: Vec<f64>,
    },
    /// Breakpoints `(t_i, v_i)` with `t_0 = 0`, `t_last = T` and `v_0 = v_last`.
    PiecewiseLinear {
        points: Vec<(f64, f64)>,
    },
    Sum {
        parts: Vec<Body>,
    },
}

/// A validated continuous T-periodic function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPeriodicFunction", into = "RawPeriodicFunction")]
pub struct PeriodicFunction {
    period: f64,
    body: Body,
}

#[derive(Serialize, Deserialize)]
struct RawPeriodicFunction {
    period: f64,
    #[serde(flatten)]
    body: Body,
}

impl TryFrom<RawPeriodicFunction> for PeriodicFunction {
    type Error = Error;
    fn try_from(raw: RawPeriodicFunction) -> Result<Self> {
        PeriodicFunction::new(raw.period, raw.body)
    }
}

impl From<PeriodicFunction> for RawPeriodicFunction {
    fn from(f: PeriodicFunction) -> Self {
        RawPeriodicFunction { period: f.period, body: f.body }
    }
}

/// Global extrema over one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrema {
    pub min: f64,
    pub max: f64,
    pub argmin: f64,
    pub argmax: f64,
    /// True when the values are exact (vertex enumeration), false for scan + refinement.
    pub exact: bool,
    /// Argument tolerance of the refinement (0 when exact).
    pub t_tol: f64,
}

impl PeriodicFunction {
    pub fn new(period: f64, body: Body) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::BadPeriod(period));
        }
        validate_body(period, &body)?;
        Ok(PeriodicFunction { period, body })
    }

    pub fn constant(period: f64, value: f64) -> Result<Self> {
        Self::new(period, Body::Constant { value })
    }

    /// `offset + Σ amplitude·cos(2π k t / T + phase)`.
    pub fn trig(period: f64, offset: f64, terms: &[(f64, u32, f64)]) -> Result<Self> {
        let terms = terms
            .iter()
            .map(|&(amplitude, harmonic, phase)| Harmonic { amplitude, harmonic, phase })
            .collect();
        Self::new(period, Body::TrigPoly { offset, terms })
    }

    pub fn poly(period: f64, coeffs: &[f64]) -> Result<Self> {
        Self::new(period, Body::PolyOnPeriod { coeffs: coeffs.to_vec() })
    }

    pub fn piecewise_linear(period: f64, points: &[(f64, f64)]) -> Result<Self> {
        Self::new(period, Body::PiecewiseLinear { points: points.to_vec() })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    /// Value of the periodic extension at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        eval_body(&self.body, self.period, wrap(t, self.period))
    }

    /// Same function multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> PeriodicFunction {
        PeriodicFunction { period: self.period, body: scale_body(&self.body, factor) }
    }

    /// Pointwise sum; periods must agree.
    pub fn plus(&self, other: &PeriodicFunction) -> Result<PeriodicFunction> {
        if self.period != other.period {
            return Err(Error::InvalidFunction(format!(
                "cannot add functions with periods {} and {}",
                self.period, other.period
            )));
        }
        let mut parts = Vec::new();
        for b in [&self.body, &other.body] {
            match b {
                Body::Sum { parts: p } => parts.extend(p.iter().cloned()),
                other => parts.push(other.clone()),
            }
        }
        Ok(PeriodicFunction { period: self.period, body: Body::Sum { parts } })
    }

    /// `(1/T)∫₀ᵀ f`, closed form for every variant.
    pub fn mean(&self) -> f64 {
        mean_body(&self.body, self.period)
    }

    /// Global minimum and maximum over one period.
    pub fn extrema(&self) -> Extrema {
        if let Some(pts) = self.vertex_data() {
            let (mut lo, mut hi) = (pts[0], pts[0]);
            for &p in &pts {
                if p.1 < lo.1 {
                    lo = p;
                }
                if p.1 > hi.1 {
                    hi = p;
                }
            }
            return Extrema { min: lo.1, max: hi.1, argmin: lo.0, argmax: hi.0, exact: true, t_tol: 0.0 };
        }
        let t = self.period;
        let (mut argmin, mut min) =
            numeric::scan_min(|s| self.eval(s), 0.0, t, EXTREMA_SCAN_POINTS, EXTREMA_T_TOL);
        let (mut argmax, neg) =
            numeric::scan_min(|s| -self.eval(s), 0.0, t, EXTREMA_SCAN_POINTS, EXTREMA_T_TOL);
        let mut max = -neg;
        for k in self.kinks() {
            let v = self.eval(k);
            if v < min {
                min = v;
                argmin = k;
            }
            if v > max {
                max = v;
                argmax = k;
            }
        }
        Extrema {
            min,
            max,
            argmin: wrap(argmin, t),
            argmax: wrap(argmax, t),
            exact: false,
            t_tol: EXTREMA_T_TOL,
        }
    }

    /// Evaluator for `max(f, 0)`; zero crossings become kinks.
    pub fn positive_part(&self) -> PositivePart {
        if let Some(pts) = self.vertex_data() {
            let mut out: Vec<(f64, f64)> = Vec::with_capacity(pts.len() * 2);
            for w in pts.windows(2) {
                let ((t0, v0), (t1, v1)) = (w[0], w[1]);
                out.push((t0, v0.max(0.0)));
                if (v0 < 0.0 && v1 > 0.0) || (v0 > 0.0 && v1 < 0.0) {
                    let tc = t0 + (t1 - t0) * (-v0) / (v1 - v0);
                    out.push((tc, 0.0));
                }
            }
            let last = *pts.last().expect("vertex data is nonempty");
            out.push((last.0, last.1.max(0.0)));
            let crossings = out
                .windows(3)
                .filter(|w| w[1].1 == 0.0 && (w[0].1 > 0.0 || w[2].1 > 0.0))
                .map(|w| w[1].0)
                .collect();
            let pwl = PeriodicFunction {
                period: self.period,
                body: Body::PiecewiseLinear { points: out },
            };
            return PositivePart { source: pwl, crossings, factor: 1.0, exact: true };
        }
        let t = self.period;
        let n = EXTREMA_SCAN_POINTS;
        let h = t / n as f64;
        let mut crossings = Vec::new();
        let mut prev = self.eval(0.0);
        for i in 1..=n {
            let s = i as f64 * h;
            let v = self.eval(s);
            if prev.signum() != v.signum() && prev != 0.0 && v != 0.0 {
                if let Some(r) = numeric::bisect(|x| self.eval(x), s - h, s, 1e-15 * t) {
                    crossings.push(wrap(r, t));
                }
            }
            prev = v;
        }
        PositivePart { source: self.clone(), crossings, factor: 1.0, exact: false }
    }

    /// Breakpoints of piecewise-linear components in `[0, T)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        collect_breakpoints(&self.body, &mut out);
        out.retain(|&t| t < self.period);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Vertex list when the function is exactly piecewise linear (constants, tables and sums of them).
    fn vertex_data(&self) -> Option<Vec<(f64, f64)>> {
        if !is_piecewise_linear(&self.body) {
            return None;
        }
        let mut ts = self.breakpoints();
        if ts.first() != Some(&0.0) {
            ts.insert(0, 0.0);
        }
        let mut pts: Vec<(f64, f64)> = ts.iter().map(|&t| (t, self.eval(t))).collect();
        pts.push((self.period, pts[0].1));
        Some(pts)
    }
}

impl Periodic for PeriodicFunction {
    fn period(&self) -> f64 {
        self.period
    }
    fn eval(&self, t: f64) -> f64 {
        PeriodicFunction::eval(self, t)
    }
    fn kinks(&self) -> Vec<f64> {
        let mut k = self.breakpoints();
        if contains_poly(&self.body) && !k.contains(&0.0) {
            k.insert(0, 0.0);
        }
        k
    }
}

/// `factor · max(f(t), 0)` together with the zero crossings of `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivePart {
    source: PeriodicFunction,
    crossings: Vec<f64>,
    factor: f64,
    exact: bool,
}

impl PositivePart {
    pub fn eval(&self, t: f64) -> f64 {
        self.factor * self.source.eval(t).max(0.0)
    }

    pub fn crossings(&self) -> &[f64] {
        &self.crossings
    }

    /// True when the crossings were inserted exactly (piecewise-linear source).
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn scaled(&self, factor: f64) -> PositivePart {
        PositivePart { factor: self.factor * factor, ..self.clone() }
    }

    /// Piecewise-linear representation, when the source was piecewise linear.
    pub fn as_function(&self) -> Option<PeriodicFunction> {
        self.exact.then(|| self.source.scaled(self.factor))
    }

    /// `(1/T)∫₀ᵀ factor·f₊`.
    pub fn mean(&self) -> f64 {
        if self.exact {
            return self.factor * self.source.mean();
        }
        let t = self.source.period();
        let cuts = Periodic::kinks(self);
        self.factor * numeric::simpson_split(|s| self.source.eval(s).max(0.0), 0.0, t, &cuts, 1 << 16) / t
    }

    /// `∫₀ᵀ factor·f₊`.
    pub fn integral(&self) -> f64 {
        self.mean() * self.source.period()
    }
}

impl Periodic for PositivePart {
    fn period(&self) -> f64 {
        self.source.period()
    }
    fn eval(&self, t: f64) -> f64 {
        PositivePart::eval(self, t)
    }
    fn kinks(&self) -> Vec<f64> {
        let mut k = Periodic::kinks(&self.source);
        k.extend(self.crossings.iter().copied());
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }
}

/// Wraps `t` into `[0, period)`.
pub fn wrap(t: f64, period: f64) -> f64 {
    let r = t.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

fn validate_body(period: f64, body: &Body) -> Result<()> {
    let finite = |v: f64, what: &str| {
        if v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidFunction(format!("non-finite {what}")))
        }
    };
    match body {
        Body::Constant { value } => finite(*value, "constant"),
        Body::TrigPoly { offset, terms } => {
            finite(*offset, "offset")?;
            for h in terms {
                finite(h.amplitude, "amplitude")?;
                finite(h.phase, "phase")?;
            }
            Ok(())
        }
        Body::PolyOnPeriod { coeffs } => {
            if coeffs.is_empty() {
                return Err(Error::InvalidFunction("polynomial needs at least one coefficient".into()));
            }
            for &c in coeffs {
                finite(c, "coefficient")?;
            }
            // The stored coefficients are exact; only the evaluation of p(T) rounds.
            let scale: f64 = coeffs.iter().enumerate().map(|(k, c)| c.abs() * period.powi(k as i32)).sum();
            let gap = (horner(coeffs, period) - coeffs[0]).abs();
            if gap > 8.0 * f64::EPSILON * scale * coeffs.len() as f64 {
                return Err(Error::InvalidFunction(format!(
                    "polynomial is discontinuous under periodic wrapping: p(0) = {}, p(T) = {}",
                    coeffs[0],
                    horner(coeffs, period)
                )));
            }
            Ok(())
        }
        Body::PiecewiseLinear { points } => {
            if points.len() < 2 {
                return Err(Error::InvalidFunction("table needs at least two breakpoints".into()));
            }
            for &(t, v) in points {
                finite(t, "breakpoint")?;
                finite(v, "table value")?;
            }
            if points[0].0 != 0.0 || points[points.len() - 1].0 != period {
                return Err(Error::InvalidFunction(format!(
                    "table must start at t = 0 and end at t = T = {period}"
                )));
            }
            if points.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(Error::InvalidFunction("breakpoints must be strictly increasing".into()));
            }
            if points[0].1 != points[points.len() - 1].1 {
                return Err(Error::InvalidFunction(format!(
                    "table is discontinuous under periodic wrapping: v(0) = {}, v(T) = {}",
                    points[0].1,
                    points[points.len() - 1].1
                )));
            }
            Ok(())
        }
        Body::Sum { parts } => parts.iter().try_for_each(|p| validate_body(period, p)),
    }
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn eval_body(body: &Body, period: f64, tau: f64) -> f64 {
    match body {
        Body::Constant { value } => *value,
        Body::TrigPoly { offset, terms } => {
            let w = TAU * tau / period;
            offset + terms.iter().map(|h| h.amplitude * (h.harmonic as f64 * w + h.phase).cos()).sum::<f64>()
        }
        Body::PolyOnPeriod { coeffs } => horner(coeffs, tau),
        Body::PiecewiseLinear { points } => {
            let i = points.partition_point(|p| p.0 <= tau).clamp(1, points.len() - 1);
            let (t0, v0) = points[i - 1];
            let (t1, v1) = points[i];
            v0 + (v1 - v0) * (tau - t0) / (t1 - t0)
        }
        Body::Sum { parts } => parts.iter().map(|p| eval_body(p, period, tau)).sum(),
    }
}

fn scale_body(body: &Body, k: f64) -> Body {
    match body {
        Body::Constant { value } => Body::Constant { value: value * k },
        Body::TrigPoly { offset, terms } => Body::TrigPoly {
            offset: offset * k,
            terms: terms.iter().map(|h| Harmonic { amplitude: h.amplitude * k, ..*h }).collect(),
        },
        Body::PolyOnPeriod { coeffs } => Body::PolyOnPeriod { coeffs: coeffs.iter().map(|c| c * k).collect() },
        Body::PiecewiseLinear { points } => {
            Body::PiecewiseLinear { points: points.iter().map(|&(t, v)| (t, v * k)).collect() }
        }
        Body::Sum { parts } => Body::Sum { parts: parts.iter().map(|p| scale_body(p, k)).collect() },
    }
}

fn mean_body(body: &Body, period: f64) -> f64 {
    match body {
        Body::Constant { value } => *value,
        Body::TrigPoly { offset, terms } => {
            // Zeroth harmonics contribute their constant value.
            offset + terms.iter().filter(|h| h.harmonic == 0).map(|h| h.amplitude * h.phase.cos()).sum::<f64>()
        }
        Body::PolyOnPeriod { coeffs } => {
            coeffs.iter().enumerate().map(|(k, c)| c * period.powi(k as i32) / (k + 1) as f64).sum()
        }
        Body::PiecewiseLinear { points } => {
            points.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum::<f64>() / period
        }
        Body::Sum { parts } => parts.iter().map(|p| mean_body(p, period)).sum(),
    }
}

fn collect_breakpoints(body: &Body, out: &mut Vec<f64>) {
    match body {
        Body::PiecewiseLinear { points } => out.extend(points.iter().map(|p| p.0)),
        Body::Sum { parts } => parts.iter().for_each(|p| collect_breakpoints(p, out)),
        _ => {}
    }
}

fn is_piecewise_linear(body: &Body) -> bool {
    match body {
        Body::Constant { .. } | Body::PiecewiseLinear { .. } => true,
        Body::Sum { parts } => parts.iter().all(is_piecewise_linear),
        _ => false,
    }
}

fn contains_poly(body: &Body) -> bool {
    match body {
        Body::PolyOnPeriod { coeffs } => coeffs.len() > 2,
        Body::Sum { parts } => parts.iter().any(contains_poly),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn trapezoid() -> PeriodicFunction {
        let (lo, hi) = (-0.00005, 0.00548239);
        PeriodicFunction::piecewise_linear(1.0, &[(0.0, lo), (0.0005, hi), (0.9995, hi), (1.0, lo)]).unwrap()
    }

    fn cubic() -> PeriodicFunction {
        PeriodicFunction::poly(1.0, &[1.54215, -0.02, 0.06, -0.04]).unwrap()
    }

    #[test]
    fn eval_cosine_caption() {
        let f = PeriodicFunction::trig(1.0, 1.54215, &[(0.002097, 1, 0.0)]).unwrap();
        assert!((f.eval(0.0) - 1.544247).abs() < 1e-15);
    }

    #[test]
    fn eval_trapezoid_plateau() {
        let f = trapezoid();
        for t in [0.0005, 0.3, 0.9, 0.9994] {
            assert_eq!(f.eval(t), 0.00548239);
        }
        assert_eq!(f.eval(1.0), f.eval(0.0));
        assert_eq!(f.eval(-0.25), f.eval(0.75));
    }

    #[test]
    fn extrema_trapezoid_exact() {
        let e = trapezoid().extrema();
        assert!(e.exact);
        assert_eq!(e.min, -0.00005);
        assert_eq!(e.max, 0.00548239);
    }

    #[test]
    fn extrema_cubic_against_stationary_points() {
        // Oracle: stationary points of t - 3t² + 2t³ at (6 ± √12)/12.
        let p = |t: f64| 1.54215 - 0.02 * (t - 3.0 * t * t + 2.0 * t * t * t);
        let s = 12f64.sqrt();
        let lo = p((6.0 - s) / 12.0);
        let hi = p((6.0 + s) / 12.0);
        let e = cubic().extrema();
        assert!(!e.exact);
        assert!((e.min - lo).abs() < 1e-14, "{} vs {}", e.min, lo);
        assert!((e.max - hi).abs() < 1e-14);
        assert!((e.min - 1.540226).abs() < 1e-6);
        assert!((e.max - 1.544073).abs() < 2e-6);
    }

    #[test]
    fn constant_extrema_and_mean() {
        let f = PeriodicFunction::constant(3.0, -2.5).unwrap();
        let e = f.extrema();
        assert_eq!((e.min, e.max), (-2.5, -2.5));
        assert_eq!(f.mean(), -2.5);
    }

    #[test]
    fn propst_mean() {
        // e = 0.1·V0 + 1.8 + (2.1 − V0)cos t − 3cos²t with cos² = (1 + cos 2t)/2.
        let v0 = 4.0;
        let f = PeriodicFunction::trig(2.0 * PI, 0.1 * v0 + 1.8 - 1.5, &[(2.1 - v0, 1, 0.0), (-1.5, 2, 0.0)]).unwrap();
        assert!((f.mean() - 0.7).abs() < 1e-15);
        let t: f64 = 0.37;
        let direct = 0.1 * v0 + 1.8 + (2.1 - v0) * t.cos() - 3.0 * t.cos().powi(2);
        assert!((f.eval(t) - direct).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_mean_closed_form() {
        let (lo, hi, t1, t2) = (-0.00005, 0.00548239, 0.0005, 0.9995);
        let oracle = hi * (t2 - t1) + 0.5 * (hi + lo) * t1 + 0.5 * (hi + lo) * (1.0 - t2);
        assert!((trapezoid().mean() - oracle).abs() < 1e-17);
        assert!((trapezoid().mean() - 0.00547963).abs() < 1e-8);
    }

    #[test]
    fn poly_mean_closed_form() {
        // ∫₀¹ (t − 3t² + 2t³) dt = 1/2 − 1 + 1/2 = 0.
        assert!((cubic().mean() - 1.54215).abs() < 1e-15);
    }

    #[test]
    fn positive_part_crossing_on_first_ramp() {
        let pp = trapezoid().positive_part();
        assert!(pp.is_exact());
        let expected = 0.0005 * 0.00005 / (0.00548239 + 0.00005);
        assert!((pp.crossings()[0] - expected).abs() < 1e-18);
        assert!((expected - 4.519e-6).abs() < 1e-9);
        assert_eq!(pp.crossings().len(), 2);
        assert_eq!(pp.eval(0.0), 0.0);
        assert_eq!(pp.eval(0.5), 0.00548239);
    }

    #[test]
    fn positive_part_of_negative_constant_vanishes() {
        let pp = PeriodicFunction::constant(1.0, -1.0).unwrap().positive_part();
        assert_eq!(pp.eval(0.3), 0.0);
        assert_eq!(pp.mean(), 0.0);
    }

    #[test]
    fn positive_part_of_nonnegative_is_identity() {
        let f = PeriodicFunction::trig(1.0, 2.0, &[(1.0, 3, 0.4)]).unwrap();
        let pp = f.positive_part();
        assert!(pp.crossings().is_empty());
        for i in 0..100 {
            let t = i as f64 * 0.0123;
            assert_eq!(pp.eval(t), f.eval(t));
        }
    }

    #[test]
    fn positive_part_of_trig_mean() {
        // mean of max(cos 2πt, 0) is 1/π.
        let f = PeriodicFunction::trig(1.0, 0.0, &[(1.0, 1, 0.0)]).unwrap();
        let pp = f.positive_part();
        assert_eq!(pp.crossings().len(), 2);
        assert!((pp.mean() - 1.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(PeriodicFunction::piecewise_linear(1.0, &[(0.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(PeriodicFunction::piecewise_linear(1.0, &[(0.0, 1.0), (0.5, 0.0), (0.5, 2.0), (1.0, 1.0)]).is_err());
        assert!(PeriodicFunction::piecewise_linear(1.0, &[(0.1, 1.0), (1.0, 1.0)]).is_err());
        assert!(PeriodicFunction::poly(1.0, &[0.0, 1.0]).is_err());
        assert!(PeriodicFunction::constant(0.0, 1.0).is_err());
    }

    #[test]
    fn sum_of_tables_is_exact() {
        let a = trapezoid();
        let b = PeriodicFunction::piecewise_linear(1.0, &[(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]).unwrap();
        let s = a.plus(&b).unwrap();
        let e = s.extrema();
        assert!(e.exact);
        assert!((e.max - (0.00548239 + 1.0)).abs() < 1e-15);
        assert!((s.mean() - (a.mean() + 0.5)).abs() < 1e-15);
    }
}
