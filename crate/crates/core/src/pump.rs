//! Pipe-level diagnostics for the singular model `u'' + a u' = (e − b u'²)/u − c`.
//!
//! Multiplying the equation by `u` and integrating over a period gives
//! `c T ū = T ē − (b − 1) ∫₀ᵀ u'²`, so the mean level of any nonconstant periodic
//! solution sits below the constant-forcing level `ē/c` by `(b − 1)‖u'‖²/(cT)`. With
//! the total volume fixed, a lower mean pipe quantity means a higher mean tank level.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::LiebauProblem;
use crate::solve::{GridSolution, Quantity};
use crate::spectral::{self, Spectral};

/// Relative threshold, against `ē/c`, above which `ē/c − ū` counts as pumping.
pub const PUMPING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PumpReport {
    pub u_mean: f64,
    pub e_mean_over_c: f64,
    /// `ē/c − ū`.
    pub delta: f64,
    /// `∫₀ᵀ u'²`.
    pub uprime_l2sq: f64,
    /// `(b − 1) ∫u'² / (cT)`, the value `delta` takes for an exact solution.
    pub predicted_delta: f64,
    /// `|c T ū − (T ē − (b − 1) ∫u'²)|`.
    pub identity_residual: f64,
    pub pumping_detected: bool,
}

fn check_levels(u: &GridSolution) -> Result<()> {
    match u.values.iter().position(|&v| !(v > 0.0)) {
        Some(i) => Err(Error::NonpositiveLevel { t: u.nodes[i], u: u.values[i] }),
        None => Ok(()),
    }
}

/// Sup over the nodes of `|u'' + a u' − (e − b u'²)/u + c|` with central differences.
pub fn singular_residual(lp: &LiebauProblem, u: &GridSolution) -> Result<f64> {
    check_levels(u)?;
    let n = u.len();
    let h = u.period / n as f64;
    let x = &u.values;
    let (d1, d2): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|i| {
            let (xm, x0, xp) = (x[(i + n - 1) % n], x[i], x[(i + 1) % n]);
            ((xp - xm) / (2.0 * h), (xp - 2.0 * x0 + xm) / (h * h))
        })
        .unzip();
    singular_residual_with(lp, u, &d1, &d2)
}

/// Same residual with caller-supplied derivatives at the nodes.
pub fn singular_residual_with(lp: &LiebauProblem, u: &GridSolution, d1: &[f64], d2: &[f64]) -> Result<f64> {
    check_levels(u)?;
    let (a, b, c) = (lp.a(), lp.b(), lp.c());
    Ok(u.nodes
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let (v, p) = (u.values[i], d1[i]);
            (d2[i] + a * p - (lp.e().eval(t) - b * p * p) / v + c).abs()
        })
        .fold(0.0, f64::max))
}

/// `u = x^μ` pointwise.
pub fn x_to_u(x: &GridSolution, mu: f64) -> Result<GridSolution> {
    if let Some(i) = x.values.iter().position(|&v| !(v >= 0.0)) {
        return Err(Error::NegativeState { t: x.nodes[i], x: x.values[i] });
    }
    let mut u = x.clone();
    u.values = x.values.iter().map(|v| v.powf(mu)).collect();
    u.quantity = Quantity::PipeLevel;
    Ok(u)
}

/// `x = u^{1/μ}` pointwise.
pub fn u_to_x(u: &GridSolution, mu: f64) -> Result<GridSolution> {
    check_levels(u)?;
    let mut x = u.clone();
    x.values = u.values.iter().map(|v| v.powf(1.0 / mu)).collect();
    x.quantity = Quantity::State;
    Ok(x)
}

/// Pumping report with spectral derivatives of the grid trace.
pub fn pump_report(lp: &LiebauProblem, u: &GridSolution) -> Result<PumpReport> {
    check_levels(u)?;
    let (d1, _) = Spectral::new(u.len(), u.period).derivatives(&u.values);
    pump_report_with(lp, u, &d1)
}

/// Pumping report with caller-supplied `u'` at the nodes.
pub fn pump_report_with(lp: &LiebauProblem, u: &GridSolution, d1: &[f64]) -> Result<PumpReport> {
    check_levels(u)?;
    let t = u.period;
    let (b, c) = (lp.b(), lp.c());
    let ebar = lp.e().mean();
    let u_mean = spectral::trapezoid(&u.values, t) / t;
    let sq: Vec<f64> = d1.iter().map(|p| p * p).collect();
    let uprime_l2sq = spectral::trapezoid(&sq, t);
    let e_mean_over_c = ebar / c;
    let delta = e_mean_over_c - u_mean;
    Ok(PumpReport {
        u_mean,
        e_mean_over_c,
        delta,
        uprime_l2sq,
        predicted_delta: (b - 1.0) * uprime_l2sq / (c * t),
        identity_residual: (c * t * u_mean - (t * ebar - (b - 1.0) * uprime_l2sq)).abs(),
        pumping_detected: delta > PUMPING_TOL * e_mean_over_c.abs(),
    })
}
