//! Periodic solutions of `x'' + a x' = r(t) x^α − s(t) x^β` on a uniform cyclic grid.
//!
//! The main solver is Newton's method on the second-order central-difference
//! discretization. Its Jacobian is cyclic tridiagonal. A converged grid solution is
//! then corrected towards the spectral collocation solution by a damped
//! defect-correction loop that reuses the finite-difference Jacobian as
//! preconditioner. If the loop does not settle, the finite-difference solution is kept.

use serde::{Deserialize, Serialize};

use crate::cyclic;
use crate::error::{Error, Result};
use crate::funcspec::Periodic;
use crate::greens::GreensKernel;
use crate::problem::{rhs_at, rhs_dx, GeneralProblem, Truncation};
use crate::spectral::{self, Spectral};

/// Step-length floor of the damped Newton iteration.
pub const DAMPING_FLOOR: f64 = 1.0 / 1048576.0;
/// Relative Fourier-coefficient level treated as rounding noise by the refined residual.
pub const NOISE_FILTER: f64 = 4.0 * f64::EPSILON;
/// Relaxation of the defect correction: `2 / (1 + π²/4)`, which balances the extreme
/// ratios between spectral and central-difference second derivatives.
pub const POLISH_RELAXATION: f64 = 2.0 / (1.0 + std::f64::consts::PI * std::f64::consts::PI / 4.0);
const POLISH_MAX_ITER: usize = 400;
const PICARD_MAX_ITER: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialGuess {
    /// `(r̄/s̄)^{1/(β−α)}`, which is `(ē/c)^{1/μ}` for regularized Liebau problems;
    /// falls back to the middle of the truncation band when `r̄ ≤ 0`.
    Default,
    Constant { value: f64 },
    /// Constant at the geometric midpoint `√(lo·hi)`.
    Bracket { lo: f64, hi: f64 },
    Values { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOpts {
    /// Grid size.
    pub n: usize,
    /// Convergence threshold on `‖Δx‖∞ / max(1, ‖x‖∞)`.
    pub tol: f64,
    pub max_iter: usize,
    pub guess: InitialGuess,
    /// Spectral defect correction after Newton.
    pub polish: bool,
    /// Refinement factor of the residual check grid.
    pub refine: usize,
    /// Band used by the Picard fallback when damping stalls.
    pub fallback: Option<Truncation>,
}

impl Default for SolveOpts {
    fn default() -> Self {
        SolveOpts {
            n: 512,
            tol: 1e-12,
            max_iter: 50,
            guess: InitialGuess::Default,
            polish: true,
            refine: 4,
            fallback: None,
        }
    }
}

/// What a grid trace measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quantity {
    /// Regular variable `x`.
    State,
    /// Pipe level `u = x^μ`.
    PipeLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Newton,
    Picard,
}

/// Periodic grid function with solver diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSolution {
    pub period: f64,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    /// Sup norm of the ODE residual of the trigonometric interpolant on the refined grid.
    pub sup_residual: f64,
    /// Periodicity defect; zero for cyclic grids.
    pub bc_mismatch: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Whether the spectral correction was applied.
    pub polished: bool,
    pub method: Method,
    pub quantity: Quantity,
}

impl GridSolution {
    /// Grid function without diagnostics.
    pub fn from_values(period: f64, values: Vec<f64>) -> Self {
        let n = values.len();
        GridSolution {
            period,
            nodes: nodes(period, n),
            values,
            sup_residual: f64::NAN,
            bc_mismatch: 0.0,
            iterations: 0,
            converged: false,
            polished: false,
            method: Method::Newton,
            quantity: Quantity::State,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

fn nodes(period: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 * period / n as f64).collect()
}

/// Coefficients sampled on the grid.
struct Discrete<'a> {
    gp: &'a GeneralProblem,
    h: f64,
    r: Vec<f64>,
    s: Vec<f64>,
}

impl<'a> Discrete<'a> {
    fn new(gp: &'a GeneralProblem, n: usize) -> Self {
        let ts = nodes(gp.period(), n);
        Discrete {
            gp,
            h: gp.period() / n as f64,
            r: ts.iter().map(|&t| gp.r().eval(t)).collect(),
            s: ts.iter().map(|&t| gp.s().eval(t)).collect(),
        }
    }

    fn n(&self) -> usize {
        self.r.len()
    }

    fn nonlinear(&self, i: usize, x: f64) -> f64 {
        rhs_at(self.r[i], self.s[i], self.gp.alpha(), self.gp.beta(), x)
    }

    /// Central-difference residual at every node.
    fn fd_residual(&self, x: &[f64]) -> Vec<f64> {
        let (n, h, a) = (self.n(), self.h, self.gp.a());
        (0..n)
            .map(|i| {
                let (xm, x0, xp) = (x[(i + n - 1) % n], x[i], x[(i + 1) % n]);
                (xp - 2.0 * x0 + xm) / (h * h) + a * (xp - xm) / (2.0 * h) - self.nonlinear(i, x0)
            })
            .collect()
    }

    /// Size of the terms entering the residual, for rounding-level comparisons.
    fn residual_scale(&self, x: &[f64]) -> f64 {
        let (alpha, beta, h) = (self.gp.alpha(), self.gp.beta(), self.h);
        (0..self.n())
            .map(|i| {
                let v = x[i].max(0.0);
                self.r[i].abs() * v.powf(alpha) + self.s[i].abs() * v.powf(beta) + 4.0 * v / (h * h)
            })
            .fold(0.0, f64::max)
    }

    /// Solves `J d = rhs` with the central-difference Jacobian at `x`.
    fn jacobian_solve(&self, x: &[f64], rhs: &[f64]) -> Vec<f64> {
        let (n, h, a) = (self.n(), self.h, self.gp.a());
        let off_lo = 1.0 / (h * h) - a / (2.0 * h);
        let off_hi = 1.0 / (h * h) + a / (2.0 * h);
        let lower = vec![off_lo; n];
        let upper = vec![off_hi; n];
        let diag: Vec<f64> = (0..n)
            .map(|i| -2.0 / (h * h) - rhs_dx(self.r[i], self.s[i], self.gp.alpha(), self.gp.beta(), x[i]))
            .collect();
        cyclic::solve(&lower, &diag, &upper, rhs)
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn initial_values(gp: &GeneralProblem, opts: &SolveOpts) -> Result<Vec<f64>> {
    let n = opts.n;
    let constant = |v: f64| -> Result<Vec<f64>> {
        if v > 0.0 && v.is_finite() {
            Ok(vec![v; n])
        } else {
            Err(Error::InvalidProblem(format!("initial guess must be positive, got {v}")))
        }
    };
    match &opts.guess {
        InitialGuess::Default => match (gp.equilibrium(), opts.fallback) {
            (Some(v), _) => constant(v),
            (None, Some(tr)) => constant((tr.lower() * tr.r2).sqrt()),
            (None, None) => Err(Error::InvalidProblem(
                "mean of r is not positive; supply an initial guess or a band".into(),
            )),
        },
        InitialGuess::Constant { value } => constant(*value),
        InitialGuess::Bracket { lo, hi } => {
            if !(*lo > 0.0 && lo < hi) {
                return Err(Error::BadRadii { r1: *lo, r2: *hi });
            }
            constant((lo * hi).sqrt())
        }
        InitialGuess::Values { values } => {
            if values.len() != n {
                return Err(Error::InvalidProblem(format!("guess has {} values, grid has {n}", values.len())));
            }
            if let Some(i) = values.iter().position(|&v| !(v > 0.0)) {
                return Err(Error::NegativeState { t: i as f64 * gp.period() / n as f64, x: values[i] });
            }
            Ok(values.clone())
        }
    }
}

enum NewtonOutcome {
    Converged(Vec<f64>, usize),
    Stalled(Vec<f64>, usize),
}

fn newton(d: &Discrete, mut x: Vec<f64>, opts: &SolveOpts, start: usize) -> Result<NewtonOutcome> {
    let mut f = d.fd_residual(&x);
    let mut last_update = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        let step = d.jacobian_solve(&x, &neg);
        let f0 = sup(&f);
        let slack = 64.0 * f64::EPSILON * d.residual_scale(&x);
        let mut lambda = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(xi, di)| xi + lambda * di).collect();
            if trial.iter().all(|&v| v > 0.0 && v.is_finite()) {
                let ft = d.fd_residual(&trial);
                if sup(&ft) <= f0 + slack {
                    break Some((trial, ft));
                }
            }
            lambda *= 0.5;
            if lambda < DAMPING_FLOOR {
                break None;
            }
        };
        let Some((trial, ft)) = accepted else {
            return Ok(NewtonOutcome::Stalled(x, start + it));
        };
        last_update = lambda * sup(&step);
        x = trial;
        f = ft;
        if last_update <= opts.tol * sup(&x).max(1.0) {
            return Ok(NewtonOutcome::Converged(x, start + it));
        }
    }
    Err(Error::NoConvergence { iterations: start + opts.max_iter, last_update })
}

/// Spectral collocation residual at the nodes.
fn spectral_residual(d: &Discrete, sp: &Spectral, x: &[f64]) -> Vec<f64> {
    let (d1, d2) = sp.derivatives(x);
    (0..d.n()).map(|i| d2[i] + d.gp.a() * d1[i] - d.nonlinear(i, x[i])).collect()
}

/// Damped defect correction `x ← x − ω J⁻¹ R(x)` towards the spectral solution.
fn polish(d: &Discrete, x: &[f64]) -> Option<Vec<f64>> {
    let sp = Spectral::new(d.n(), d.gp.period());
    let mut y = x.to_vec();
    let mut last = f64::INFINITY;
    for _ in 0..POLISH_MAX_ITER {
        let res = spectral_residual(d, &sp, &y);
        let neg: Vec<f64> = res.iter().map(|v| -v).collect();
        let step = d.jacobian_solve(&y, &neg);
        for (yi, si) in y.iter_mut().zip(&step) {
            *yi += POLISH_RELAXATION * si;
        }
        if !y.iter().all(|&v| v > 0.0 && v.is_finite()) {
            return None;
        }
        last = sup(&step);
        if last <= 1e-13 * sup(&y).max(1.0) {
            return Some(y);
        }
    }
    // Stalled at the rounding floor is acceptable, anything larger is not.
    (last <= 1e-10 * sup(&y).max(1.0)).then_some(y)
}

/// Newton solve of the periodic problem. See the module documentation.
pub fn solve_periodic(gp: &GeneralProblem, opts: &SolveOpts) -> Result<GridSolution> {
    if opts.n < 4 || opts.n % 2 != 0 {
        return Err(Error::InvalidProblem(format!("grid size must be even and at least 4, got {}", opts.n)));
    }
    let d = Discrete::new(gp, opts.n);
    let x0 = initial_values(gp, opts)?;
    let (x, iterations, method) = match newton(&d, x0, opts, 0)? {
        NewtonOutcome::Converged(x, it) => (x, it, Method::Newton),
        NewtonOutcome::Stalled(x, it) => {
            let Some(tr) = opts.fallback else {
                return Err(Error::LeftPositiveCone { iteration: it });
            };
            let m = tr.m;
            let trace = picard_iterate(gp, m, tr.r1, tr.r2, &x, PICARD_MAX_ITER, opts.tol)?;
            let start = trace.last().to_vec();
            match newton(&d, start, opts, it + trace.steps())? {
                NewtonOutcome::Converged(x, it) => (x, it, Method::Picard),
                NewtonOutcome::Stalled(_, it) => return Err(Error::LeftPositiveCone { iteration: it }),
            }
        }
    };
    let (values, polished) = match opts.polish.then(|| polish(&d, &x)).flatten() {
        Some(y) => (y, true),
        None => (x, false),
    };
    let sup_residual = refined_residual(gp, &values, opts.refine)?;
    Ok(GridSolution {
        period: gp.period(),
        nodes: nodes(gp.period(), opts.n),
        values,
        sup_residual,
        bc_mismatch: 0.0,
        iterations,
        converged: true,
        polished,
        method,
        quantity: Quantity::State,
    })
}

/// Sup norm of `y'' + a y' − r y^α + s y^β` where `y` is the trigonometric interpolant of
/// the grid values, sampled on a grid `factor` times finer.
pub fn refined_residual(gp: &GeneralProblem, values: &[f64], factor: usize) -> Result<f64> {
    let it = spectral::interpolate(values, gp.period(), factor.max(1), NOISE_FILTER);
    let mut worst = 0.0f64;
    for (i, &t) in it.times.iter().enumerate() {
        let y = it.value[i];
        let f = gp.rhs(t, y)?;
        worst = worst.max((it.d2[i] + gp.a() * it.d1[i] - f).abs());
    }
    Ok(worst)
}

/// Central-difference residual of the problem at the nodes, and the periodicity
/// defect (zero for cyclic stencils).
pub fn residual(gp: &GeneralProblem, x: &GridSolution) -> Result<(f64, f64)> {
    if let Some(i) = x.values.iter().position(|&v| !(v >= 0.0)) {
        return Err(Error::NegativeState { t: x.nodes[i], x: x.values[i] });
    }
    let d = Discrete::new(gp, x.len());
    Ok((sup(&d.fd_residual(&x.values)), 0.0))
}

/// Central-difference solution of the linear problem `x'' + a x' + m² x = h` on `n`
/// nodes; the grid counterpart of `∫ G_m(t, s) h(s) ds`.
pub fn solve_linear_shifted(a: f64, m: f64, h: &dyn Periodic, n: usize) -> Vec<f64> {
    let period = h.period();
    let step = period / n as f64;
    let lower = vec![1.0 / (step * step) - a / (2.0 * step); n];
    let upper = vec![1.0 / (step * step) + a / (2.0 * step); n];
    let diag = vec![-2.0 / (step * step) + m * m; n];
    let rhs: Vec<f64> = nodes(period, n).iter().map(|&t| h.eval(t)).collect();
    cyclic::solve(&lower, &diag, &upper, &rhs)
}

/// Iterates of the truncated integral operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardTrace {
    pub iterates: Vec<Vec<f64>>,
    /// `‖x_k − x_{k−1}‖∞` for each step.
    pub differences: Vec<f64>,
    pub c_m: f64,
}

impl PicardTrace {
    pub fn last(&self) -> &[f64] {
        self.iterates.last().expect("trace holds the starting point")
    }

    pub fn steps(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn final_difference(&self) -> f64 {
        self.differences.last().copied().unwrap_or(0.0)
    }
}

/// `x_{k+1}(t) = ∫₀ᵀ G_m(t, s) f̃_m(s, x_k(s)) ds` on the grid of `x0` (circular Simpson
/// rule, even grid size). Stops after `n_steps` or when successive iterates differ by
/// at most `tol·max(1, ‖x‖∞)`.
pub fn picard_iterate(
    gp: &GeneralProblem,
    m: f64,
    r1: f64,
    r2: f64,
    x0: &[f64],
    n_steps: usize,
    tol: f64,
) -> Result<PicardTrace> {
    let kernel = GreensKernel::build(gp.a(), m, gp.period())?;
    let trunc = Truncation::new(m, kernel.cone_constant(), r1, r2)?;
    let n = x0.len();
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidProblem(format!("Picard grid size must be even, got {n}")));
    }
    let ts = nodes(gp.period(), n);
    let weights = kernel.grid_weights(n);
    let mut trace = PicardTrace { iterates: vec![x0.to_vec()], differences: Vec::new(), c_m: kernel.cone_constant() };
    for _ in 0..n_steps {
        let x = trace.last();
        let f: Vec<f64> = ts.iter().zip(x).map(|(&t, &v)| gp.f_m_truncated(&trunc, t, v.max(0.0))).collect::<Result<_>>()?;
        let next: Vec<f64> = (0..n)
            .map(|i| weights.iter().enumerate().map(|(j, w)| w * f[(i + n - j) % n]).sum())
            .collect();
        let diff = next.iter().zip(x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let done = diff <= tol * sup(&next).max(1.0);
        trace.iterates.push(next);
        trace.differences.push(diff);
        if done {
            break;
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConeFlags {
    /// `min x ≥ c_m max x`.
    pub in_cone: bool,
    /// `min x ≥ c_m R1`.
    pub above_lower: bool,
    /// `max x ≤ R2`.
    pub below_upper: bool,
    /// Not in `{x : min x < c_m R1}`; same test as `above_lower`.
    pub not_in_b_prime: bool,
}

pub fn cone_and_localization(values: &[f64], c_m: f64, r1: f64, r2: f64) -> ConeFlags {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let above = lo >= c_m * r1;
    ConeFlags { in_cone: lo >= c_m * hi, above_lower: above, below_upper: hi <= r2, not_in_b_prime: above }
}
