//! Problem data: the physical pipe-tank constants, the singular model
//! `u'' + a u' = (e(t) − b u'²)/u − c` and the regular problem
//! `x'' + a x' = r(t) x^α − s(t) x^β` obtained through `u = x^μ`, `μ = 1/(b + 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspec::PeriodicFunction;

/// Physical constants of the one-tank model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConfig {
    /// Friction coefficient.
    pub r0: f64,
    /// Fluid density.
    pub rho: f64,
    /// Junction coefficient, at least 1.
    pub zeta: f64,
    /// Gravitational acceleration.
    pub g: f64,
    /// Tank cross-section.
    pub a_tau: f64,
    /// Pipe cross-section.
    pub a_pi: f64,
    /// Total fluid volume.
    pub v0: f64,
    /// External pressure forcing.
    pub p: PeriodicFunction,
}

impl PhysicalConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [("rho", self.rho), ("g", self.g), ("a_tau", self.a_tau), ("a_pi", self.a_pi), ("v0", self.v0)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidProblem(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.r0 >= 0.0 && self.r0.is_finite()) {
            return Err(Error::InvalidProblem(format!("r0 must be nonnegative, got {}", self.r0)));
        }
        if !(self.zeta >= 1.0 && self.zeta.is_finite()) {
            return Err(Error::InvalidProblem(format!("zeta must be at least 1, got {}", self.zeta)));
        }
        Ok(())
    }

    /// Non-fatal observations about the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.a_pi >= self.a_tau {
            w.push(format!("pipe cross-section {} is not smaller than tank cross-section {}", self.a_pi, self.a_tau));
        }
        w
    }
}

/// The singular model with `μ = 1/(b + 1)` stored canonically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiebauProblem {
    a: f64,
    mu: f64,
    c: f64,
    e: PeriodicFunction,
}

impl LiebauProblem {
    /// From the quadratic-damping coefficient `b > 1`.
    pub fn new(a: f64, b: f64, c: f64, e: PeriodicFunction) -> Result<Self> {
        if !(b > 1.0 && b.is_finite()) {
            return Err(Error::InvalidProblem(format!("b must exceed 1, got {b}")));
        }
        Self::with_mu(a, 1.0 / (b + 1.0), c, e)
    }

    /// From `μ ∈ (0, ½)` directly.
    pub fn with_mu(a: f64, mu: f64, c: f64, e: PeriodicFunction) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::InvalidProblem(format!("a must be nonnegative, got {a}")));
        }
        if !(mu > 0.0 && mu < 0.5) {
            return Err(Error::InvalidProblem(format!("mu must lie in (0, 1/2), got {mu}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidProblem(format!("c must be positive, got {c}")));
        }
        Ok(LiebauProblem { a, mu, c, e })
    }

    /// `a = r0/ρ`, `b = 1 + ζ/2`, `c = g A_π / A_τ`, `e = g V0 / A_τ − p/ρ`.
    pub fn from_physical(cfg: &PhysicalConfig) -> Result<Self> {
        cfg.validate()?;
        let t = cfg.p.period();
        let level = PeriodicFunction::constant(t, cfg.g * cfg.v0 / cfg.a_tau)?;
        let e = level.plus(&cfg.p.scaled(-1.0 / cfg.rho))?;
        Self::new(cfg.r0 / cfg.rho, 1.0 + cfg.zeta / 2.0, cfg.g * cfg.a_pi / cfg.a_tau, e)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `b = 1/μ − 1`.
    pub fn b(&self) -> f64 {
        1.0 / self.mu - 1.0
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn period(&self) -> f64 {
        self.e.period()
    }

    pub fn e(&self) -> &PeriodicFunction {
        &self.e
    }

    /// `r = e/μ`, `s = c/μ`, `α = 1 − 2μ`, `β = 1 − μ`.
    pub fn regularize(&self) -> GeneralProblem {
        let t = self.period();
        GeneralProblem {
            a: self.a,
            r: self.e.scaled(1.0 / self.mu),
            s: PeriodicFunction::constant(t, self.c / self.mu).expect("period already validated"),
            alpha: 1.0 - 2.0 * self.mu,
            beta: 1.0 - self.mu,
        }
    }
}

/// `x'' + a x' = r(t) x^α − s(t) x^β` with `0 < α < β < 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralProblem {
    a: f64,
    r: PeriodicFunction,
    s: PeriodicFunction,
    alpha: f64,
    beta: f64,
}

impl GeneralProblem {
    pub fn new(a: f64, r: PeriodicFunction, s: PeriodicFunction, alpha: f64, beta: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::InvalidProblem(format!("a must be nonnegative, got {a}")));
        }
        if !(0.0 < alpha && alpha < beta && beta < 1.0) {
            return Err(Error::InvalidProblem(format!("need 0 < alpha < beta < 1, got alpha = {alpha}, beta = {beta}")));
        }
        if r.period() != s.period() {
            return Err(Error::InvalidProblem(format!(
                "r and s have different periods {} and {}",
                r.period(),
                s.period()
            )));
        }
        Ok(GeneralProblem { a, r, s, alpha, beta })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn period(&self) -> f64 {
        self.r.period()
    }

    pub fn r(&self) -> &PeriodicFunction {
        &self.r
    }

    pub fn s(&self) -> &PeriodicFunction {
        &self.s
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Inverse of [`LiebauProblem::regularize`]: `μ = 1 − β`, `c = s·μ`, `e = r·μ`.
    /// Requires constant `s` and `α = 1 − 2μ`.
    pub fn deregularize(&self) -> Result<LiebauProblem> {
        let mu = 1.0 - self.beta;
        let ext = self.s.extrema();
        if ext.min != ext.max {
            return Err(Error::InvalidProblem("s must be constant to recover the singular model".into()));
        }
        if ((1.0 - 2.0 * mu) - self.alpha).abs() > 1e-12 {
            return Err(Error::InvalidProblem(format!(
                "alpha = {} does not match 1 - 2mu = {}",
                self.alpha,
                1.0 - 2.0 * mu
            )));
        }
        LiebauProblem::with_mu(self.a, mu, ext.min * mu, self.r.scaled(mu))
    }

    /// `r(t) x^α − s(t) x^β`, with value 0 at `x = 0`.
    pub fn rhs(&self, t: f64, x: f64) -> Result<f64> {
        if x < 0.0 || x.is_nan() {
            return Err(Error::NegativeState { t, x });
        }
        Ok(rhs_at(self.r.eval(t), self.s.eval(t), self.alpha, self.beta, x))
    }

    /// Shifted nonlinearity `f_m(t, x) = r(t) x^α − s(t) x^β + m² x`.
    pub fn f_m(&self, m: f64, t: f64, x: f64) -> Result<f64> {
        Ok(self.rhs(t, x)? + m * m * x)
    }

    /// `max(f_m(t, clamp(x, c_m R1, R2)), 0)`.
    pub fn f_m_truncated(&self, trunc: &Truncation, t: f64, x: f64) -> Result<f64> {
        let y = x.clamp(trunc.c_m * trunc.r1, trunc.r2);
        Ok(self.f_m(trunc.m, t, y)?.max(0.0))
    }

    /// Mean of `r` over mean of `s` raised to `1/(β − α)`: the constant solution when
    /// `r` and `s` are constant.
    pub fn equilibrium(&self) -> Option<f64> {
        let (rb, sb) = (self.r.mean(), self.s.mean());
        (rb > 0.0 && sb > 0.0).then(|| (rb / sb).powf(1.0 / (self.beta - self.alpha)))
    }
}

/// `r x^α − s x^β` for `x ≥ 0`.
#[inline]
pub(crate) fn rhs_at(r: f64, s: f64, alpha: f64, beta: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let ln = x.ln();
    r * (alpha * ln).exp() - s * (beta * ln).exp()
}

/// `∂/∂x (r x^α − s x^β)` for `x > 0`.
#[inline]
pub(crate) fn rhs_dx(r: f64, s: f64, alpha: f64, beta: f64, x: f64) -> f64 {
    let ln = x.ln();
    alpha * r * ((alpha - 1.0) * ln).exp() - beta * s * ((beta - 1.0) * ln).exp()
}

/// Shift and band of the truncated nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub m: f64,
    pub c_m: f64,
    pub r1: f64,
    pub r2: f64,
}

impl Truncation {
    pub fn new(m: f64, c_m: f64, r1: f64, r2: f64) -> Result<Self> {
        if !(r1 > 0.0 && r1 < r2 && r2.is_finite()) {
            return Err(Error::BadRadii { r1, r2 });
        }
        if !(c_m > 0.0 && c_m < 1.0) {
            return Err(Error::InvalidProblem(format!("cone constant must lie in (0, 1), got {c_m}")));
        }
        Ok(Truncation { m, c_m, r1, r2 })
    }

    /// Lower end of the band, `c_m R1`.
    pub fn lower(&self) -> f64 {
        self.c_m * self.r1
    }
}
