//! Periodic Green's function of `x'' + a x' + m² x = h`, `x(0) = x(T)`, `x'(0) = x'(T)`.
//!
//! The kernel is translation invariant, `G(t, s) = K((t − s) mod T)`, with
//!
//! ```text
//! K(τ) = [ e^{λ₁τ} / (1 − e^{λ₁T}) − e^{λ₂τ} / (1 − e^{λ₂T}) ] / (λ₁ − λ₂),   τ ∈ [0, T]
//! ```
//!
//! where `λ₁,₂` are the roots of `λ² + aλ + m² = 0`. Complex roots use the imaginary
//! part of the same expression; a double root uses its `λ₂ → λ₁` limit.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcspec::{wrap, Periodic};
use crate::numeric;

/// Scan density for locating the kernel extrema.
pub const KERNEL_SCAN_POINTS: usize = 4096;
/// Argument tolerance of the extremum refinement.
pub const KERNEL_T_TOL: f64 = 1e-13;
/// Default Simpson panel count for `∫ G(t, s) h(s) ds`.
pub const DEFAULT_PANELS: usize = 1024;
/// Relative tolerance for the diagonal-minimality check performed at build time.
pub const DIAGONAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelCase {
    RealDistinct,
    DoubleRoot,
    ComplexPair,
}

/// Roots of `λ² + aλ + m² = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Roots {
    Real(f64, f64),
    Double(f64),
    Complex { re: f64, im: f64 },
}

/// Upper end of the positivity window, `√((π/T)² + (a/2)²)`.
pub fn m_max(a: f64, period: f64) -> f64 {
    ((PI / period).powi(2) + (0.5 * a).powi(2)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreensKernel {
    a: f64,
    m: f64,
    period: f64,
    case: KernelCase,
    roots: Roots,
    k0: f64,
    kmin: f64,
    kmax: f64,
    argmin: f64,
    argmax: f64,
}

impl GreensKernel {
    pub fn build(a: f64, m: f64, period: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::BadPeriod(period));
        }
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::InvalidProblem(format!("friction a must be finite and nonnegative, got {a}")));
        }
        let m_max = m_max(a, period);
        if !(m > 0.0 && m < m_max) {
            return Err(Error::MOutOfRange { m, m_max });
        }
        let disc = a * a - 4.0 * m * m;
        let (case, roots) = if disc.abs() < 1e-9 * (4.0 * m * m).max(1.0) {
            (KernelCase::DoubleRoot, Roots::Double(-0.5 * a))
        } else if disc > 0.0 {
            let d = disc.sqrt();
            // Stable quadratic formula: the larger-magnitude root first, the other from the product.
            let big = -0.5 * (a + d);
            (KernelCase::RealDistinct, Roots::Real(m * m / big, big))
        } else {
            (KernelCase::ComplexPair, Roots::Complex { re: -0.5 * a, im: 0.5 * (-disc).sqrt() })
        };
        let mut kernel = GreensKernel {
            a,
            m,
            period,
            case,
            roots,
            k0: 0.0,
            kmin: 0.0,
            kmax: 0.0,
            argmin: 0.0,
            argmax: 0.0,
        };
        kernel.k0 = kernel.kernel_at(0.0);
        let (argmin, kmin) =
            numeric::scan_min(|t| kernel.raw(t), 0.0, period, KERNEL_SCAN_POINTS, KERNEL_T_TOL);
        let (argmax, neg) =
            numeric::scan_min(|t| -kernel.raw(t), 0.0, period, KERNEL_SCAN_POINTS, KERNEL_T_TOL);
        kernel.kmin = kmin.min(kernel.k0);
        kernel.argmin = if kmin < kernel.k0 { argmin } else { 0.0 };
        kernel.kmax = -neg;
        kernel.argmax = argmax;
        if !(kernel.kmin > 0.0) {
            return Err(Error::PropertyViolation(format!("kernel minimum {} is not positive", kernel.kmin)));
        }
        if kernel.k0 - kernel.kmin > DIAGONAL_TOL * kernel.k0 {
            return Err(Error::PropertyViolation(format!(
                "diagonal value K(0) = {} exceeds the kernel minimum {} at τ = {}",
                kernel.k0, kernel.kmin, kernel.argmin
            )));
        }
        Ok(kernel)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn case(&self) -> KernelCase {
        self.case
    }

    pub fn roots(&self) -> Roots {
        self.roots
    }

    pub fn m_max(&self) -> f64 {
        m_max(self.a, self.period)
    }

    /// `K(0) = G(s, s)`.
    pub fn diagonal(&self) -> f64 {
        self.k0
    }

    pub fn kmin(&self) -> f64 {
        self.kmin
    }

    pub fn kmax(&self) -> f64 {
        self.kmax
    }

    /// Location of the kernel maximum in `[0, T)`.
    pub fn argmax(&self) -> f64 {
        self.argmax
    }

    /// Largest `c` with `G(t, s) ≥ G(s, s) ≥ c·G(t, s)`: `Kmin / Kmax`.
    pub fn cone_constant(&self) -> f64 {
        self.kmin / self.kmax
    }

    /// `K(τ)`; arguments outside `[0, T)` are wrapped, so `K(T) = K(0)` exactly.
    pub fn kernel_at(&self, tau: f64) -> f64 {
        self.raw(wrap(tau, self.period))
    }

    /// `G(t, s) = K((t − s) mod T)`.
    pub fn green_at(&self, t: f64, s: f64) -> f64 {
        self.kernel_at(t - s)
    }

    fn raw(&self, tau: f64) -> f64 {
        let t = self.period;
        match self.roots {
            Roots::Real(l1, l2) => {
                let p = |l: f64| (l * tau).exp() / -(l * t).exp_m1();
                (p(l1) - p(l2)) / (l1 - l2)
            }
            Roots::Double(l) => double_root_kernel(l, t, tau),
            Roots::Complex { re, im } => {
                let l = Complex64::new(re, im);
                let z = (l * tau).exp() / (Complex64::new(1.0, 0.0) - (l * t).exp());
                z.im / im
            }
        }
    }

    /// `∫₀ᵀ G(t, s) h(s) ds`, integrated in `τ = t − s` with Simpson panels split at the
    /// images of the kinks of `h`.
    pub fn convolve(&self, h: &dyn Periodic, t: f64, panels: usize) -> f64 {
        let period = self.period;
        let cuts: Vec<f64> = h.kinks().iter().map(|&k| wrap(t - k, period)).collect();
        numeric::simpson_split(|tau| self.raw(tau) * h.eval(t - tau), 0.0, period, &cuts, panels)
    }

    /// Circular Simpson convolution on a uniform grid of `samples.len()` (even) nodes:
    /// `x_i ≈ ∫₀ᵀ K(τ) h(t_i − τ) dτ` with `h` given at `t_j = jT/N`.
    pub fn convolve_grid(&self, samples: &[f64]) -> Vec<f64> {
        let weights = self.grid_weights(samples.len());
        let n = samples.len();
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                for (j, w) in weights.iter().enumerate() {
                    acc += w * samples[(i + n - j) % n];
                }
                acc
            })
            .collect()
    }

    /// Simpson weights times kernel samples for the circular rule; the `τ = 0` and
    /// `τ = T` endpoint weights are merged.
    pub fn grid_weights(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2 && n % 2 == 0, "circular Simpson rule needs an even node count");
        let h = self.period / n as f64;
        (0..n)
            .map(|j| {
                let w = if j == 0 { 2.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
                w * h / 3.0 * self.raw(j as f64 * h)
            })
            .collect()
    }

    /// Numerical check of positivity, the row integral identity, the cone chain and
    /// the reproduction property. Fails with `PropertyViolation` when any quadrature
    /// level check exceeds `tol` or the finite-difference residual exceeds
    /// [`FD_REPRODUCTION_BOUND`].
    pub fn verify_properties(&self, tol: f64) -> Result<PropertyReport> {
        let report = self.property_report(256, DEFAULT_PANELS, 4096);
        let mut failures = Vec::new();
        if !(report.positivity_min > 0.0) {
            failures.push(format!("positivity minimum {}", report.positivity_min));
        }
        if report.row_integral_error > tol {
            failures.push(format!("row integral error {:e}", report.row_integral_error));
        }
        if report.cone_chain_violation > tol {
            failures.push(format!("cone chain violation {:e}", report.cone_chain_violation));
        }
        if report.diagonal_gap > tol {
            failures.push(format!("diagonal gap {:e}", report.diagonal_gap));
        }
        if report.reproduction_error > tol {
            failures.push(format!("reproduction error {:e}", report.reproduction_error));
        }
        if report.reproduction_fd_residual > FD_REPRODUCTION_BOUND {
            failures.push(format!("finite-difference residual {:e}", report.reproduction_fd_residual));
        }
        if report.reproduction_bc_mismatch > FD_REPRODUCTION_BOUND {
            failures.push(format!("boundary mismatch {:e}", report.reproduction_bc_mismatch));
        }
        if failures.is_empty() {
            Ok(report)
        } else {
            Err(Error::PropertyViolation(failures.join("; ")))
        }
    }

    /// Raw property measurements on a `grid × grid` sample, Simpson quadrature with
    /// `panels` panels and a reproduction test on `fd_nodes` nodes.
    pub fn property_report(&self, grid: usize, panels: usize, fd_nodes: usize) -> PropertyReport {
        let t = self.period;
        let step = t / grid as f64;
        let c = self.cone_constant();
        let mut positivity_min = f64::INFINITY;
        let mut cone_chain_violation: f64 = 0.0;
        for i in 0..grid {
            for j in 0..grid {
                let g = self.green_at(i as f64 * step, j as f64 * step);
                positivity_min = positivity_min.min(g);
                cone_chain_violation = cone_chain_violation
                    .max((self.k0 - g) / self.k0)
                    .max((c * g - self.k0) / self.k0);
            }
        }
        let inv_m2 = 1.0 / (self.m * self.m);
        let one = Unit(t);
        let row_integral_error = (0..grid)
            .map(|i| {
                let ti = i as f64 * step;
                let v = numeric::simpson_split(|s| self.green_at(ti, s), 0.0, t, &[ti], panels);
                (v - inv_m2).abs()
            })
            .fold(0.0, f64::max)
            .max((self.convolve(&one, 0.37 * t, panels) - inv_m2).abs());

        // Reproduction: h = cos(ωt) has the periodic particular solution Re(e^{iωt} / (m² − ω² + iaω)).
        let omega = TAU / t;
        let denom = Complex64::new(self.m * self.m - omega * omega, self.a * omega);
        let exact = |s: f64| (Complex64::new(0.0, omega * s).exp() / denom).re;
        let cosine = Cosine { period: t, omega };
        let reproduction_error = (0..64)
            .map(|i| {
                let s = i as f64 * t / 64.0;
                (self.convolve(&cosine, s, panels) - exact(s)).abs()
            })
            .fold(0.0, f64::max);

        let n = fd_nodes;
        let h = t / n as f64;
        let samples: Vec<f64> = (0..n).map(|i| (omega * i as f64 * h).cos()).collect();
        let x = self.convolve_grid(&samples);
        let reproduction_fd_residual = (0..n)
            .map(|i| {
                let (xm, x0, xp) = (x[(i + n - 1) % n], x[i], x[(i + 1) % n]);
                let r = (xp - 2.0 * x0 + xm) / (h * h) + self.a * (xp - xm) / (2.0 * h) + self.m * self.m * x0
                    - samples[i];
                r.abs()
            })
            .fold(0.0, f64::max);
        let d = 1e-4 * t;
        let at = |s: f64| self.convolve(&cosine, s, panels);
        let slope = |s: f64| (at(s + d) - at(s - d)) / (2.0 * d);
        let reproduction_bc_mismatch = (at(0.0) - at(t)).abs() + (slope(0.0) - slope(t)).abs();

        PropertyReport {
            positivity_min,
            row_integral_error,
            cone_chain_violation: cone_chain_violation.max(0.0),
            diagonal_gap: (self.k0 - self.kmin).abs() / self.k0,
            reproduction_error,
            reproduction_fd_residual,
            reproduction_bc_mismatch,
        }
    }
}

/// Bound on the second-order finite-difference reproduction residual.
pub const FD_REPRODUCTION_BOUND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropertyReport {
    /// Minimum of `G` over the sample grid.
    pub positivity_min: f64,
    /// `max_t |∫ G(t, s) ds − 1/m²|`.
    pub row_integral_error: f64,
    /// Worst relative violation of `G(t, s) ≥ K(0) ≥ c·G(t, s)`.
    pub cone_chain_violation: f64,
    /// `|K(0) − Kmin| / K(0)`.
    pub diagonal_gap: f64,
    /// Sup error of `∫ G·cos` against the closed-form periodic solution.
    pub reproduction_error: f64,
    /// Sup residual of the kernel-produced solution under a second-order stencil.
    pub reproduction_fd_residual: f64,
    /// `|x(0) − x(T)| + |x'(0) − x'(T)|` for the kernel-produced solution.
    pub reproduction_bc_mismatch: f64,
}

/// `λ₂ → λ₁` limit of the distinct-root kernel.
pub(crate) fn double_root_kernel(l: f64, period: f64, tau: f64) -> f64 {
    let q = -(l * period).exp_m1();
    let e = (l * tau).exp();
    tau * e / q + e * period * (l * period).exp() / (q * q)
}

struct Unit(f64);

impl Periodic for Unit {
    fn period(&self) -> f64 {
        self.0
    }
    fn eval(&self, _: f64) -> f64 {
        1.0
    }
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

struct Cosine {
    period: f64,
    omega: f64,
}

impl Periodic for Cosine {
    fn period(&self) -> f64 {
        self.period
    }
    fn eval(&self, t: f64) -> f64 {
        (self.omega * t).cos()
    }
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}
