//! Reference regression suite over the built-in examples. Each check returns a
//! [`CheckResult`] with the measured quantities, so callers can print a table.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::certify::{self, CheckOpts, SearchOpts, Verdict};
use crate::greens::GreensKernel;
use crate::presets::{self, Preset, EXAMPLE_46_TUPLE, EXAMPLE_48_BOUND, EXAMPLE_48_M};
use crate::pump;
use crate::solve::{self, cone_and_localization, GridSolution, InitialGuess, SolveOpts};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    /// `label: value` pairs with a pass mark for each sub-check.
    pub details: Vec<String>,
}

struct Recorder {
    details: Vec<String>,
    passed: bool,
}

impl Recorder {
    fn new() -> Self {
        Recorder { details: Vec::new(), passed: true }
    }

    fn check(&mut self, label: impl Into<String>, ok: bool) {
        let label = label.into();
        self.passed &= ok;
        self.details.push(format!("{} {label}", if ok { "ok  " } else { "FAIL" }));
    }

    fn near(&mut self, label: &str, value: f64, target: f64, tol: f64) {
        self.check(format!("{label} = {value:.10} (target {target} ± {tol:e})"), (value - target).abs() <= tol);
    }

    fn below(&mut self, label: &str, value: f64, bound: f64) {
        self.check(format!("{label} = {value:.3e} < {bound:e}"), value < bound);
    }

    fn error(&mut self, label: &str, err: crate::Error) {
        self.check(format!("{label}: {err}"), false);
    }

    fn finish(self, id: u32, title: &'static str) -> CheckResult {
        CheckResult { id, title, passed: self.passed, details: self.details }
    }
}

const KERNELS: [(f64, f64, f64); 3] = [(1.6, 0.7, 1.0), (0.0, 0.25, TAU), (2.0, 1.0, 1.0)];

pub fn green_constants() -> CheckResult {
    let mut rec = Recorder::new();
    match GreensKernel::build(1.6, 0.7, 1.0) {
        Ok(k) => {
            rec.near("c_m", k.cone_constant(), 0.94144, 1e-4);
            rec.near("K(0)", k.diagonal(), 1.96026, 1e-4);
            let spread = (0..256)
                .map(|i| {
                    let s = i as f64 / 256.0;
                    (k.green_at(s, s) - k.diagonal()).abs()
                })
                .fold(0.0, f64::max);
            rec.below("diagonal spread", spread, 1e-10);
        }
        Err(e) => rec.error("build", e),
    }
    rec.finish(1, "Green's function constants")
}

pub fn row_integrals() -> CheckResult {
    let mut rec = Recorder::new();
    for (a, m, t) in KERNELS {
        match GreensKernel::build(a, m, t) {
            Ok(k) => {
                let r = k.property_report(256, crate::greens::DEFAULT_PANELS, 16);
                rec.below(&format!("({a}, {m}, {t:.4}) max_t |∫G ds − 1/m²|"), r.row_integral_error, 1e-8);
            }
            Err(e) => rec.error("build", e),
        }
    }
    rec.near("1/m² for m = 0.7", 1.0 / 0.49, 2.040816, 1e-6);
    rec.finish(2, "Row integral identity")
}

pub fn cone_chain() -> CheckResult {
    let mut rec = Recorder::new();
    for (a, m, t) in KERNELS {
        match GreensKernel::build(a, m, t) {
            Ok(k) => {
                let (k0, c) = (k.diagonal(), k.cone_constant());
                let n = 256;
                let mut ok = true;
                let mut worst = 0.0f64;
                for i in 0..n {
                    for j in 0..n {
                        let g = k.green_at(i as f64 * t / n as f64, j as f64 * t / n as f64);
                        ok &= g >= k0 * (1.0 - 1e-12) && k0 >= c * g * (1.0 - 1e-12);
                        worst = worst.max((k0 - g) / k0).max((c * g - k0) / k0);
                    }
                }
                rec.check(format!("({a}, {m}, {t:.4}) worst relative violation {worst:.3e} within 1e-12"), ok);
            }
            Err(e) => rec.error("build", e),
        }
    }
    rec.finish(3, "Cone chain on a 256×256 grid")
}

pub fn example_46_certificate() -> CheckResult {
    let mut rec = Recorder::new();
    let lp = presets::example_46();
    let (m, kappa, r1, r2) = EXAMPLE_46_TUPLE;
    match certify::check_thm44(&lp, m, kappa, r1, r2) {
        Ok(cert) => {
            rec.check(format!("verdict {:?}", cert.verdict), cert.verdict == Verdict::Pass);
            if let Some(c4) = cert.condition("C4") {
                let rel = c4.relative_margin;
                rec.check(format!("C4 relative margin {rel:.3e} in (0, 1e-5)"), rel > 0.0 && rel < 1e-5);
            }
        }
        Err(e) => rec.error("check", e),
    }
    match certify::kappa_interval(&lp, m, r1) {
        Ok((lo, hi)) => rec.check(format!("κ interval [{lo:.4}, {hi:.4}] contains {kappa}"), lo <= kappa && kappa <= hi),
        Err(e) => rec.error("κ interval", e),
    }
    rec.finish(4, "Sign-changing example certificate")
}

pub fn example_48_numbers() -> CheckResult {
    let mut rec = Recorder::new();
    let lp = presets::example_48();
    match certify::check_cpt_criterion(&lp) {
        Ok(r) => {
            rec.near("c²/(4μe_*)", r.lhs, 36.0406, 1e-3);
            rec.near("(π/T)² + a²/4", r.rhs, 10.5096, 1e-3);
            rec.check(format!("earlier criterion satisfied = {}", r.satisfied), !r.satisfied);
        }
        Err(e) => rec.error("earlier criterion", e),
    }
    match certify::check_thm47(&lp, EXAMPLE_48_M) {
        Ok(cert) => {
            rec.check(format!("verdict {:?}", cert.verdict), cert.verdict == Verdict::Pass);
            if let Some(c6) = cert.condition("C6") {
                rec.near("C6 left side", c6.lhs, 0.2884, 1e-3);
                rec.check(format!("C6 left side {:.5} <= {:.2}", c6.lhs, c6.rhs), c6.lhs <= c6.rhs);
            }
            let thr = cert.e_upper_threshold.unwrap_or(f64::NAN);
            rec.near("e^* threshold", thr, 1.5443, 1e-3);
            let bound = certify::thm47_upper_radius(&lp, cert.c_m, 1.5443);
            rec.near("bound at threshold", bound, EXAMPLE_48_BOUND, 1e-2);
        }
        Err(e) => rec.error("check", e),
    }
    rec.finish(5, "Positive-forcing example numbers")
}

pub fn constant_anchor() -> CheckResult {
    let mut rec = Recorder::new();
    let gp = presets::example_48_constant().regularize();
    match solve::solve_periodic(&gp, &SolveOpts::default()) {
        Ok(sol) => {
            rec.check(format!("converged = {}", sol.converged), sol.converged);
            let dev = sol.values.iter().map(|v| (v - 27.1297).abs()).fold(0.0, f64::max);
            rec.check(format!("max |x − 27.1297| = {dev:.3e} <= 1e-3"), dev <= 1e-3);
        }
        Err(e) => rec.error("solve", e),
    }
    rec.finish(6, "Constant solution anchor")
}

fn propst_exact(v0: f64, n: usize) -> (GridSolution, Vec<f64>, Vec<f64>) {
    let u = GridSolution::from_values(TAU, (0..n).map(|i| v0 - 2.0 + (i as f64 * TAU / n as f64).cos()).collect());
    let d1 = u.nodes.iter().map(|t| -t.sin()).collect();
    let d2 = u.nodes.iter().map(|t| -t.cos()).collect();
    (u, d1, d2)
}

fn propst_error(sol: &GridSolution) -> f64 {
    sol.nodes.iter().zip(&sol.values).map(|(t, v)| (v - (2.0 + t.cos()).powi(3)).abs()).fold(0.0, f64::max)
}

pub fn propst_solution() -> CheckResult {
    let mut rec = Recorder::new();
    let lp = presets::propst(4.0);
    let (u, d1, d2) = propst_exact(4.0, 1024);
    let run = || -> Result<(f64, f64)> {
        Ok((pump::singular_residual_with(&lp, &u, &d1, &d2)?, pump::singular_residual(&lp, &u)?))
    };
    match run() {
        Ok((analytic, fd)) => {
            rec.below("analytic-derivative residual", analytic, 1e-12);
            rec.below("central-difference residual (N = 1024)", fd, 1e-4);
        }
        Err(e) => rec.error("residual", e),
    }
    let opts = SolveOpts { guess: Preset::Propst.initial_guess(), ..SolveOpts::default() };
    match solve::solve_periodic(&lp.regularize(), &opts) {
        Ok(sol) => rec.below("sup |x − (2 + cos t)³| (N = 512)", propst_error(&sol), 1e-6),
        Err(e) => rec.error("solve", e),
    }
    rec.finish(7, "Exact pipe-tank solution")
}

pub fn figure_solutions() -> CheckResult {
    let mut rec = Recorder::new();
    for (name, lp) in [("cosine", presets::example_48_cosine()), ("cubic", presets::example_48_cubic())] {
        let band = certify::check_thm47(&lp, EXAMPLE_48_M);
        match (solve::solve_periodic(&lp.regularize(), &SolveOpts::default()), band) {
            (Ok(sol), Ok(cert)) => {
                rec.check(format!("{name}: converged = {}", sol.converged), sol.converged);
                rec.check(
                    format!("{name}: range [{:.6}, {:.6}] inside (0, {EXAMPLE_48_BOUND})", sol.min(), sol.max()),
                    sol.min() > 0.0 && sol.max() < EXAMPLE_48_BOUND,
                );
                rec.check(format!("{name}: periodicity defect {}", sol.bc_mismatch), sol.bc_mismatch == 0.0);
                let flags = cone_and_localization(&sol.values, 0.94144, cert.params.r1, EXAMPLE_48_BOUND);
                rec.check(
                    format!("{name}: cone and localization {flags:?}"),
                    flags.in_cone && flags.above_lower && flags.below_upper && flags.not_in_b_prime,
                );
                rec.below(&format!("{name}: refined-grid sup residual"), sol.sup_residual, 1e-8);
            }
            (Err(e), _) | (_, Err(e)) => rec.error(name, e),
        }
    }
    rec.finish(8, "Positive-forcing figure solutions")
}

pub fn pumping_identity() -> CheckResult {
    let mut rec = Recorder::new();
    for v0 in [3.5, 4.0, 10.0] {
        let lp = presets::propst(v0);
        let (u, d1, _) = propst_exact(v0, 1024);
        match pump::pump_report_with(&lp, &u, &d1) {
            Ok(rep) => {
                rec.below(&format!("V0 = {v0}: identity residual"), rep.identity_residual, 1e-10);
                rec.near(&format!("V0 = {v0}: ē/c − ū"), rep.delta, 5.0, 1e-10);
            }
            Err(e) => rec.error("report", e),
        }
    }
    for (name, lp) in [("cosine", presets::example_48_cosine()), ("cubic", presets::example_48_cubic())] {
        let run = || -> Result<pump::PumpReport> {
            let sol = solve::solve_periodic(&lp.regularize(), &SolveOpts::default())?;
            pump::pump_report(&lp, &pump::x_to_u(&sol, lp.mu())?)
        };
        match run() {
            Ok(rep) => rec.check(format!("{name}: ē/c − ū = {:.3e} > 0", rep.delta), rep.delta > 0.0),
            Err(e) => rec.error(name, e),
        }
    }
    rec.finish(9, "Pumping identity")
}

pub fn soundness_link() -> CheckResult {
    let mut rec = Recorder::new();
    for preset in [Preset::Example46, Preset::Example48] {
        let lp = preset.problem(None);
        let Some(cert) = certify::search_certificate(&lp, &SearchOpts::default()) else {
            rec.check(format!("{}: search found a certificate", preset.name()), false);
            continue;
        };
        let p = cert.params;
        rec.check(
            format!("{}: {:?} certificate m = {:.4}, R1 = {:.3e}, R2 = {:.3e}", preset.name(), cert.theorem, p.m, p.r1, p.r2),
            cert.passed(),
        );
        match certify::soundness_check(&lp, &cert, &CheckOpts::default()) {
            Ok(h) => rec.check(format!("{}: general hypotheses {:?}", preset.name(), h.verdict), h.passed()),
            Err(e) => rec.error("general hypotheses", e),
        }
        let opts = SolveOpts { guess: InitialGuess::Default, ..SolveOpts::default() };
        match solve::solve_periodic(&lp.regularize(), &opts) {
            Ok(sol) => {
                let (lo, hi) = cert.localization;
                rec.check(
                    format!("{}: solution range [{:.6e}, {:.6e}] inside [{lo:.3e}, {hi:.3e}]", preset.name(), sol.min(), sol.max()),
                    sol.min() >= lo && sol.max() <= hi,
                );
            }
            Err(e) => rec.error("solve", e),
        }
    }
    rec.finish(10, "Certificate soundness")
}

pub fn scheme_order() -> CheckResult {
    let mut rec = Recorder::new();
    let gp = presets::propst(4.0).regularize();
    let err = |n: usize| -> Result<f64> {
        let opts = SolveOpts { n, polish: false, guess: Preset::Propst.initial_guess(), ..SolveOpts::default() };
        Ok(propst_error(&solve::solve_periodic(&gp, &opts)?))
    };
    match (err(256), err(512)) {
        (Ok(a), Ok(b)) => {
            let ratio = a / b;
            rec.check(format!("error(256)/error(512) = {ratio:.4} in [3.5, 4.5]"), (3.5..=4.5).contains(&ratio));
        }
        (Err(e), _) | (_, Err(e)) => rec.error("solve", e),
    }
    rec.finish(11, "Second-order convergence")
}

/// Every check in order.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        green_constants(),
        row_integrals(),
        cone_chain(),
        example_46_certificate(),
        example_48_numbers(),
        constant_anchor(),
        propst_solution(),
        figure_solutions(),
        pumping_identity(),
        soundness_link(),
        scheme_order(),
    ]
}
