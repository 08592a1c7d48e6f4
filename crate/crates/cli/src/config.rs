//! JSON run configuration.

use std::path::Path;

use liebau_core::funcspec::PeriodicFunction;
use liebau_core::presets::Preset;
use liebau_core::problem::{GeneralProblem, LiebauProblem, PhysicalConfig};
use liebau_core::solve::SolveOpts;
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemRecord,
    #[serde(default)]
    pub certify: Option<CertifyRecord>,
    #[serde(default)]
    pub search: SearchRecord,
    #[serde(default)]
    pub solve: SolveOpts,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemRecord {
    Physical {
        #[serde(rename = "T", default)]
        period: Option<f64>,
        r0: f64,
        rho: f64,
        zeta: f64,
        g: f64,
        a_tau: f64,
        a_pi: f64,
        v0: f64,
        p: PeriodicFunction,
    },
    Liebau {
        #[serde(rename = "T", default)]
        period: Option<f64>,
        a: f64,
        #[serde(default)]
        b: Option<f64>,
        #[serde(default)]
        mu: Option<f64>,
        c: f64,
        e: PeriodicFunction,
    },
    General {
        #[serde(rename = "T", default)]
        period: Option<f64>,
        a: f64,
        r: PeriodicFunction,
        s: PeriodicFunction,
        alpha: f64,
        beta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TheoremArg {
    Thm41,
    Thm44,
    Thm47,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyRecord {
    #[serde(default)]
    pub theorem: Option<TheoremArg>,
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub r1: Option<f64>,
    #[serde(default)]
    pub r2: Option<f64>,
    /// Lower comparison function for the general check; `m² R1` when absent.
    #[serde(default)]
    pub g0: Option<PeriodicFunction>,
    /// Upper comparison function for the general check; `m² R2` when absent.
    #[serde(default)]
    pub g1: Option<PeriodicFunction>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SearchTheoremArg {
    Auto,
    Thm44,
    Thm47,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchRecord {
    #[serde(default)]
    pub theorem: Option<SearchTheoremArg>,
    #[serde(default)]
    pub m_points: Option<usize>,
    #[serde(default)]
    pub radius_points: Option<usize>,
    #[serde(default)]
    pub radius_min: Option<f64>,
    #[serde(default)]
    pub radius_max: Option<f64>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub strict: Option<f64>,
}

/// A validated problem in whichever form the configuration gave.
#[derive(Debug, Clone)]
pub enum Problem {
    Liebau(LiebauProblem),
    General(GeneralProblem),
}

impl Problem {
    pub fn general(&self) -> GeneralProblem {
        match self {
            Problem::Liebau(lp) => lp.regularize(),
            Problem::General(gp) => gp.clone(),
        }
    }

    pub fn liebau(&self) -> Option<LiebauProblem> {
        match self {
            Problem::Liebau(lp) => Some(lp.clone()),
            Problem::General(gp) => gp.deregularize().ok(),
        }
    }
}

/// Everything a subcommand needs besides its flags.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub problem: Problem,
    pub certify: CertifyRecord,
    pub search: SearchRecord,
    pub solve: SolveOpts,
}

fn field_error(field: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Config(format!("field `{field}`: {msg}"))
}

fn check_period(field: &str, f: &PeriodicFunction, period: Option<f64>) -> Result<(), Failure> {
    match period {
        Some(t) if !(t > 0.0 && t.is_finite()) => Err(field_error("problem.T", format!("period must be positive, got {t}"))),
        Some(t) if (f.period() - t).abs() > 1e-12 * t => {
            Err(field_error(field, format!("period {} does not match problem T = {t}", f.period())))
        }
        _ => Ok(()),
    }
}

pub fn parse(text: &str) -> Result<RunConfig, Failure> {
    serde_json::from_str(text).map_err(|e| {
        Failure::Config(format!("line {}, column {}: {}", e.line(), e.column(), e))
    })
}

pub fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    from_config(parse(&text)?)
}

pub fn from_config(cfg: RunConfig) -> Result<Loaded, Failure> {
    let problem = match cfg.problem {
        ProblemRecord::Physical { period, r0, rho, zeta, g, a_tau, a_pi, v0, p } => {
            check_period("problem.p", &p, period)?;
            let pc = PhysicalConfig { r0, rho, zeta, g, a_tau, a_pi, v0, p };
            for w in pc.warnings() {
                eprintln!("warning: {w}");
            }
            Problem::Liebau(LiebauProblem::from_physical(&pc).map_err(|e| field_error("problem", e))?)
        }
        ProblemRecord::Liebau { period, a, b, mu, c, e } => {
            check_period("problem.e", &e, period)?;
            let lp = match (b, mu) {
                (Some(b), None) => LiebauProblem::new(a, b, c, e),
                (None, Some(mu)) => LiebauProblem::with_mu(a, mu, c, e),
                _ => return Err(field_error("problem", "give exactly one of `b` and `mu`")),
            };
            Problem::Liebau(lp.map_err(|e| field_error("problem", e))?)
        }
        ProblemRecord::General { period, a, r, s, alpha, beta } => {
            check_period("problem.r", &r, period)?;
            check_period("problem.s", &s, period)?;
            Problem::General(GeneralProblem::new(a, r, s, alpha, beta).map_err(|e| field_error("problem", e))?)
        }
    };
    let certify = cfg.certify.unwrap_or_default();
    check_radii(certify.r1, certify.r2)?;
    Ok(Loaded { problem, certify, search: cfg.search, solve: cfg.solve })
}

pub fn check_radii(r1: Option<f64>, r2: Option<f64>) -> Result<(), Failure> {
    if let Some(r1) = r1 {
        if !(r1 > 0.0 && r1.is_finite()) {
            return Err(field_error("certify.r1", format!("must be positive, got {r1}")));
        }
    }
    if let (Some(r1), Some(r2)) = (r1, r2) {
        if !(r1 < r2 && r2.is_finite()) {
            return Err(field_error("certify.r2", format!("need R1 < R2, got R1 = {r1}, R2 = {r2}")));
        }
    }
    Ok(())
}

pub fn from_preset(preset: Preset, v0: Option<f64>) -> Result<Loaded, Failure> {
    if v0.is_some() && preset != Preset::Propst {
        return Err(Failure::Config("--v0 applies to the propst preset only".into()));
    }
    if let Some(v) = v0 {
        // u = V0 − 2 + cos t must stay positive.
        if !(v > 3.0 && v.is_finite()) {
            return Err(Failure::Config(format!("--v0 must exceed 3, got {v}")));
        }
    }
    let (m, kappa, r1, r2) = liebau_core::presets::EXAMPLE_46_TUPLE;
    let certify = match preset {
        Preset::Example46 => CertifyRecord {
            theorem: Some(TheoremArg::Thm44),
            m: Some(m),
            kappa: Some(kappa),
            r1: Some(r1),
            r2: Some(r2),
            ..CertifyRecord::default()
        },
        Preset::Example48 | Preset::Example48Cosine | Preset::Example48Cubic => CertifyRecord {
            theorem: Some(TheoremArg::Thm47),
            m: Some(liebau_core::presets::EXAMPLE_48_M),
            ..CertifyRecord::default()
        },
        Preset::Propst => CertifyRecord::default(),
    };
    let solve = SolveOpts { guess: preset.initial_guess(), ..SolveOpts::default() };
    Ok(Loaded {
        problem: Problem::Liebau(preset.problem(v0)),
        certify,
        search: SearchRecord::default(),
        solve,
    })
}
