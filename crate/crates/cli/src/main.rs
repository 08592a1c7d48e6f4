mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use liebau_core::certify::{self, CheckOpts, SearchOpts, TheoremChoice, Verdict};
use liebau_core::funcspec::PeriodicFunction;
use liebau_core::greens::GreensKernel;
use liebau_core::presets::Preset;
use liebau_core::solve::{self, GridSolution, SolveOpts};
use liebau_core::{pump, regression, Error};
use serde::Serialize;

use config::{Loaded, Problem, SearchTheoremArg, TheoremArg};

/// Result categories and their exit codes.
#[derive(Debug)]
pub enum Failure {
    Io(String),
    Config(String),
    CertFail,
    Inapplicable,
    NoneFound,
    NotConverged(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) | Failure::Internal(_) => 1,
            Failure::Config(_) => 2,
            Failure::CertFail => 3,
            Failure::Inapplicable => 4,
            Failure::NoneFound => 5,
            Failure::NotConverged(_) => 6,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. } | Error::LeftPositiveCone { .. } => Failure::NotConverged(e.to_string()),
            Error::Inapplicable(_) => Failure::Inapplicable,
            Error::PropertyViolation(_) => Failure::Internal(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "liebau", version, about = "Existence certificates and periodic solutions for valveless pumping models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Source {
    /// Built-in problem: example-4.6, example-4.8, example-4.8-cosine, example-4.8-cubic, propst.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Total volume for the propst preset (default 4).
    #[arg(long, requires = "preset")]
    v0: Option<f64>,
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Green's function constants (JSON) and samples of K(τ) (CSV).
    Greens {
        #[arg(short = 'a', allow_negative_numbers = true)]
        a: f64,
        #[arg(short = 'm')]
        m: f64,
        #[arg(short = 'T')]
        period: f64,
        /// Number of sampling intervals on [0, T].
        #[arg(long, default_value_t = 256)]
        samples: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check one certificate.
    Certify {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum)]
        theorem: Option<TheoremArg>,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        r1: Option<f64>,
        #[arg(long)]
        r2: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search shifts and radii for a passing certificate.
    Search {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum)]
        theorem: Option<SearchTheoremArg>,
        /// Worker threads (default: LIEBAU_THREADS, else all processors).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for a periodic solution.
    Solve {
        #[command(flatten)]
        source: Source,
        /// Grid size.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pumping report for a solution CSV, or for a fresh solve.
    Pump {
        #[command(flatten)]
        source: Source,
        /// Solution CSV with columns t and u (or t and x).
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in regression suite.
    Verify {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(source: &Source) -> Result<Loaded, Failure> {
    match (&source.preset, &source.config) {
        (Some(name), None) => {
            let preset = Preset::from_name(name).ok_or_else(|| {
                let known: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                Failure::Config(format!("unknown preset `{name}`; known: {}", known.join(", ")))
            })?;
            config::from_preset(preset, source.v0)
        }
        (None, Some(path)) => config::load(path),
        _ => Err(Failure::Config("give exactly one of --preset and --config".into())),
    }
}

fn liebau_only(loaded: &Loaded, what: &str) -> Result<liebau_core::problem::LiebauProblem, Failure> {
    loaded
        .problem
        .liebau()
        .ok_or_else(|| Failure::Config(format!("{what} needs a problem that comes from the Liebau model")))
}

#[derive(Serialize)]
struct GreensConstants {
    a: f64,
    m: f64,
    #[serde(rename = "T")]
    period: f64,
    case: liebau_core::greens::KernelCase,
    #[serde(rename = "K0")]
    k0: f64,
    #[serde(rename = "Kmin")]
    kmin: f64,
    #[serde(rename = "Kmax")]
    kmax: f64,
    c_m: f64,
    m_max: f64,
}

fn run_greens(a: f64, m: f64, period: f64, samples: usize, csv: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
    if samples == 0 {
        return Err(Failure::Config("--samples must be positive".into()));
    }
    let k = GreensKernel::build(a, m, period)?;
    let consts = GreensConstants {
        a,
        m,
        period,
        case: k.case(),
        k0: k.kernel_at(0.0),
        kmin: k.kmin(),
        kmax: k.kmax(),
        c_m: k.cone_constant(),
        m_max: k.m_max(),
    };
    if let Some(path) = csv {
        let taus: Vec<f64> = (0..=samples).map(|i| period * i as f64 / samples as f64).collect();
        let ks: Vec<f64> = taus.iter().map(|&t| k.kernel_at(t)).collect();
        output::emit(Some(path), &output::csv_table(&["tau", "K"], &[&taus, &ks]))?;
    }
    output::emit(out, &output::to_json(&consts))
}

fn run_certify(
    loaded: &Loaded,
    theorem: Option<TheoremArg>,
    overrides: [Option<f64>; 4],
    out: Option<&Path>,
) -> Result<(), Failure> {
    let rec = &loaded.certify;
    let [m, kappa, r1, r2] = overrides;
    let (m, kappa, r1, r2) = (m.or(rec.m), kappa.or(rec.kappa), r1.or(rec.r1), r2.or(rec.r2));
    config::check_radii(r1, r2)?;
    let theorem = theorem.or(rec.theorem).unwrap_or(match loaded.problem {
        Problem::General(_) => TheoremArg::Thm41,
        Problem::Liebau(_) => {
            if kappa.is_some() {
                TheoremArg::Thm44
            } else {
                TheoremArg::Thm47
            }
        }
    });
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Failure::Config(format!("certify needs `{name}`")));
    let m = need(m, "m")?;
    let cert = match theorem {
        TheoremArg::Thm41 => {
            let gp = loaded.problem.general();
            let (r1, r2) = (need(r1, "r1")?, need(r2, "r2")?);
            let t = gp.period();
            let g0 = match &rec.g0 {
                Some(f) => f.clone(),
                None => PeriodicFunction::constant(t, m * m * r1)?,
            };
            let g1 = match &rec.g1 {
                Some(f) => f.clone(),
                None => PeriodicFunction::constant(t, m * m * r2)?,
            };
            for (name, f) in [("certify.g0", &g0), ("certify.g1", &g1)] {
                if (f.period() - t).abs() > 1e-12 * t {
                    return Err(Failure::Config(format!("field `{name}`: period {} does not match problem T = {t}", f.period())));
                }
            }
            certify::check_h(&gp, m, r1, r2, &g0, &g1, &CheckOpts::default())?
        }
        TheoremArg::Thm44 => {
            let lp = liebau_only(loaded, "Thm44")?;
            certify::check_thm44(&lp, m, need(kappa, "kappa")?, need(r1, "r1")?, need(r2, "r2")?)?
        }
        TheoremArg::Thm47 => certify::check_thm47(&liebau_only(loaded, "Thm47")?, m)?,
    };
    output::emit(out, &output::to_json(&cert))?;
    match cert.verdict {
        Verdict::Pass => Ok(()),
        Verdict::Fail => Err(Failure::CertFail),
        Verdict::Inapplicable => Err(Failure::Inapplicable),
    }
}

fn run_search(loaded: &Loaded, theorem: Option<SearchTheoremArg>, threads: Option<usize>, out: Option<&Path>) -> Result<(), Failure> {
    let lp = liebau_only(loaded, "search")?;
    let rec = &loaded.search;
    let d = SearchOpts::default();
    let theorem = match theorem.or(rec.theorem) {
        None | Some(SearchTheoremArg::Auto) => TheoremChoice::Auto,
        Some(SearchTheoremArg::Thm44) => TheoremChoice::Thm44,
        Some(SearchTheoremArg::Thm47) => TheoremChoice::Thm47,
    };
    let opts = SearchOpts {
        theorem,
        m_points: rec.m_points.unwrap_or(d.m_points),
        radius_points: rec.radius_points.unwrap_or(d.radius_points),
        radius_min: rec.radius_min.unwrap_or(d.radius_min),
        radius_max: rec.radius_max.unwrap_or(d.radius_max),
        threads: threads.or(rec.threads),
        strict: rec.strict.unwrap_or(d.strict),
    };
    if opts.m_points == 0 || opts.radius_points < 2 || !(opts.radius_min > 0.0 && opts.radius_min < opts.radius_max) {
        return Err(Failure::Config("field `search`: need m_points ≥ 1, radius_points ≥ 2 and 0 < radius_min < radius_max".into()));
    }
    match certify::search_certificate(&lp, &opts) {
        Some(cert) => output::emit(out, &output::to_json(&cert)),
        None => {
            output::emit(out, "\"none\"\n")?;
            Err(Failure::NoneFound)
        }
    }
}

#[derive(Serialize)]
struct SolveSummary {
    #[serde(rename = "N")]
    n: usize,
    iterations: usize,
    converged: bool,
    polished: bool,
    method: solve::Method,
    sup_residual: f64,
    bc_mismatch: f64,
    min_x: f64,
    max_x: f64,
    mean_x: f64,
}

fn solve_opts(loaded: &Loaded, n: Option<usize>) -> SolveOpts {
    let mut opts = loaded.solve.clone();
    if let Some(n) = n {
        opts.n = n;
    }
    opts
}

fn run_solve(loaded: &Loaded, n: Option<usize>, csv: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
    let gp = loaded.problem.general();
    let sol = solve::solve_periodic(&gp, &solve_opts(loaded, n))?;
    if let Some(path) = csv {
        let text = match loaded.problem.liebau() {
            Some(lp) => {
                let u = pump::x_to_u(&sol, lp.mu())?;
                output::csv_table(&["t", "x", "u"], &[&sol.nodes, &sol.values, &u.values])
            }
            None => output::csv_table(&["t", "x"], &[&sol.nodes, &sol.values]),
        };
        output::emit(Some(path), &text)?;
    }
    let summary = SolveSummary {
        n: sol.len(),
        iterations: sol.iterations,
        converged: sol.converged,
        polished: sol.polished,
        method: sol.method,
        sup_residual: sol.sup_residual,
        bc_mismatch: sol.bc_mismatch,
        min_x: sol.min(),
        max_x: sol.max(),
        mean_x: sol.mean(),
    };
    output::emit(out, &output::to_json(&summary))?;
    if sol.converged {
        Ok(())
    } else {
        Err(Failure::NotConverged(format!("stopped after {} iterations", sol.iterations)))
    }
}

/// Reads a solution CSV on the uniform grid of period `period`; returns the `u` trace.
fn read_solution(path: &Path, period: f64, mu: f64) -> Result<GridSolution, Failure> {
    let bad = |msg: String| Failure::Config(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| header.iter().position(|h| h.trim() == name);
    let t_col = col("t").ok_or_else(|| bad("missing column `t`".into()))?;
    let (v_col, is_u) = match (col("u"), col("x")) {
        (Some(c), _) => (c, true),
        (None, Some(c)) => (c, false),
        _ => return Err(bad("need a column `u` or `x`".into())),
    };
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let line = i + 2;
        let num = |c: usize| -> Result<f64, Failure> {
            let cell = rec.get(c).ok_or_else(|| bad(format!("line {line}: missing cell")))?;
            cell.trim().parse().map_err(|_| bad(format!("line {line}: `{cell}` is not a number")))
        };
        ts.push(num(t_col)?);
        vs.push(num(v_col)?);
    }
    if vs.len() < 4 {
        return Err(bad(format!("need at least 4 rows, got {}", vs.len())));
    }
    let n = vs.len();
    for (i, &t) in ts.iter().enumerate() {
        let expect = period * i as f64 / n as f64;
        if (t - expect).abs() > 1e-9 * period {
            return Err(bad(format!("line {}: t = {t} is off the uniform grid (expected {expect})", i + 2)));
        }
    }
    let grid = GridSolution::from_values(period, vs);
    if is_u {
        let mut u = grid;
        u.quantity = solve::Quantity::PipeLevel;
        Ok(u)
    } else {
        Ok(pump::x_to_u(&grid, mu)?)
    }
}

fn run_pump(loaded: &Loaded, input: Option<&Path>, n: Option<usize>, out: Option<&Path>) -> Result<(), Failure> {
    let lp = liebau_only(loaded, "pump")?;
    let u = match input {
        Some(path) => read_solution(path, lp.period(), lp.mu())?,
        None => {
            let sol = solve::solve_periodic(&lp.regularize(), &solve_opts(loaded, n))?;
            pump::x_to_u(&sol, lp.mu())?
        }
    };
    let report = pump::pump_report(&lp, &u)?;
    output::emit(out, &output::to_json(&report))
}

#[derive(Serialize)]
struct VerifyRow {
    id: u32,
    title: &'static str,
    passed: bool,
    details: Vec<String>,
}

fn run_verify(out: Option<&Path>) -> Result<(), Failure> {
    let results = regression::run_all();
    for r in &results {
        println!("{:>3}  {}  {}", r.id, if r.passed { "PASS" } else { "FAIL" }, r.title);
        for d in &r.details {
            println!("           {d}");
        }
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} checks passed", results.len());
    if let Some(path) = out {
        let rows: Vec<VerifyRow> = results
            .iter()
            .map(|r| VerifyRow { id: r.id, title: r.title, passed: r.passed, details: r.details.clone() })
            .collect();
        output::emit(Some(path), &output::to_json(&rows))?;
    }
    if passed == results.len() {
        Ok(())
    } else {
        Err(Failure::CertFail)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Greens { a, m, period, samples, csv, out } => {
            run_greens(a, m, period, samples, csv.as_deref(), out.as_deref())
        }
        Command::Certify { source, theorem, m, kappa, r1, r2, out } => {
            run_certify(&load(&source)?, theorem, [m, kappa, r1, r2], out.as_deref())
        }
        Command::Search { source, theorem, threads, out } => run_search(&load(&source)?, theorem, threads, out.as_deref()),
        Command::Solve { source, n, csv, out } => run_solve(&load(&source)?, n, csv.as_deref(), out.as_deref()),
        Command::Pump { source, input, n, out } => run_pump(&load(&source)?, input.as_deref(), n, out.as_deref()),
        Command::Verify { out } => run_verify(out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Io(msg) | Failure::Internal(msg) => eprintln!("error: {msg}"),
                Failure::Config(msg) => eprintln!("config error: {msg}"),
                Failure::NotConverged(msg) => eprintln!("not converged: {msg}"),
                Failure::CertFail => eprintln!("verdict: fail"),
                Failure::Inapplicable => eprintln!("verdict: inapplicable"),
                Failure::NoneFound => eprintln!("no certificate found"),
            }
            ExitCode::from(f.code())
        }
    }
}
