//! Built-in problem instances.

use std::f64::consts::TAU;

use crate::funcspec::PeriodicFunction;
use crate::problem::LiebauProblem;
use crate::solve::InitialGuess;

/// Certificate tuple `(m, κ, R1, R2)` published for the trapezoid example.
pub const EXAMPLE_46_TUPLE: (f64, f64, f64, f64) = (0.7, 2200.0, 25.0, 1e4);
/// Shift used for the positive-forcing examples.
pub const EXAMPLE_48_M: f64 = 0.7;
/// Published upper bound on the positive-forcing solutions.
pub const EXAMPLE_48_BOUND: f64 = 38.0844;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Trapezoidal sign-changing forcing, `a = 1.6`, `μ = 0.01`, `c = 0.005`, `T = 1`.
    Example46,
    /// Positive forcing with `e_* = 1.54`, `e^* = 1.544247`, `a = 1.6`, `μ = 0.01`, `c = 1.49`.
    Example48,
    /// `e = 1.54215 + 0.002097 cos 2πt`.
    Example48Cosine,
    /// `e = 1.54215 − 0.02 (t − 3t² + 2t³)`.
    Example48Cubic,
    /// `e = 0.1 V0 + 1.8 + (2.1 − V0) cos t − 3 cos² t`, `a = 0`, `b = 2`, `c = 0.1`, `T = 2π`,
    /// with exact solution `u = V0 − 2 + cos t`.
    Propst,
}

impl Preset {
    pub const ALL: [Preset; 5] =
        [Preset::Example46, Preset::Example48, Preset::Example48Cosine, Preset::Example48Cubic, Preset::Propst];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Example46 => "example-4.6",
            Preset::Example48 => "example-4.8",
            Preset::Example48Cosine => "example-4.8-cosine",
            Preset::Example48Cubic => "example-4.8-cubic",
            Preset::Propst => "propst",
        }
    }

    pub fn from_name(name: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Problem data; `v0` applies to the Propst family only.
    pub fn problem(self, v0: Option<f64>) -> LiebauProblem {
        match self {
            Preset::Example46 => example_46(),
            Preset::Example48 => example_48(),
            Preset::Example48Cosine => example_48_cosine(),
            Preset::Example48Cubic => example_48_cubic(),
            Preset::Propst => propst(v0.unwrap_or(4.0)),
        }
    }

    /// Starting point that leads the solver to the documented solution.
    pub fn initial_guess(self) -> InitialGuess {
        match self {
            // The constant (ē/c)^{1/μ} = 343 converges to a second, larger solution.
            Preset::Propst => InitialGuess::Bracket { lo: 1.0, hi: 343.0 },
            _ => InitialGuess::Default,
        }
    }
}

pub fn trapezoid() -> PeriodicFunction {
    let (lo, hi, t1, t2) = (-0.00005, 0.00548239, 0.0005, 0.9995);
    PeriodicFunction::piecewise_linear(1.0, &[(0.0, lo), (t1, hi), (t2, hi), (1.0, lo)]).expect("valid table")
}

pub fn example_46() -> LiebauProblem {
    LiebauProblem::with_mu(1.6, 0.01, 0.005, trapezoid()).expect("valid constants")
}

pub fn example_48() -> LiebauProblem {
    let (lo, hi) = (1.54, 1.544247);
    let e = PeriodicFunction::trig(1.0, 0.5 * (lo + hi), &[(0.5 * (hi - lo), 1, 0.0)]).expect("valid");
    LiebauProblem::with_mu(1.6, 0.01, 1.49, e).expect("valid constants")
}

pub fn example_48_cosine() -> LiebauProblem {
    let e = PeriodicFunction::trig(1.0, 1.54215, &[(0.002097, 1, 0.0)]).expect("valid");
    LiebauProblem::with_mu(1.6, 0.01, 1.49, e).expect("valid constants")
}

pub fn example_48_cubic() -> LiebauProblem {
    let e = PeriodicFunction::poly(1.0, &[1.54215, -0.02, 0.06, -0.04]).expect("continuous");
    LiebauProblem::with_mu(1.6, 0.01, 1.49, e).expect("valid constants")
}

/// Constant forcing `e ≡ 1.54` with the positive-forcing constants.
pub fn example_48_constant() -> LiebauProblem {
    let e = PeriodicFunction::constant(1.0, 1.54).expect("valid");
    LiebauProblem::with_mu(1.6, 0.01, 1.49, e).expect("valid constants")
}

pub fn propst(v0: f64) -> LiebauProblem {
    // 0.1 V0 + 1.8 − 3cos²t = 0.1 V0 + 0.3 − 1.5 cos 2t
    let e = PeriodicFunction::trig(TAU, 0.1 * v0 + 0.3, &[(2.1 - v0, 1, 0.0), (-1.5, 2, 0.0)]).expect("valid");
    LiebauProblem::new(0.0, 2.0, 0.1, e).expect("valid constants")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(Preset::from_name(p.name()), Some(p));
        }
        assert_eq!(Preset::from_name("nope"), None);
    }

    #[test]
    fn propst_matches_formula() {
        let lp = propst(4.0);
        for i in 0..20 {
            let t = i as f64 * 0.33;
            let direct = 0.4 + 1.8 + (2.1 - 4.0) * t.cos() - 3.0 * t.cos().powi(2);
            assert!((lp.e().eval(t) - direct).abs() < 1e-14);
        }
        assert_eq!(lp.b(), 2.0);
    }

    #[test]
    fn example_48_extremes() {
        let ext = example_48().e().extrema();
        assert!((ext.min - 1.54).abs() < 1e-14);
        assert!((ext.max - 1.544247).abs() < 1e-14);
        let cub = example_48_cubic().e().extrema();
        // t − 3t² + 2t³ peaks at √3/18 on [0, 1].
        let swing = 0.02 * 3f64.sqrt() / 18.0;
        assert!((cub.min - (1.54215 - swing)).abs() < 1e-12 && (cub.max - (1.54215 + swing)).abs() < 1e-12);
    }
}
