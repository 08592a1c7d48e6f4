use liebau_core::certify::{self, Verdict};
use liebau_core::funcspec::PeriodicFunction;
use liebau_core::greens::{self, GreensKernel};
use liebau_core::presets;
use liebau_core::problem::{GeneralProblem, LiebauProblem, Truncation};
use liebau_core::pump;
use liebau_core::solve::{self, GridSolution, SolveOpts};
use proptest::prelude::*;

fn trig_strategy() -> impl Strategy<Value = PeriodicFunction> {
    (
        0.2f64..5.0,
        -2.0f64..2.0,
        prop::collection::vec((-1.0f64..1.0, 1u32..5, 0.0f64..6.3), 1..4),
    )
        .prop_map(|(t, off, terms)| PeriodicFunction::trig(t, off, &terms).unwrap())
}

fn pwl_strategy() -> impl Strategy<Value = PeriodicFunction> {
    (0.2f64..5.0, prop::collection::vec((0.05f64..1.0, -2.0f64..2.0), 1..6), -2.0f64..2.0).prop_map(
        |(t, steps, v0)| {
            let total: f64 = steps.iter().map(|s| s.0).sum::<f64>() + 0.05;
            let mut pts = vec![(0.0, v0)];
            let mut acc = 0.0;
            for (dt, v) in steps {
                acc += dt;
                pts.push((acc / total * t, v));
            }
            pts.push((t, v0));
            PeriodicFunction::piecewise_linear(t, &pts).unwrap()
        },
    )
}

fn function_strategy() -> impl Strategy<Value = PeriodicFunction> {
    prop_oneof![trig_strategy(), pwl_strategy()]
}

/// `(a, m, T)` with `m` strictly inside `(0, m_max)`.
fn kernel_params() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.0f64..4.0, 0.01f64..0.99, 0.3f64..4.0).prop_map(|(a, frac, t)| (a, frac * greens::m_max(a, t), t))
}

fn sample_max_min(f: &PeriodicFunction, n: usize) -> (f64, f64) {
    let t = f.period();
    (0..n).map(|i| f.eval(i as f64 * t / n as f64)).fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), v| {
        (hi.max(v), lo.min(v))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn functions_are_periodic(f in function_strategy(), t in -10.0f64..10.0, k in -3i32..4) {
        let shifted = f.eval(t + k as f64 * f.period());
        prop_assert!((shifted - f.eval(t)).abs() <= 1e-9 * (1.0 + f.eval(t).abs()));
    }

    #[test]
    fn extrema_bracket_samples(f in function_strategy()) {
        let ext = f.extrema();
        let (hi, lo) = sample_max_min(&f, 997);
        prop_assert!(ext.max >= hi - 1e-9 && ext.min <= lo + 1e-9);
        // The reported extrema are attained.
        prop_assert!((f.eval(ext.argmax) - ext.max).abs() <= 1e-9 * (1.0 + ext.max.abs()));
        prop_assert!((f.eval(ext.argmin) - ext.min).abs() <= 1e-9 * (1.0 + ext.min.abs()));
    }

    #[test]
    fn positive_part_mean_dominates(f in function_strategy()) {
        let pos = f.positive_part();
        prop_assert!(pos.mean() >= f.mean().max(0.0) - 1e-10);
        prop_assert!(pos.mean() <= f.extrema().max.max(0.0) + 1e-10);
    }

    #[test]
    fn trig_mean_is_offset(t in 0.2f64..5.0, off in -3.0f64..3.0, amp in -2.0f64..2.0, k in 1u32..6) {
        let f = PeriodicFunction::trig(t, off, &[(amp, k, 0.3)]).unwrap();
        prop_assert!((f.mean() - off).abs() < 1e-12 * (1.0 + amp.abs()));
    }

    #[test]
    fn cone_constant_in_unit_interval((a, m, t) in kernel_params()) {
        let k = GreensKernel::build(a, m, t).unwrap();
        prop_assert!(k.cone_constant() > 0.0 && k.cone_constant() < 1.0);
        prop_assert!(k.kmin() > 0.0);
        prop_assert!((k.diagonal() - k.kmin()).abs() <= 1e-10 * k.diagonal());
    }

    #[test]
    fn rows_integrate_to_inverse_square((a, m, t) in kernel_params(), s in 0.0f64..1.0) {
        let k = GreensKernel::build(a, m, t).unwrap();
        let one = PeriodicFunction::constant(t, 1.0).unwrap();
        let row = k.convolve(&one, s * t, 1024);
        prop_assert!((row * m * m - 1.0).abs() < 1e-8);
    }

    #[test]
    fn cone_chain_holds((a, m, t) in kernel_params()) {
        let k = GreensKernel::build(a, m, t).unwrap();
        let k0 = k.kernel_at(0.0);
        for i in 0..64 {
            for j in 0..64 {
                let g = k.green_at(i as f64 * t / 64.0, j as f64 * t / 64.0);
                prop_assert!(g >= k0 * (1.0 - 1e-10));
                prop_assert!(k0 >= k.cone_constant() * g * (1.0 - 1e-10));
            }
        }
    }

    #[test]
    fn regularize_round_trip(a in 0.0f64..2.0, mu in 0.01f64..0.49, c in 0.01f64..5.0, e in function_strategy()) {
        let lp = LiebauProblem::with_mu(a, mu, c, e).unwrap();
        let back = lp.regularize().deregularize().unwrap();
        prop_assert!((back.a() - lp.a()).abs() < 1e-14);
        prop_assert!((back.mu() - lp.mu()).abs() < 1e-12);
        prop_assert!((back.c() - lp.c()).abs() < 1e-12 * lp.c());
        for i in 0..16 {
            let t = i as f64 * lp.period() / 16.0;
            prop_assert!((back.e().eval(t) - lp.e().eval(t)).abs() < 1e-12 * (1.0 + lp.e().eval(t).abs()));
        }
    }

    #[test]
    fn shift_only_adds_linear_term(m1 in 0.0f64..3.0, m2 in 0.0f64..3.0, x in 1e-3f64..1e3, t in 0.0f64..1.0) {
        let gp = presets::example_46().regularize();
        let d = gp.f_m(m1, t, x).unwrap() - m1 * m1 * x - (gp.f_m(m2, t, x).unwrap() - m2 * m2 * x);
        prop_assert!(d.abs() <= 1e-10 * (1.0 + gp.f_m(m1, t, x).unwrap().abs()));
    }

    #[test]
    fn truncation_nonnegative_and_continuous(x in 0.0f64..2e4, t in 0.0f64..1.0) {
        let gp = presets::example_46().regularize();
        let k = GreensKernel::build(gp.a(), 0.7, 1.0).unwrap();
        let tr = Truncation::new(0.7, k.cone_constant(), 25.0, 1e4).unwrap();
        let v = gp.f_m_truncated(&tr, t, x).unwrap();
        prop_assert!(v >= 0.0);
        let h = 1e-6 * (1.0 + x);
        let w = gp.f_m_truncated(&tr, t, x + h).unwrap();
        prop_assert!((w - v).abs() < 1e-2 * (1.0 + v));
    }

    #[test]
    fn thm44_kappa_inside_interval_when_passing(frac in 0.0f64..1.0) {
        let lp = presets::example_46();
        let (lo, hi) = certify::kappa_interval(&lp, 0.7, 25.0).unwrap();
        prop_assume!(lo <= hi);
        let kappa = lo + frac * (hi - lo);
        let cert = certify::check_thm44(&lp, 0.7, kappa, 25.0, 1e4).unwrap();
        prop_assert_eq!(cert.verdict, Verdict::Pass);
    }

    #[test]
    fn raising_upper_forcing_cannot_help(bump in 1e-4f64..0.05) {
        // Larger e^* tightens the upper-radius inequality.
        let base = presets::example_48_cosine();
        let e = base.e().plus(&PeriodicFunction::trig(1.0, 0.0, &[(bump, 1, 0.0)]).unwrap()).unwrap();
        let lp = LiebauProblem::with_mu(base.a(), base.mu(), base.c(), e).unwrap();
        let m = presets::EXAMPLE_48_M;
        let a = certify::check_thm47(&base, m).unwrap();
        let b = certify::check_thm47(&lp, m).unwrap();
        if let (Some(ca), Some(cb)) = (a.condition("C6"), b.condition("C6")) {
            prop_assert!(cb.margin <= ca.margin + 1e-12);
        }
        prop_assert!(!(b.passed() && !a.passed()));
    }

    #[test]
    fn pipe_transform_round_trip(vals in prop::collection::vec(1e-6f64..1e6, 2..40), mu in 0.01f64..0.49) {
        let x = GridSolution::from_values(1.0, vals.clone());
        let back = pump::u_to_x(&pump::x_to_u(&x, mu).unwrap(), mu).unwrap();
        for (a, b) in back.values.iter().zip(&vals) {
            prop_assert!((a - b).abs() <= 1e-9 * b);
        }
    }

    #[test]
    fn propst_identity_holds(v0 in 3.1f64..20.0) {
        let lp = presets::propst(v0);
        let n = 128;
        let vals: Vec<f64> = (0..n).map(|i| v0 - 2.0 + (i as f64 * std::f64::consts::TAU / n as f64).cos()).collect();
        let u = GridSolution::from_values(std::f64::consts::TAU, vals);
        let rep = pump::pump_report(&lp, &u).unwrap();
        prop_assert!(rep.identity_residual < 1e-10 * v0);
        prop_assert!((rep.delta - 5.0).abs() < 1e-10 * v0);
        prop_assert!(rep.pumping_detected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn linear_solve_matches_convolution((a, m, t) in kernel_params(), amp in -1.0f64..1.0, k in 1u32..3, off in -1.0f64..1.0) {
        let h = PeriodicFunction::trig(t, off, &[(amp, k, 0.4)]).unwrap();
        let kernel = GreensKernel::build(a, m, t).unwrap();
        let err = |n: usize| {
            let x = solve::solve_linear_shifted(a, m, &h, n);
            (0..n)
                .map(|i| (x[i] - kernel.convolve(&h, i as f64 * t / n as f64, 1024)).abs())
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (err(64), err(256));
        prop_assert!(fine <= (coarse / 16.0 * 1.5).max(1e-8), "coarse {coarse:e} fine {fine:e}");
    }

    #[test]
    fn picard_stays_in_band(level in 100.0f64..9000.0, wiggle in -50.0f64..50.0) {
        let gp = presets::example_46().regularize();
        let (m, _, r1, r2) = presets::EXAMPLE_46_TUPLE;
        let n = 64;
        let x0: Vec<f64> = (0..n).map(|i| level + wiggle * (i as f64 * std::f64::consts::TAU / n as f64).sin()).collect();
        let trace = solve::picard_iterate(&gp, m, r1, r2, &x0, 3, 0.0).unwrap();
        for it in &trace.iterates[1..] {
            prop_assert!(it.iter().all(|&v| v >= 0.0 && v <= r2 * (1.0 + 1e-9)));
        }
    }

    #[test]
    fn certified_solutions_stay_localized(amp in 0.0f64..0.002) {
        let e = PeriodicFunction::trig(1.0, 1.54215, &[(amp, 1, 0.0)]).unwrap();
        let lp = LiebauProblem::with_mu(1.6, 0.01, 1.49, e).unwrap();
        let cert = certify::check_thm47(&lp, presets::EXAMPLE_48_M).unwrap();
        prop_assume!(cert.passed());
        let gp: GeneralProblem = lp.regularize();
        let opts = SolveOpts { n: 128, ..SolveOpts::default() };
        let sol = solve::solve_periodic(&gp, &opts).unwrap();
        let r1 = cert.params.r1;
        let r2 = cert.params.r2;
        let flags = solve::cone_and_localization(&sol.values, cert.c_m, r1, r2);
        prop_assert!(flags.in_cone && flags.above_lower && flags.below_upper);
    }
}
