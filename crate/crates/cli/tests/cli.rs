use std::path::Path;
use std::process::{Command, Output};

use liebau_core::presets;
use serde_json::{json, Value};

fn liebau(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liebau")).args(args).output().expect("binary runs")
}

fn liebau_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liebau")).args(args).env(key, val).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn trapezoid_config() -> Value {
    json!({
        "problem": {
            "kind": "liebau",
            "T": 1.0,
            "a": 1.6,
            "mu": 0.01,
            "c": 0.005,
            "e": serde_json::to_value(presets::trapezoid()).unwrap()
        },
        "certify": { "theorem": "thm44", "m": 0.7, "kappa": 2200.0, "r1": 25.0, "r2": 1e4 }
    })
}

#[test]
fn greens_constants_and_samples() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("k.csv");
    let o = liebau(&["greens", "-a", "1.6", "-m", "0.7", "-T", "1", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    assert!((num(&v["c_m"]) - 0.94144).abs() < 1e-5);
    assert!((num(&v["K0"]) - 1.96026).abs() < 1e-5);
    for key in ["a", "m", "T", "case", "Kmin", "Kmax", "m_max"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "tau,K");
    assert_eq!(lines.len(), 258);
    let k_at = |l: &str| l.split(',').nth(1).unwrap().parse::<f64>().unwrap();
    assert_eq!(k_at(lines[1]), k_at(lines[257]));
}

#[test]
fn greens_rejects_shift_outside_window() {
    let o = liebau(&["greens", "-a", "1.6", "-m", "5", "-T", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn certify_trapezoid_preset_passes_with_published_tuple() {
    let o = liebau(&["certify", "--preset", "example-4.6"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    assert_eq!(v["verdict"], "Pass");
    assert_eq!(v["theorem"], "Thm44");
    assert_eq!(num(&v["params"]["m"]), 0.7);
    assert_eq!(num(&v["params"]["kappa"]), 2200.0);
    assert_eq!(num(&v["params"]["r1"]), 25.0);
    assert_eq!(num(&v["params"]["r2"]), 1e4);
    for c in v["conditions"].as_array().unwrap() {
        for key in ["name", "lhs", "rhs", "margin"] {
            assert!(c.get(key).is_some());
        }
    }
}

#[test]
fn certify_exit_codes_follow_verdicts() {
    let fail = liebau(&["certify", "--preset", "example-4.6", "--kappa", "100"]);
    assert_eq!(code(&fail), 3, "{}", String::from_utf8_lossy(&fail.stdout));
    assert_eq!(stdout_json(&fail)["verdict"], "Fail");
    // The trapezoid forcing changes sign, so the positive-forcing theorem does not apply.
    let inapp = liebau(&["certify", "--preset", "example-4.6", "--theorem", "thm47"]);
    assert_eq!(code(&inapp), 4);
    assert_eq!(stdout_json(&inapp)["verdict"], "Inapplicable");
}

#[test]
fn config_matches_preset_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "c.json", &trapezoid_config());
    let a = liebau(&["certify", "--config", &path]);
    let b = liebau(&["certify", "--preset", "example-4.6"]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let out = dir.path().join(format!("{tag}.json"));
        let o = liebau(&[
            "solve",
            "--preset",
            "example-4.8-cubic",
            "--csv",
            csv.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert!(o.stdout.is_empty());
        (std::fs::read(csv).unwrap(), std::fs::read(out).unwrap())
    };
    assert_eq!(run("one"), run("two"));
}

#[test]
fn search_is_thread_count_independent() {
    let one = liebau_env(&["search", "--preset", "example-4.8"], "LIEBAU_THREADS", "1");
    let four = liebau_env(&["search", "--preset", "example-4.8"], "LIEBAU_THREADS", "4");
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(stdout_json(&one)["verdict"], "Pass");
}

#[test]
fn search_reports_none() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "problem": {
            "kind": "liebau", "a": 1.0, "b": 2.0, "c": 1.0,
            "e": { "period": 1.0, "kind": "constant", "value": -1.0 }
        }
    });
    let path = write_config(dir.path(), "neg.json", &cfg);
    let o = liebau(&["search", "--config", &path]);
    assert_eq!(code(&o), 5);
    assert_eq!(stdout_json(&o), json!("none"));
}

#[test]
fn solve_cosine_preset() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    let o = liebau(&["solve", "--preset", "example-4.8-cosine", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = stdout_json(&o);
    // Leading-order mean: the constant solution for the mean forcing.
    let anchor = (1.54215f64 / 1.49).powi(100);
    assert!((num(&v["mean_x"]) / anchor - 1.0).abs() < 1e-3, "mean {}", v["mean_x"]);
    assert!(num(&v["max_x"]) < presets::EXAMPLE_48_BOUND);
    assert_eq!(v["N"], 512);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,x,u\n"));
    assert_eq!(text.lines().count(), 513);
}

#[test]
fn solve_reports_nonconvergence() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = trapezoid_config();
    cfg["solve"] = json!({ "max_iter": 1, "guess": { "kind": "constant", "value": 50.0 } });
    let path = write_config(dir.path(), "c.json", &cfg);
    let o = liebau(&["solve", "--config", &path]);
    assert_eq!(code(&o), 6, "{}", stderr(&o));
}

#[test]
fn physical_config_reproduces_exact_pumping() {
    // g V0/Aτ − p/ρ with V0 = 4 equals the forcing of the exact family.
    let dir = tempfile::tempdir().unwrap();
    let t = std::f64::consts::TAU;
    let cfg = json!({
        "problem": {
            "kind": "physical", "T": t,
            "r0": 0.0, "rho": 1.0, "zeta": 2.0, "g": 1.0, "a_tau": 1.0, "a_pi": 0.1, "v0": 4.0,
            "p": { "period": t, "kind": "trig_poly", "offset": 3.3, "terms": [
                { "amplitude": 1.9, "harmonic": 1 },
                { "amplitude": 1.5, "harmonic": 2 }
            ] }
        },
        "solve": { "n": 256, "guess": { "kind": "bracket", "lo": 1.0, "hi": 343.0 } }
    });
    let path = write_config(dir.path(), "phys.json", &cfg);
    let csv = dir.path().join("sol.csv");
    let o = liebau(&["solve", "--config", &path, "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let p = liebau(&["pump", "--config", &path, "--input", csv.to_str().unwrap()]);
    assert_eq!(code(&p), 0, "{}", stderr(&p));
    let v = stdout_json(&p);
    assert!((num(&v["delta"]) - 5.0).abs() < 1e-8, "delta {}", v["delta"]);
    assert!((num(&v["u_mean"]) - 2.0).abs() < 1e-8);
    assert_eq!(v["pumping_detected"], true);
}

#[test]
fn pump_rejects_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "t,u\n0,2\n0.25,2\n0.5,oops\n0.75,2\n").unwrap();
    let o = liebau(&["pump", "--preset", "example-4.8", "--input", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn malformed_config_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"problem\": {\n    \"kind\": \"liebau\",\n    \"a\": oops\n  }\n}\n").unwrap();
    let o = liebau(&["certify", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn unknown_and_missing_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = trapezoid_config();
    cfg["extra"] = json!(1);
    let path = write_config(dir.path(), "extra.json", &cfg);
    let o = liebau(&["certify", "--config", &path]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("extra"), "{}", stderr(&o));

    let mut cfg = trapezoid_config();
    cfg["problem"].as_object_mut().unwrap().remove("c");
    let path = write_config(dir.path(), "missing.json", &cfg);
    let o = liebau(&["certify", "--config", &path]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("`c`"), "{}", stderr(&o));
}

#[test]
fn radii_out_of_order_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = trapezoid_config();
    cfg["certify"]["r1"] = json!(1e4);
    cfg["certify"]["r2"] = json!(25.0);
    let path = write_config(dir.path(), "r.json", &cfg);
    let o = liebau(&["certify", "--config", &path]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("certify.r2"), "{}", stderr(&o));
    let o = liebau(&["certify", "--preset", "example-4.6", "--r1", "20000"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn period_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = trapezoid_config();
    cfg["problem"]["T"] = json!(2.0);
    let path = write_config(dir.path(), "t.json", &cfg);
    let o = liebau(&["certify", "--config", &path]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("problem.e"), "{}", stderr(&o));
}

#[test]
fn general_problem_certifies_with_default_comparisons() {
    let dir = tempfile::tempdir().unwrap();
    let gp = presets::example_46().regularize();
    let cfg = json!({
        "problem": {
            "kind": "general", "T": 1.0, "a": gp.a(), "alpha": gp.alpha(), "beta": gp.beta(),
            "r": serde_json::to_value(gp.r()).unwrap(),
            "s": serde_json::to_value(gp.s()).unwrap()
        },
        "certify": { "m": 0.7, "r1": 25.0, "r2": 1e4 }
    });
    let path = write_config(dir.path(), "g.json", &cfg);
    let o = liebau(&["certify", "--config", &path]);
    assert!(matches!(code(&o), 0 | 3), "{}", stderr(&o));
    assert_eq!(stdout_json(&o)["theorem"], "Thm41");
}

#[test]
fn unknown_preset_and_missing_source() {
    assert_eq!(code(&liebau(&["solve", "--preset", "nope"])), 2);
    assert_eq!(code(&liebau(&["solve"])), 2);
    assert_eq!(code(&liebau(&["certify", "--preset", "example-4.8", "--v0", "5"])), 2);
}

#[test]
fn verify_exit_code_tracks_table() {
    let o = liebau(&["verify"]);
    let text = String::from_utf8_lossy(&o.stdout);
    let rows: Vec<&str> = text.lines().filter(|l| l.contains("  PASS  ") || l.contains("  FAIL  ")).collect();
    assert_eq!(rows.len(), 11);
    let all_pass = rows.iter().all(|l| l.contains("  PASS  "));
    assert_eq!(code(&o), if all_pass { 0 } else { 3 });
}
