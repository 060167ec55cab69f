//! Command-line behavior: output formats and exit codes.

use serde_json::Value;
use stacklab::cli::{run, EXIT_CERTIFICATION, EXIT_DEGENERATE, EXIT_OK, EXIT_USAGE};

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("stacklab").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

const PN: [&str; 10] = ["--game", "pn", "--r0", "2", "--q0", "1", "--r", "2", "--q", "1"];
const MAJ: [&str; 16] =
    ["--game", "maj", "--r0", "2", "--q0", "1", "--qhat0", "1", "--rM", "1", "--qM", "1", "--r", "2", "--q", "1"];

fn with(base: &[&'static str], extra: &[&'static str]) -> Vec<&'static str> {
    base.iter().chain(extra).copied().collect()
}

#[test]
fn solve_pn_reports_team_coefficients_and_gain() {
    let (code, out, _) = invoke(&with(&["solve"], &with(&PN, &["--n", "2"])));
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["params"]["beta"].as_f64().unwrap() + 2.0 / 3.0).abs() < 1e-12);
    assert!((v["gain"].as_f64().unwrap() + 7.0).abs() < 1e-12);
    assert!(v["max_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn solve_maj_both_targets_includes_loss() {
    let (code, out, _) = invoke(&with(&["solve"], &with(&MAJ, &["--n", "3", "--target", "both"])));
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["loss"]["loss"].as_f64().unwrap() > 0.0);
    assert!(v["leader_optimal"].is_object());
}

#[test]
fn spec_file_round_trip_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    std::fs::write(&path, r#"{"r0": 2, "q0": 1, "r": 2, "q": 1, "n": 2}"#).unwrap();
    let (code, from_file, _) = invoke(&["solve", "--game", "pn", "--spec", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let (_, from_flags, _) = invoke(&with(&["solve"], &with(&PN, &["--n", "2"])));
    assert_eq!(from_file, from_flags);

    let out = dir.path().join("result.json");
    let (code, printed, _) =
        invoke(&["solve", "--game", "pn", "--spec", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(printed.is_empty());
    assert_eq!(std::fs::read_to_string(out).unwrap(), from_flags);
}

#[test]
fn malformed_spec_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    std::fs::write(&path, "{ not json").unwrap();
    let (code, _, err) = invoke(&["solve", "--game", "pn", "--spec", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("spec.json"));
}

#[test]
fn loss_sweep_is_monotone() {
    let (code, out, _) = invoke(&with(&["sweep"], &with(&MAJ, &["--curve", "loss", "--grid", "1..20"])));
    assert_eq!(code, EXIT_OK);
    let rows: Vec<Vec<f64>> = out.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1] && w[1][2] >= w[0][2]));
    assert!(rows.iter().all(|r| r[3] > 0.0));
}

#[test]
fn sweep_json_has_one_object_per_row() {
    let (code, out, _) = invoke(&with(&["sweep"], &with(&PN, &["--grid", "10,100", "--format", "json"])));
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[1]["n"], 100);
}

#[test]
fn verify_is_deterministic_for_a_fixed_seed() {
    let args = with(&["verify"], &with(&PN, &["--n", "3", "--seed", "7", "--samples", "20000"]));
    let (code, first, _) = invoke(&args);
    assert_eq!(code, EXIT_OK);
    let (_, second, _) = invoke(&args);
    assert_eq!(first, second);
    let v: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["verdict"]["pass"], true);
    assert_eq!(v["seed"], 7);
}

#[test]
fn verify_without_gain_fails_certification() {
    let (code, out, _) = invoke(&with(&["verify"], &with(&MAJ, &["--n", "5", "--zero-gain"])));
    assert_eq!(code, EXIT_CERTIFICATION);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["per_player_improvement"]["major"].as_f64().unwrap() > 1e-3);
}

#[test]
fn limits_for_all_followers_have_no_gain() {
    let (code, out, _) = invoke(&with(&["limits"], &PN));
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v.get("gain").is_none());
    assert!((v["beta_inf"].as_f64().unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn degenerate_and_invalid_inputs_map_to_exit_codes() {
    let zero_q0 = [
        "solve",
        "--game",
        "maj",
        "--r0",
        "2",
        "--q0",
        "0",
        "--qhat0",
        "1",
        "--rM",
        "1",
        "--qM",
        "1",
        "--r",
        "2",
        "--q",
        "1",
        "--n",
        "3",
        "--target",
        "leader-optimal",
    ];
    let (code, _, err) = invoke(&zero_q0);
    assert_eq!(code, EXIT_DEGENERATE);
    assert!(err.contains("2*q0"));

    let (code, _, err) = invoke(&with(&["solve"], &PN));
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("--n"));

    let (code, _, _) =
        invoke(&["solve", "--game", "pn", "--r0", "-1", "--q0", "1", "--r", "2", "--q", "1", "--n", "2"]);
    assert_eq!(code, EXIT_USAGE);

    let (code, _, _) = invoke(&["frobnicate"]);
    assert_eq!(code, EXIT_USAGE);

    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("solve"));
}

#[test]
fn zero_loss_at_one_minor_has_no_incentive() {
    let (code, _, _) =
        invoke(&["solve", "--game", "zero-loss", "--r0", "2", "--q0", "1", "--rM", "1", "--qM", "1", "--n", "1"]);
    assert_eq!(code, EXIT_DEGENERATE);
    let (code, out, _) = invoke(&[
        "sweep",
        "--game",
        "zero-loss",
        "--r0",
        "2",
        "--q0",
        "1",
        "--rM",
        "1",
        "--qM",
        "1",
        "--curve",
        "loss",
        "--grid",
        "1,5,50",
    ]);
    assert_eq!(code, EXIT_OK);
    for line in out.lines().skip(1) {
        let loss: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(loss.abs() <= 1e-10);
    }
}
