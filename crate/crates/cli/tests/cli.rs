use std::path::Path;
use std::process::Command;

use kaonbell_cli::{exit, run_with, PARAMS_ENV};
use serde_json::Value;

fn run(args: &[&str], env: Option<&Path>) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("kaonbell").chain(args.iter().copied());
    let code = run_with(argv, env, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn binary_params_default_and_env_provenance() {
    let bin = env!("CARGO_BIN_EXE_kaonbell");
    let out = Command::new(bin)
        .arg("params")
        .env_remove(PARAMS_ENV)
        .output()
        .unwrap();
    assert!(out.status.success());
    let v = json(std::str::from_utf8(&out.stdout).unwrap());
    assert_eq!(v["gamma_s"], 1.0);
    assert_eq!(v["provenance"]["delta_m"], "default");

    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "env.cfg", "delta_m = 0.3\n");
    let out = Command::new(bin)
        .arg("params")
        .env(PARAMS_ENV, &cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let v = json(std::str::from_utf8(&out.stdout).unwrap());
    assert_eq!(v["delta_m"], 0.3);
    assert_eq!(v["provenance"]["delta_m"], format!("env:{}", cfg.display()));
    assert_eq!(v["provenance"]["gamma_s"], "default");
}

#[test]
fn binary_exit_statuses() {
    let bin = env!("CARGO_BIN_EXE_kaonbell");
    let status = |args: &[&str]| {
        Command::new(bin)
            .args(args)
            .env_remove(PARAMS_ENV)
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(status(&["frobnicate"]), Some(exit::USAGE.into()));
    assert_eq!(
        status(&["scan", "--from", "2"]),
        Some(exit::NO_VIOLATION.into())
    );
    assert_eq!(
        status(&["curve", "asymmetry", "--alpha", "0.5"]),
        Some(exit::ERROR.into())
    );
    assert_eq!(status(&["--version"]), Some(0));
}

#[test]
fn flag_overrides_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.cfg", "delta_m = 0.4\ngamma_l = 0.002\n");
    let (code, out, _) = run(
        &[
            "--params",
            cfg.to_str().unwrap(),
            "--delta-m",
            "0",
            "params",
        ],
        None,
    );
    assert_eq!(code, exit::OK);
    let v = json(&out);
    assert_eq!(v["delta_m"], 0.0);
    assert_eq!(v["provenance"]["delta_m"], "flag");
    assert_eq!(
        v["provenance"]["gamma_l"],
        format!("file:{}", cfg.display())
    );
}

#[test]
fn env_outranks_params_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "file.cfg", "delta_m = 0.4\n");
    let env = write(dir.path(), "env.cfg", "delta_m = 0.45\n");
    let (_, out, _) = run(&["--params", file.to_str().unwrap(), "params"], Some(&env));
    assert_eq!(json(&out)["delta_m"], 0.45);
}

#[test]
fn bad_params_are_errors() {
    let (code, _, err) = run(&["--gamma-l", "2", "params"], None);
    assert_eq!(code, exit::ERROR);
    assert!(err.starts_with("kaonbell: "), "{err}");
    let (code, _, _) = run(&["--params", "/nonexistent/k.cfg", "params"], None);
    assert_eq!(code, exit::ERROR);
}

#[test]
fn asymmetry_curve_csv() {
    let (code, out, _) = run(
        &[
            "curve",
            "asymmetry",
            "--alpha",
            "1.5",
            "--from",
            "0",
            "--to",
            "3",
            "--steps",
            "301",
        ],
        None,
    );
    assert_eq!(code, exit::OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "tau1,a_qm,a_lr_min,a_lr_max");
    assert_eq!(lines.len(), 302);
    assert!(lines[151].starts_with("1.5,0.873119115,"), "{}", lines[151]);
    assert!(!out.contains('\r'));
}

#[test]
fn curve_manifest_replays_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("chsh.csv");
    let (code, out, _) = run(
        &[
            "--delta-m",
            "0.5",
            "curve",
            "chsh",
            "--mode",
            "unren",
            "--p",
            "1",
            "--out",
            data.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code, exit::OK);
    assert!(out.is_empty());
    let manifest_path = dir.path().join("chsh.csv.manifest.json");
    let manifest = json(&std::fs::read_to_string(&manifest_path).unwrap());
    assert_eq!(manifest["params"]["delta_m"], 0.5);
    assert_eq!(manifest["provenance"]["delta_m"], "flag");
    assert_eq!(manifest["seed"], Value::Null);

    // the recorded replay command, run by hand
    let replay: Vec<String> = manifest["replay"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    let mut again = Vec::new();
    assert_eq!(
        run_with(&replay, None, &mut again, &mut Vec::new()),
        exit::OK
    );
    assert_eq!(again, std::fs::read(&data).unwrap());

    // and through the replay subcommand, which also checks the checksum
    let copy = dir.path().join("copy.csv");
    let (code, _, err) = run(
        &[
            "replay",
            manifest_path.to_str().unwrap(),
            "--out",
            copy.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code, exit::OK, "{err}");
    assert_eq!(std::fs::read(&copy).unwrap(), std::fs::read(&data).unwrap());
}

#[test]
fn replay_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("s.json");
    let manifest = dir.path().join("m.json");
    let (code, _, _) = run(
        &[
            "scan",
            "--out",
            data.to_str().unwrap(),
            "--manifest",
            manifest.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code, exit::OK);
    let mut m = json(&std::fs::read_to_string(&manifest).unwrap());
    m["output"]["sha256"] = Value::String("00".repeat(32));
    std::fs::write(&manifest, m.to_string()).unwrap();
    let (code, _, err) = run(&["replay", manifest.to_str().unwrap()], None);
    assert_eq!(code, exit::ERROR);
    assert!(err.contains("checksum"), "{err}");
}

#[test]
fn params_manifest_keeps_env_source() {
    let dir = tempfile::tempdir().unwrap();
    let env = write(dir.path(), "env.cfg", "gamma_s = 1.5\n");
    let data = dir.path().join("params.json");
    let (code, _, _) = run(&["params", "--out", data.to_str().unwrap()], Some(&env));
    assert_eq!(code, exit::OK);
    let manifest = dir.path().join("params.json.manifest.json");
    // replay without the environment still sees the recorded file
    let (code, out, err) = run(&["replay", manifest.to_str().unwrap()], None);
    assert_eq!(code, exit::OK, "{err}");
    assert_eq!(out.as_bytes(), std::fs::read(&data).unwrap());
    assert!(out.contains("env:"));
}

#[test]
fn scan_reports() {
    let (code, out, _) = run(&["scan"], None);
    assert_eq!(code, exit::OK);
    let v = json(&out);
    let tau = v["tau_star"].as_f64().unwrap();
    assert!((tau - 0.81).abs() < 0.01, "{tau}");
    assert!((v["s_star"].as_f64().unwrap() + 1.087).abs() < 1e-3);
    assert_eq!(v["p_min_locality"], 5.45);
    assert_eq!(v["example_schedule"]["p"], 6.0);
    assert_eq!(v["example_schedule"]["locality"]["verdict"], "ok");
    let t3 = v["example_schedule"]["tau3"].as_f64().unwrap();
    assert!((t3 - 7.0 * tau).abs() < 1e-12);

    let (code, out, err) = run(&["scan", "--from", "2", "--to", "4"], None);
    assert_eq!(code, exit::NO_VIOLATION);
    let v = json(&out);
    assert_eq!(v["violation"], false);
    assert!(v["s_star"].as_f64().unwrap() > -1.0);
    assert!(err.contains("no violation"));

    let (code, out, _) = run(&["scan", "--stable"], None);
    assert_eq!(code, exit::OK);
    assert!((json(&out)["s_star"].as_f64().unwrap() + 1.207_106_78).abs() < 1e-6);
}

#[test]
fn simulate_is_reproducible_and_contained() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = |out: &Path| {
        vec![
            "--seed".to_string(),
            "42".into(),
            "simulate".into(),
            "--model".into(),
            "threshold-max".into(),
            "--tau1".into(),
            "1.5".into(),
            "--tau2".into(),
            "2.25".into(),
            "--events".into(),
            "1000000".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    for out in [&a, &b] {
        let owned = args(out);
        let argv: Vec<&str> = owned.iter().map(String::as_str).collect();
        let (code, _, err) = run(&argv, None);
        assert_eq!(code, exit::OK, "{err}");
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let v = json(std::str::from_utf8(&bytes).unwrap());
    assert_eq!(v["within_bounds"], true);
    let est = v["estimate"]["value"].as_f64().unwrap();
    let sigma = v["estimate"]["sigma"].as_f64().unwrap();
    assert!((est - 0.694_787_5).abs() < 3.0 * sigma);
    assert_eq!(v["counts"]["n_events"], 1_000_000);

    let m = json(&std::fs::read_to_string(dir.path().join("a.json.manifest.json")).unwrap());
    assert_eq!(m["seed"], 42);
    assert_eq!(m["status"], 0);
}

#[test]
fn independent_jumps_at_zero_time_has_no_like_pairs() {
    let (code, out, _) = run(
        &[
            "simulate",
            "--model",
            "independent-jumps",
            "--tau1",
            "0",
            "--tau2",
            "0",
            "--events",
            "50000",
        ],
        None,
    );
    assert_eq!(code, exit::OK);
    let v = json(&out);
    let t = &v["counts"]["tallies"];
    assert_eq!(t[0][0], 0);
    assert_eq!(t[1][1], 0);
}

#[test]
fn simulate_rejects_reversed_times() {
    let (code, _, err) = run(
        &[
            "simulate",
            "--model",
            "threshold-min",
            "--tau1",
            "2",
            "--tau2",
            "1",
        ],
        None,
    );
    assert_eq!(code, exit::ERROR);
    assert!(!err.is_empty());
}

#[test]
fn unwritable_output_is_an_error() {
    let (code, _, _) = run(&["curve", "chsh", "--out", "/nonexistent/dir/x.csv"], None);
    assert_eq!(code, exit::ERROR);
}
