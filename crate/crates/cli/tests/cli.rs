use std::path::Path;
use std::process::{Command, Output};

fn hopf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopf")).args(args).env_remove("HOPF_OUT_DIR").output().expect("run hopf")
}

fn summary(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("summary.json")).expect("summary.json");
    serde_json::from_str(&text).expect("valid json")
}

#[test]
fn solve_writes_profile_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = hopf(&["solve", "--out-dir", out]);
    assert_eq!(o.status.code(), Some(0));
    let s = summary(dir.path());
    assert_eq!(s["verdict"], "solution_found");
    assert_eq!(s["config"]["nodes"], 2000);
    assert_eq!(s["config"]["mu"], 4.0);
    let profile = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(profile.starts_with("t,alpha,dalpha,residual\n"));
    assert!(dir.path().join("scan.csv").exists());
}

#[test]
fn invalid_parameters_exit_one_with_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = hopf(&["solve", "--p", "1", "--q", "2", "--lambda", "1", "--mu", "-1", "--out-dir", out]);
    assert_eq!(o.status.code(), Some(1));
    let s = summary(dir.path());
    assert_eq!(s["status"], "error");
    assert!(s["error"].as_str().unwrap().contains("usage error"));
}

#[test]
fn unknown_flag_still_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = hopf(&["solve", "--bogus", "--out-dir", out]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(summary(dir.path())["status"], "error");
}

#[test]
fn help_exits_zero() {
    assert_eq!(hopf(&["--help"]).status.code(), Some(0));
    assert_eq!(hopf(&["solve", "--help"]).status.code(), Some(0));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# sub-threshold\nmu = 1.5\nnodes = 1001\nn_scan = 12\n").unwrap();
    let out = dir.path().join("a");
    let o = hopf(&["solve", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let s = summary(&out);
    assert_eq!(s["config"]["nodes"], 1001);
    assert_eq!(s["config"]["n_scan"], 12);

    let out = dir.path().join("b");
    let o = hopf(&["solve", "--config", cfg.to_str().unwrap(), "--mu", "4", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(summary(&out)["config"]["mu"], 4.0);
}

#[test]
fn out_dir_defaults_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hopf"))
        .args(["blowup", "--s", "0.02"])
        .env("HOPF_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("blowup.csv").exists());
    assert!(dir.path().join("summary.json").exists());
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = hopf(&["scan-jump", "--n", "6", "--nodes", "801", "--threads", "2", "--out-dir", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        (std::fs::read(out.join("scan.csv")).unwrap(), std::fs::read(out.join("summary.json")).unwrap())
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a.0, b.0);
    assert_eq!(String::from_utf8_lossy(&a.1).replace("/a\"", ""), String::from_utf8_lossy(&b.1).replace("/b\"", ""));
}

#[test]
fn verify_and_compare_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = hopf(&["verify", "--json", "--out-dir", out]);
    assert_eq!(o.status.code(), Some(0));
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.lines().skip(1).take(30).all(|l| l.ends_with("pass")));
    assert_eq!(hopf(&["compare", "--count", "3", "--out-dir", out]).status.code(), Some(0));
    let rows = std::fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    assert_eq!(rows.lines().count(), 4);
}

#[test]
fn map_and_hopf_eval() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = hopf(&["map", "--lambda", "1:1:1", "--mu", "1.5:4:2", "--nodes", "1001", "--out-dir", out]);
    assert_eq!(o.status.code(), Some(0));
    let map = std::fs::read_to_string(dir.path().join("map.csv")).unwrap();
    let verdicts: Vec<&str> = map.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(verdicts, ["no_sign_change", "solution_found"]);

    assert_eq!(hopf(&["solve", "--q", "3", "--mu", "8", "--out-dir", out]).status.code(), Some(0));
    let profile = dir.path().join("profile.csv");
    let o = hopf(&["hopf-eval", "--profile", profile.to_str().unwrap(), "--samples", "500", "--out-dir", out]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["max_norm_defect"].as_f64().unwrap() < 1e-12);
    assert!(report["pole_error_pi2"].as_f64().unwrap() < 1e-3);
    assert_eq!(hopf(&["hopf-eval", "--profile", "missing.csv", "--out-dir", out]).status.code(), Some(1));
}
