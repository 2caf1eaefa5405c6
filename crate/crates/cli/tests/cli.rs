use std::path::Path;
use std::process::Command;

fn run(args: &[&str], out: &Path) -> (i32, serde_json::Value) {
    let status = Command::new(env!("CARGO_BIN_EXE_spectral-chaos"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
        .status;
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    (status.code().unwrap(), serde_json::from_str(&manifest).unwrap())
}

#[test]
fn passing_suite_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (code, m) = run(&["diagram-moments", "--m", "2", "--max-rows", "4"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(m["status"], "pass");
    let csv = std::fs::read_to_string(dir.path().join("results_diagram-moments.csv")).unwrap();
    assert!(csv.starts_with("rows,enumerated,counted,quadrature"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn config_errors_exit_two_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["renormalize", "--alpha", "0.6", "--k", "2", "--regime", "noncentral"],
        &["renormalize", "--reps", "10"],
        &["renormalize", "--alpha", "1.5"],
        &["renormalize", "--alpha", "0.3", "--k", "2", "--regime", "central"],
    ];
    for args in cases {
        let (code, m) = run(args, dir.path());
        assert_eq!(code, 2, "{args:?}");
        assert_eq!(m["status"], "config_error");
        assert!(m["error"].as_str().unwrap().starts_with("invalid `"), "{}", m["error"]);
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"m": 3, "max_rows": 2, "seed": 5}"#).unwrap();
    let (code, m) = run(&["diagram-moments", "--max-rows", "3", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code, 0);
    assert_eq!(m["config"]["suite_args"]["m"], 3);
    assert_eq!(m["config"]["suite_args"]["max_rows"], 3);
    assert_eq!(m["config"]["seed"], 5);
}

#[test]
fn unreadable_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{ not json").unwrap();
    let (code, m) = run(&["hermite-check", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code, 2);
    assert!(m["error"].as_str().unwrap().contains("config"));
}
