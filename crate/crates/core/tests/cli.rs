use std::process::{Command, Output};

fn crlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn run_heisenberg_exits_zero() {
    let out = crlab(&["run", "heisenberg-basics"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["passed"], true);
}

#[test]
fn tight_tolerance_exits_one() {
    let out = crlab(&["run", "perturbed-sphere", "--tol", "structural=1e-15"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn scenario_file_without_map_is_rejected() {
    let dir = std::env::temp_dir().join(format!("crlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("nomap.json");
    let text = r#"{
  "name": "nomap",
  "source": {
    "ambient_complex_dim": 2,
    "rho": {
      "num_complex_vars": 2,
      "monomials": [
        {"re": 0.0, "im": 0.5, "z_exponents": [0, 1], "zbar_exponents": [0, 0]},
        {"re": 0.0, "im": -0.5, "z_exponents": [0, 0], "zbar_exponents": [0, 1]},
        {"re": 1.0, "im": 0.0, "z_exponents": [1, 0], "zbar_exponents": [1, 0]}
      ]
    },
    "base_point": [[0.0, 0.0], [0.0, 0.0]]
  },
  "jet_order": 4,
  "tasks": ["webster", "sff"]
}"#;
    std::fs::write(&path, text).unwrap();
    let out = crlab(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`sff` requires a map"), "{err}");

    // the same file with the offending task removed runs
    std::fs::write(&path, text.replace(r#", "sff""#, "")).unwrap();
    let out = crlab(&[
        "run",
        path.to_str().unwrap(),
        "--out",
        dir.join("r.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.join("r.json").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn list_and_describe() {
    let out = crlab(&["list"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("whitney"));
    let out = crlab(&["describe", "whitney"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.contains("jet order 6") && text.contains("[1, 3, 5, 5]"),
        "{text}"
    );
    let out = crlab(&["describe", "no-such-scenario"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fast_suite_passes() {
    let out = crlab(&["check", "--suite", "fast"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(!text.contains("FAIL"));
}
