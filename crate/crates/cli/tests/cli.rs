use std::path::Path;
use std::process::{Command, Output};

fn novikov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_novikov"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn small(out: &Path) -> Vec<String> {
    ["--grid-points", "16384", "--n-min", "4", "--n-max", "6", "--out"]
        .iter()
        .map(|s| s.to_string())
        .chain([out.to_string_lossy().into_owned()])
        .collect()
}

fn run_small(cmd: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd.to_string()];
    args.extend(small(out));
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    novikov(&refs)
}

#[test]
fn help_lists_subcommands() {
    let out = novikov(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["partition-check", "norms", "prop1", "prop2", "theorem", "all"] {
        assert!(text.contains(sub), "missing {sub} in help");
    }
}

#[test]
fn norms_writes_csv_and_json_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_small("norms", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("PASS norms/localization")));
    let csv = std::fs::read_to_string(dir.path().join("norms.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("n,rho0_sm2,"));
    assert_eq!(csv.lines().count(), 1 + 3);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("norms.json")).unwrap()).unwrap();
    assert_eq!(json["experiment"], "norms");
    assert_eq!(json["config"]["n_max"], 6);
    assert!(json["fits"]["g_s"]["slope"].as_f64().is_some());
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"besov": {"s": 2.5, "p": 4.0}, "n_points": 8192, "n_max": 5}"#).unwrap();
    let out = novikov(&[
        "partition-check",
        "--config",
        cfg.to_str().unwrap(),
        "--n-min",
        "3",
        "--grid-points",
        "16384",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("partition-check.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["besov"]["s"], 2.5);
    assert_eq!(json["config"]["besov"]["p"], 4.0);
    assert_eq!(json["config"]["n_points"], 16384);
    assert_eq!(json["config"]["n_min"], 3);
    assert_eq!(json["config"]["n_max"], 5);
}

#[test]
fn invalid_configuration_exits_with_error() {
    let dir = tempfile::tempdir().unwrap();
    // n = 8 needs more headroom than 2^14 points provide.
    let out = novikov(&["norms", "--grid-points", "16384", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("k_max / 3"));

    let out = run_small("norms", dir.path(), &["--s", "1.2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("norms.csv").exists());
}

#[test]
fn snapshots_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_small("partition-check", dir.path(), &["--snapshots"]);
    assert!(out.status.code() == Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for n in 4..=6 {
        let bytes = std::fs::read(dir.path().join(format!("family_n{n}.bin"))).unwrap();
        assert_eq!(&bytes[..4], b"NVKS");
    }
}
