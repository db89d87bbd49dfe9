use std::path::Path;
use std::process::{Command, Output};

fn rgmst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rgmst")).args(args).output().unwrap()
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut all = args.to_vec();
    all.extend(["--out", out]);
    rgmst(&all)
}

#[test]
fn diameter_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["diameter", "--n-grid", "256,512,1024", "--replicates", "3", "--seed", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("raw.csv")).unwrap();
    assert!(csv.starts_with("experiment,n,replicate,seed,statistic,value,status\n"));
    assert_eq!(csv.lines().filter(|l| l.contains(",diameter,")).count(), 9);
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    for key in ["experiment", "n_grid", "slope", "slope_ci", "replicates", "seed"] {
        assert!(s.get(key).is_some(), "{key}");
    }
    assert_eq!(s["seed"], 5);
}

#[test]
fn config_file_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "n_grid = [128, 256, 512]\nreplicates = 2\nvariant = \"iid\"\nseed = 3\n").unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let out = rgmst(&["typical", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap(), "--jobs", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = rgmst(&["typical", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), "--jobs", "2"]);
    assert!(out.status.success());
    assert_eq!(std::fs::read(a.join("raw.csv")).unwrap(), std::fs::read(b.join("raw.csv")).unwrap());
    let csv = std::fs::read_to_string(a.join("raw.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("typical,128,0,"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "n_grid = [10, 5]\n").unwrap();
    assert_eq!(rgmst(&["diameter", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&cfg, "not toml at all [").unwrap();
    assert_eq!(rgmst(&["phase", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(rgmst(&["window", "--config", "/nonexistent/x.toml"]).status.code(), Some(2));
    assert_eq!(rgmst(&["powerlaw", "--replicates", "0"]).status.code(), Some(2));
    assert_eq!(rgmst(&["diameter", "--seed", "abc"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("file");
    std::fs::write(&file, "").unwrap();
    // the output directory cannot be created under a regular file
    let out = rgmst(&["diameter", "--n-grid", "64,128,256", "--replicates", "1", "--out", file.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn selftest_passes() {
    let out = rgmst(&["selftest"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("all self-test checks passed"));
}
