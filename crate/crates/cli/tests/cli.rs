use std::path::Path;
use std::process::{Command, Output};

use parabolic_lag::analysis::CHECKS;

fn plag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plag")).args(args).output().unwrap()
}

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/configs"))
}

const SMALL_GRID: &str = r#"
seed = 7

[params]
n = 1
p = 2.0

[grid]
origin = { x = [0.0], t = 0.0 }
shape = [8, 16]
h_x = 1.0
h_t = 0.25
"#;

#[test]
fn list_checks_names_every_check() {
    let out = plag(&["list-checks"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("check_welland"));
    assert!(text.contains("check_duality"));
    assert_eq!(text.lines().count(), CHECKS.len());
}

#[test]
fn empty_config_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.cfg");
    std::fs::write(&cfg, SMALL_GRID).unwrap();
    let out_dir = dir.path().join("out");
    let out = plag(&["run", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().collect::<Vec<_>>(), ["name,kind,params_hash,value,pass"]);
}

#[test]
fn golden_config_reproduces_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("pointwise_control.cfg");
    let out = plag(&["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--jobs", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let got = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let want = std::fs::read_to_string(configs().join("pointwise_control.golden.csv")).unwrap();
    assert_eq!(got, want);
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fail.cfg");
    let text = format!(
        r#"{SMALL_GRID}
[fields.one]
kind = "constant"
c = 1.0

[[tasks]]
kind = "check"
check = "pointwise-control"
name = "impossible"
field = "one"
gamma = 0.5
beta = 0.25
ladder = {{ kind = "values", values = [0.5, 1.0] }}
tolerance = -1.0
"#
    );
    std::fs::write(&cfg, text).unwrap();
    let out = plag(&["run", cfg.to_str().unwrap(), "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, format!("{SMALL_GRID}\n[[tasks]]\nkind = \"operator-eval\"\nname = \"x\"\nfield = \"missing\"\ngamma = 0.5\nbeta = 0.25\noperator = {{ op = \"fractional-integral\" }}\n")).unwrap();
    let out = plag(&["run", cfg.to_str().unwrap(), "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tasks[0].field"));
}
