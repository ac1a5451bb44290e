use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const PASSING: &str = r#"
check = "tcd"
samples = 4096
seed = 3

[model]
name = "minkowski"
dim = 2

[params]
K = 0.0
N = "inf"
q = 0.5
t = 0.5

[potential]
kind = "linear"
a = [-1.0, 0.0]

[regions.initial]
kind = "box"
lo = [0.0, 0.0]
hi = [1.0, 1.0]
"#;

const FAILING: &str = r#"
check = "tcd"
samples = 4096
seed = 3

[model]
name = "weighted_minkowski"
dim = 2
params = { epsilon = 0.5 }

[params]
K = 1.0
N = "inf"
q = 0.5
t = 0.5

[potential]
kind = "linear"
a = [-1.0, 0.0]

[regions.initial]
kind = "box"
lo = [0.0, 0.0]
hi = [0.01, 0.01]
"#;

/// Target atoms are spacelike to the source, so no causal coupling exists.
const UNRELATED: &str = r#"
check = "coupling"
q = 0.5

[model]
name = "minkowski"
dim = 2

[measures.source]
atoms = [[0.0, 0.0]]

[measures.target]
atoms = [[0.0, 5.0]]
"#;

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn lfot(config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lfot"))
        .arg("run")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn report(out: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(out.with_extension("json")).unwrap()).unwrap()
}

#[test]
fn passing_check_exits_zero_and_echoes_params() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "pass.toml", PASSING);
    let out = dir.path().join("pass");
    let o = lfot(&config, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("PASS tcd minkowski"));
    let r = report(&out);
    assert_eq!(r["verdict"], "PASS");
    assert_eq!(r["params"]["N"], "inf");
    assert_eq!(r["seed"], 3);
    assert_eq!(r["samples"], 4096);
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "fail.toml", FAILING);
    let out = dir.path().join("fail");
    let o = lfot(&config, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["verdict"], "FAIL");
    assert!(r["slack"].as_f64().unwrap() < 0.0);
}

#[test]
fn runtime_error_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "unrelated.toml", UNRELATED);
    let out = dir.path().join("unrelated");
    let o = lfot(&config, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["verdict"], "INCONCLUSIVE");
    assert!(r["error"]["kind"].is_string());
}

#[test]
fn malformed_config_exits_three_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let body = PASSING.replace("check = \"tcd\"", "check = \"tcd\"\nbogus = 1");
    let config = write_config(dir.path(), "bad.toml", &body);
    let out = dir.path().join("bad");
    let o = lfot(&config, &out, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.with_extension("json").exists());
    assert!(!out.with_extension("csv").exists());
}

#[test]
fn missing_config_and_bad_arguments_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("none");
    let o = lfot(&dir.path().join("absent.toml"), &out, &[]);
    assert_eq!(o.status.code(), Some(3));
    let o = Command::new(env!("CARGO_BIN_EXE_lfot"))
        .args(["run", "--samples", "many", "x.toml"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn repeated_runs_append_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "pass.toml", PASSING);
    let out = dir.path().join("rows");
    for seed in ["1", "2"] {
        let o = lfot(&config, &out, &["--seed", seed]);
        assert_eq!(o.status.code(), Some(0));
    }
    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], lfot_cli::report::CSV_HEADER);
    assert_ne!(lines[1], lines[2]);
    assert_eq!(report(&out)["seed"], 2);
}

#[test]
fn config_hash_tracks_samples_but_not_out() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "pass.toml", PASSING);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(lfot(&config, &a, &[]).status.code(), Some(0));
    assert_eq!(lfot(&config, &b, &["--samples", "8192"]).status.code(), Some(0));
    let (ra, rb) = (report(&a), report(&b));
    assert_eq!(rb["samples"], 8192);
    assert_ne!(ra["config_hash"], rb["config_hash"]);
    let c = dir.path().join("c");
    assert_eq!(lfot(&config, &c, &[]).status.code(), Some(0));
    assert_eq!(ra["config_hash"], report(&c)["config_hash"]);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "pass.toml", PASSING);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    lfot(&config, &a, &[]);
    lfot(&config, &b, &[]);
    assert_eq!(
        std::fs::read(a.with_extension("json")).unwrap(),
        std::fs::read(b.with_extension("json")).unwrap()
    );
}
