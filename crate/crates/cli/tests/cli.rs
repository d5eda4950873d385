use std::path::Path;
use std::process::{Command, Output};

fn fraclap(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fraclap"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("FRACLAP_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const HEADER: &str = "suite,s,function,left_label,left_value,left_error,right_label,right_value,right_error,margin,predicted,verdict";

#[test]
fn selftest_passes() {
    let out = fraclap(&["selftest"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some(HEADER));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",pass")));
}

#[test]
fn run_writes_csv_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t13.toml", "suite = \"forms-T13\"\ns = [0.5, -0.5, 1.5]\n");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let out = fraclap(&["run", "--suite", "forms-T13", "--config", &cfg, "--out", a.to_str().unwrap()], Some("1"));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = fraclap(&["run", "--suite", "forms-T13", "--config", &cfg, "--out", b.to_str().unwrap()], Some("2"));
    assert_eq!(out.status.code(), Some(0));
    let (a, b) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next(), Some(HEADER));
    assert_eq!(text.lines().count(), 1 + 4 + 3 + 3);
}

#[test]
fn json_output_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let cfg = write(
        dir.path(),
        "r31.toml",
        &format!(
            "suite = \"counterexample-R31\"\nformat = \"json\"\nout = \"{}\"\ns = [0.5]\n[domain]\nintervals = [[0.0, 1.0], [2.0, 3.0]]\n",
            path.display()
        ),
    );
    let out = fraclap(&["run", "--suite", "counterexample-R31", "--config", &cfg], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
    let keys: Vec<&str> = rows[0].as_object().unwrap().keys().map(String::as_str).collect();
    let mut want: Vec<&str> = HEADER.split(',').collect();
    want.sort();
    let mut keys = keys;
    keys.sort();
    assert_eq!(keys, want);
}

#[test]
fn inconclusive_rows_exit_two_unless_allowed() {
    let dir = tempfile::tempdir().unwrap();
    // the zero extension of sin has no restricted form of order 2.5
    let strict = write(dir.path(), "a.toml", "suite = \"forms-T13\"\ns = [2.5]\nfunctions = [\"sin(1)\", \"bump(3)\"]\n");
    let out = fraclap(&["run", "--suite", "forms-T13", "--config", &strict], None);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains(",inconclusive"));
    let lenient = write(
        dir.path(),
        "b.toml",
        "suite = \"forms-T13\"\ns = [2.5]\nfunctions = [\"sin(1)\", \"bump(3)\"]\ninconclusive_allowed = 0.5\n",
    );
    let out = fraclap(&["run", "--suite", "forms-T13", "--config", &lenient], None);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "suite = \"pointwise-T14\"\n\nfunctions = [\"sin(2)\"]\n");
    let out = fraclap(&["run", "--suite", "pointwise-T14", "--config", &cfg], None);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn suite_mismatch_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t13.toml", "suite = \"forms-T13\"\n");
    let out = fraclap(&["run", "--suite", "forms-T11", "--config", &cfg], None);
    assert_eq!(out.status.code(), Some(1));
    let out = fraclap(&["run", "--suite", "forms-T13"], None);
    assert_eq!(out.status.code(), Some(1));
    let out = fraclap(&["selftest"], Some("many"));
    assert_eq!(out.status.code(), Some(1));
}
