use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcsk-alloc")).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn field<'a>(line: &'a str, key: &str) -> &'a str {
    line.split(' ')
        .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in {line}"))
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["figure", "--help"]), 0);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&[]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["figure", "99"]), 2);
    assert_eq!(code(&["figure", "x"]), 2);
    assert_eq!(code(&["ber", "--m", "abc"]), 2);
    assert_eq!(code(&["ber", "--ebn0-db", "1:0"]), 2);
    assert_eq!(code(&["ber", "--bogus"]), 2);
}

#[test]
fn io_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("no/such/dir/x.csv");
    assert_eq!(code(&["figure", "4", "--out", out.to_str().unwrap()]), 3);
    let cfg = dir.path().join("missing.cfg");
    assert_eq!(code(&["optimal-n", "--config", cfg.to_str().unwrap()]), 3);
}

#[test]
fn validation_errors_exit_4() {
    assert_eq!(code(&["ber", "--m", "1"]), 4);
    assert_eq!(code(&["ber", "--n", "64"]), 4);
    assert_eq!(code(&["ber", "--beta", "0"]), 4);
    assert_eq!(code(&["simulate", "--n", "0", "--trials", "1"]), 4);
    assert_eq!(code(&["joint-opt", "--ct", "-1"]), 4);
}

#[test]
fn optimal_n_prints_key_value_line() {
    let text = stdout(&["optimal-n", "--m", "64", "--beta", "128", "--p", "1", "--ebn0-db", "10"]);
    let line = text.lines().next().unwrap();
    assert!(line.starts_with("n_star="));
    assert_eq!(field(line, "n_star"), field(line, "n_bruteforce"));
    assert_eq!(field(line, "n_star"), "14");
}

#[test]
fn json_output_is_one_object_per_point() {
    let text = stdout(&["optimal-n", "--p", "1,2,3", "--json"]);
    let objs: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(objs.len(), 3);
    for (v, p) in objs.iter().zip(1..) {
        assert_eq!(v["p"], p);
        assert!(v["n_star"].as_u64().unwrap() >= 1);
    }
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(&cfg, "# sweep\nm=16\nbeta=32\np=1,2\nebn0-db=0:5:10\n").unwrap();
    let text = stdout(&["ber", "--config", cfg.to_str().unwrap(), "--n", "3"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines.iter().all(|l| field(l, "m") == "16" && field(l, "n") == "3"));

    // Flags override the file.
    let text = stdout(&["ber", "--config", cfg.to_str().unwrap(), "--p", "4", "--ebn0-db", "7"]);
    assert_eq!(text.lines().count(), 1);
    assert_eq!(field(&text, "p"), "4");
}

#[test]
fn simulate_is_independent_of_shards() {
    let strip = |s: String| s.split(' ').filter(|kv| !kv.starts_with("shards=")).collect::<Vec<_>>().join(" ");
    let base = ["simulate", "--n", "6", "--trials", "40", "--seed", "9"];
    let one = strip(stdout(&[&base[..], &["--shards", "1"]].concat()));
    let many = strip(stdout(&[&base[..], &["--shards", "7"]].concat()));
    assert_eq!(one, many);
}

#[test]
fn joint_opt_reports_converged_solution() {
    let text = stdout(&["joint-opt", "--m", "16", "--beta", "32", "--p", "2"]);
    let line = text.lines().next().unwrap();
    assert_eq!(field(line, "converged"), "true");
    assert!(field(line, "f_residual").parse::<f64>().unwrap().abs() < 1e-9);
    let sum: f64 = field(line, "power_sum").parse().unwrap();
    assert!(sum <= 1.0 + 1e-12);
}

fn figure_bytes(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut full = vec!["figure"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path.to_str().unwrap()]);
    assert_eq!(code(&full), 0);
    std::fs::read(path).unwrap()
}

#[test]
fn figure_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["6"][..], &["9"], &["11", "--trials", "20", "--seed", "5"]] {
        let a = figure_bytes(dir.path(), "a.csv", args);
        let b = figure_bytes(dir.path(), "b.csv", args);
        assert_eq!(a, b, "figure {args:?}");
        assert!(!a.contains(&b'\r'));
        assert_eq!(*a.last().unwrap(), b'\n');
    }
}

#[test]
fn figure_to_stdout_matches_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = figure_bytes(dir.path(), "f.csv", &["4"]);
    assert_eq!(run(&["figure", "4"]).stdout, file);
}
