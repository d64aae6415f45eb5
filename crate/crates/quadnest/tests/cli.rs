use std::fs;
use std::path::Path;

use quadnest::cli::run_with;

fn run(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out_dir = dir.join("out");
    let cache_dir = dir.join("cache");
    let mut argv = vec!["quadnest".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.extend(["--out".into(), out_dir.display().to_string(), "--cache-dir".into(), cache_dir.display().to_string()]);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &[]).0, 1);
    assert_eq!(run(dir.path(), &["frobnicate"]).0, 1);
    assert_eq!(run(dir.path(), &["classify", "--a", "x.y"]).0, 1);
    assert_eq!(run(dir.path(), &["classify", "--a", "0.5", "--set", "no_such_key=1"]).0, 1);
    assert_eq!(run(dir.path(), &["capacity", "--intervals", "0.3:0.1", "--ambient", "0:1"]).0, 1);
    assert_eq!(run(dir.path(), &["sweep", "--range", "1.9"]).0, 1);
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(dir.path(), &["--help"]);
    assert_eq!(code, 0);
    for cmd in ["nest", "stats", "ce", "recur", "classify", "sweep", "windows", "capacity", "markov"] {
        assert!(out.contains(cmd), "{cmd} missing from help");
    }
}

#[test]
fn classify_writes_artifact_and_reports_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(dir.path(), &["classify", "--a", "-0.1"]);
    assert_eq!(code, 0);
    assert!(out.contains("regular"));
    assert!(dir.path().join("out/classify--0.1.txt").exists());
    // beyond the family: no verdict is possible
    assert_eq!(run(dir.path(), &["classify", "--a", "2.1"]).0, 2);
}

#[test]
fn ce_and_recurrence_at_misiurewicz_parameter() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["ce", "--a", "2", "--steps", "50"]).0, 0);
    let csv = fs::read_to_string(dir.path().join("out/ce-2.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 50);
    for row in rows {
        let ak: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!((ak - 4f64.ln()).abs() < 1e-12);
    }
    assert_eq!(run(dir.path(), &["recur", "--a", "2", "--steps", "10000"]).0, 0);
    assert!(dir.path().join("out/recur-2.csv").exists());
}

#[test]
fn nest_is_cached() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["nest", "--a", "1.7", "--max-level", "2"];
    let (code, first, _) = run(dir.path(), &args);
    assert_eq!(code, 0);
    let doc = fs::read_to_string(dir.path().join("out/nest-1.7.txt")).unwrap();
    let entries = walk(&dir.path().join("cache"));
    assert_eq!(entries, 1);
    let (code, second, _) = run(dir.path(), &args);
    assert_eq!(code, 0);
    assert!(!first.contains("(cached)"));
    assert_eq!(second, first.replace(".txt\n", ".txt (cached)\n"));
    assert_eq!(fs::read_to_string(dir.path().join("out/nest-1.7.txt")).unwrap(), doc);
    assert_eq!(walk(&dir.path().join("cache")), 1);
}

fn walk(p: &Path) -> usize {
    fs::read_dir(p)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            if e.file_type().unwrap().is_dir() {
                walk(&e.path())
            } else {
                1
            }
        })
        .sum()
}

#[test]
fn markov_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(dir.path(), &["markov"]);
    assert_eq!(code, 0, "{out}");
    // ∂I_2 at a = 1.7 never reaches the fixed point
    assert_eq!(run(dir.path(), &["markov", "--a", "1.7", "--level", "2", "--depth", "3"]).0, 2);
}

#[test]
fn capacity_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(dir.path(), &["capacity", "--intervals", "0.1:0.2,0.5:0.6", "--ambient", "0:1"]);
    assert_eq!(code, 0);
    assert!(out.contains("0.2"), "{out}");
    let (code, _, _) = run(dir.path(), &["sweep", "--range", "-0.25:0.75", "--count", "20", "--seed", "4"]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(1) == Some("regular")));
    let summary = fs::read_to_string(dir.path().join("out/sweep-summary.txt")).unwrap();
    assert!(summary.contains("regular = 1.0000"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "ce_steps = 30\n").unwrap();
    let cfg = cfg.display().to_string();
    assert_eq!(run(dir.path(), &["ce", "--a", "2", "--config", &cfg]).0, 0);
    let csv = fs::read_to_string(dir.path().join("out/ce-2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 31);
    assert_eq!(run(dir.path(), &["ce", "--a", "2", "--config", &cfg, "--set", "ce_steps=12"]).0, 0);
    let csv = fs::read_to_string(dir.path().join("out/ce-2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 13);
    fs::write(dir.path().join("bad.conf"), "ce_steps 30\n").unwrap();
    assert_eq!(run(dir.path(), &["ce", "--a", "2", "--config", &dir.path().join("bad.conf").display().to_string()]).0, 1);
}
