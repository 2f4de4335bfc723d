use std::fs;
use std::path::Path;

use aplab::cli::run;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["aplab"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn simulate(out: &Path, workers: &str) -> Vec<u8> {
    let (code, _, err) = call(&[
        "simulate",
        "--property", "min-degree:1",
        "--strategy", "min-degree:1",
        "--n", "1000",
        "--trials", "100",
        "--seed", "7",
        "--workers", workers,
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    fs::read(out.join("min-degree:1/min-degree:1/1000/trials.csv")).unwrap()
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate(&dir.path().join("a"), "1");
    let b = simulate(&dir.path().join("b"), "1");
    let c = simulate(&dir.path().join("c"), "8");
    assert_eq!(a, b);
    assert_eq!(a, c);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config-hash: "));
    assert_eq!(lines.next().unwrap(), "property,strategy,n,seed_base,trial,stopping_time,censored");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 100);
    for (i, r) in rows.iter().enumerate() {
        let f: Vec<&str> = r.split(',').collect();
        assert_eq!(f[4], i.to_string());
        let t: u64 = f[5].parse().unwrap();
        assert!((500..=1000).contains(&t));
        assert_eq!(f[6], "0");
    }
    let m1 = fs::read(dir.path().join("a/min-degree:1/min-degree:1/1000/manifest.json")).unwrap();
    let m8 = fs::read(dir.path().join("c/min-degree:1/min-degree:1/1000/manifest.json")).unwrap();
    assert_eq!(m1, m8);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    let (code, _, err) =
        call(&["simulate", "--property", "min-degree:1", "--strategy", "teleport", "--n", "100", "--out", o]);
    assert_eq!(code, 2);
    assert!(err.contains("teleport"), "{err}");
    let (code, _, _) = call(&["threshold", "--property", "min-degree:1", "--strategy", "min-degree:1", "--n", "100", "--out", o]);
    assert_eq!(code, 2, "threshold without theta");
    assert_eq!(call(&["simulate", "--bogus"]).0, 2);
}

#[test]
fn threshold_rows_are_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = call(&[
        "threshold",
        "--property", "min-degree:1",
        "--strategy", "min-degree:1",
        "--n", "4000",
        "--trials", "500",
        "--theta", "0.1,0.5,0.9",
        "--seed", "3",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(dir.path().join("min-degree:1/min-degree:1/4000/summary.csv")).unwrap();
    let rows: Vec<Vec<String>> =
        text.lines().skip(2).map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 3);
    let t: Vec<u64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(t.windows(2).all(|w| w[0] <= w[1]), "{t:?}");
    let median = t[1] as f64 / 4000.0;
    assert!((0.67..=0.72).contains(&median), "{median}");
}

#[test]
fn verify_bundled_instances() {
    let (code, out, _) = call(&["verify-martingale", "bundled:two-subset"]);
    assert_eq!(code, 0);
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["mu"], "1/2");

    let (code, out, _) = call(&["verify-martingale", "bundled:coupling-k1"]);
    assert_eq!(code, 0);
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["records"][0]["gamma"], "1/4");
}

#[test]
fn corrupted_instance_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{\"kind\": \"process\", \"n\": 3, \"support\": [").unwrap();
    let (code, _, err) = call(&["verify-martingale", path.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert!(!err.is_empty());
    let (code, _, _) = call(&["verify-martingale", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code, 3);
}

#[test]
fn verify_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = call(&["verify-martingale", "bundled:two-subset", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    let written = fs::read_to_string(dir.path().join("verify-martingale/two-subset.json")).unwrap();
    assert_eq!(written.trim(), out.trim());
}
