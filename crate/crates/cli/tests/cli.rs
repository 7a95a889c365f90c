use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use wgl_cli::manifest::{manifest_path, RunManifest};

fn zeros_file() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/zeros_100k.txt")
}

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_wgl"))
            .args(args)
            .arg("--out")
            .arg(self.out())
            .arg("--cache")
            .arg(self.dir.path().join("cache"))
            .current_dir(self.dir.path())
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let o = self.run(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let cmd = args[0];
        let ext = if args.contains(&"json") { "json" } else { "csv" };
        let path = self.out().join(format!("{cmd}.{ext}"));
        assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), path.display().to_string());
        std::fs::read_to_string(path).unwrap()
    }
}

/// Header and rows of a CSV result, comment lines dropped.
fn rows(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let body = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, body)
}

fn field(header: &[String], row: &[String], name: &str) -> f64 {
    let j = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    row[j].parse().unwrap()
}

#[test]
fn sieve_reports_the_prime_count() {
    let sb = Sandbox::new();
    let csv = sb.ok(&["sieve", "--N", "1000000"]);
    assert!(csv.starts_with("# wgl sieve\n# schema_version: 1\n"));
    let (h, r) = rows(&csv);
    assert_eq!(field(&h, &r[0], "prime_count"), 78498.0);
    // second run reads the cache and writes the same bytes
    assert_eq!(sb.ok(&["sieve", "--N", "1000000"]), csv);
    assert!(sb.dir.path().join("cache").read_dir().unwrap().next().is_some());
}

#[test]
fn every_command_writes_a_verified_manifest() {
    let sb = Sandbox::new();
    let zeros = zeros_file();
    let z = zeros.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["sieve", "--N", "10000"],
        vec!["interval", "--N", "2000", "--H", "20"],
        vec!["scaling", "--N", "2000", "--H", "10,20,40"],
        vec!["explicit", "--N", "250", "--zeros", z, "--K", "1000", "--alpha-points", "2"],
        vec!["moments", "--N", "64"],
        vec!["laplace", "--rungs", "2"],
        vec!["reconstruct", "--N", "100", "--n", "3,10,57"],
        vec!["mean-square-st", "--N", "1000", "--ell", "2", "--H", "100"],
        vec!["l2-moment", "--N", "300", "--xi", "0.05"],
        vec!["decompose", "--N", "100", "--H", "10"],
    ];
    for args in runs {
        let csv = sb.ok(&args);
        let (header, body) = rows(&csv);
        assert!(!body.is_empty(), "{args:?}");
        assert!(body.iter().all(|r| r.len() == header.len()), "{args:?}");
        let data = sb.out().join(format!("{}.csv", args[0]));
        let m = RunManifest::load(&manifest_path(&data)).unwrap();
        assert_eq!(m.command, args[0]);
        m.verify(&data).unwrap();
        assert_eq!(m.zero_file_digest.is_some(), args[0] == "explicit");
        assert!(m.threads >= 1);
    }
    assert!(!sb.out().join(".wgl.lock").exists());
}

#[test]
fn reconstruction_matches_the_sieve() {
    let sb = Sandbox::new();
    let (h, body) = rows(&sb.ok(&["reconstruct", "--N", "100", "--n", "3,10"]));
    assert_eq!(field(&h, &body[0], "sieve_count"), 0.0);
    assert!(field(&h, &body[0], "reconstructed").abs() < 1e-10);
    // 10 = 2 + 2² + 2² is the only representation
    let r10 = field(&h, &body[1], "sieve_count");
    assert!((r10 - 2f64.ln().powi(3)).abs() < 1e-12);
    assert!(field(&h, &body[1], "abs_diff") < 1e-8 * r10);
}

#[test]
fn json_output() {
    let sb = Sandbox::new();
    let text = sb.ok(&["interval", "--N", "500", "--H", "10,50", "--format", "json"]);
    let v: Value = serde_json::from_str(&text).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["H"], 10);
    assert_eq!(rows[1]["N"], 500);
    assert!(rows[1]["ratio"].as_f64().unwrap() > 0.0);
    assert_eq!(rows[0]["regime"], "small-N");
}

#[test]
fn config_file_sits_below_flags() {
    let sb = Sandbox::new();
    let cfg = sb.dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"N": 2000, "H": [10, 30], "format": "json"}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let v: Value = serde_json::from_str(&sb.ok(&["interval", "--config", c, "--format", "json"])).unwrap();
    assert_eq!(v[0]["N"], 2000);
    assert_eq!(v[1]["H"], 30);
    let v: Value = serde_json::from_str(&sb.ok(&["interval", "--config", c, "--H", "7", "--format", "json"])).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert_eq!(v[0]["H"], 7);
    let m = RunManifest::load(&sb.out().join("interval.json.manifest.json")).unwrap();
    assert_eq!(m.parameters["N"], 2000);

    std::fs::write(&cfg, r#"{"N": 2000, "bogus": 1}"#).unwrap();
    assert_eq!(sb.run(&["interval", "--config", c]).status.code(), Some(2));
    std::fs::write(&cfg, "{not json").unwrap();
    assert_ne!(sb.run(&["interval", "--config", c]).status.code(), Some(0));
}

#[test]
fn parameter_errors_exit_with_two() {
    let sb = Sandbox::new();
    for args in [
        vec!["interval", "--N", "100", "--H", "100"],
        vec!["scaling", "--N", "2000", "--H", "10"],
        vec!["moments", "--N", "64", "--ell", "0"],
        vec!["reconstruct", "--N", "100"],
        vec!["reconstruct", "--N", "100", "--n", "100000"],
        vec!["explicit", "--N", "100"],
        vec!["l2-moment", "--N", "300", "--xi", "0.7"],
        vec!["sieve", "--N", "100", "--threads", "none"],
        vec!["sieve", "--N", "100", "--eps", "2"],
    ] {
        let o = sb.run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn resource_errors_exit_with_three() {
    let sb = Sandbox::new();
    std::fs::create_dir_all(sb.out()).unwrap();
    std::fs::write(sb.out().join(".wgl.lock"), "1\n").unwrap();
    let o = sb.run(&["sieve", "--N", "100"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("in use"));
    std::fs::remove_file(sb.out().join(".wgl.lock")).unwrap();
    assert_eq!(sb.run(&["sieve", "--N", "100"]).status.code(), Some(0));

    // an output path that is a regular file
    let blocker = sb.dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_wgl"))
        .args(["sieve", "--N", "100", "--out"])
        .arg(blocker.join("sub"))
        .arg("--cache")
        .arg(sb.dir.path().join("cache"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bad_zero_files_exit_with_four() {
    let sb = Sandbox::new();
    let bad = sb.dir.path().join("zeros.txt");
    std::fs::write(&bad, "14.134725142\nfourteen\n").unwrap();
    let o = sb.run(&["explicit", "--N", "100", "--zeros", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    // decreasing ordinates
    std::fs::write(&bad, "21.022039639\n14.134725142\n").unwrap();
    let o = sb.run(&["explicit", "--N", "100", "--zeros", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn explicit_clips_k_and_refuses_wide_alpha() {
    let sb = Sandbox::new();
    let small = sb.dir.path().join("zeros.txt");
    let head: Vec<String> = std::fs::read_to_string(zeros_file()).unwrap().lines().take(50).map(String::from).collect();
    std::fs::write(&small, head.join("\n") + "\n").unwrap();
    let o = sb.run(&["explicit", "--N", "500", "--zeros", small.to_str().unwrap(), "--alpha-points", "3", "--alpha-width", "20"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("clipped"));
    let (h, body) = rows(&std::fs::read_to_string(sb.out().join("explicit.csv")).unwrap());
    let status = h.iter().position(|c| c == "status").unwrap();
    let mid = &body[body.len() / 2];
    assert_eq!(field(&h, mid, "alpha"), 0.0);
    assert_eq!(mid[status], "ok");
    assert!((field(&h, mid, "residual_abs") - 1.8379).abs() < 0.05);
    // 50 zeros reach height 143, too low for |α| >= 1/75
    assert!(body.iter().any(|r| r[status] == "refused"));
}

#[test]
fn output_is_independent_of_thread_count() {
    let sb = Sandbox::new();
    let args = ["decompose", "--N", "300", "--H", "30"];
    let one = sb.ok(&[&args[..], &["--threads", "1"]].concat());
    let four = sb.ok(&[&args[..], &["--threads", "4"]].concat());
    let auto = sb.ok(&[&args[..], &["--threads", "auto"]].concat());
    assert_eq!(one, four);
    assert_eq!(one, auto);
}
