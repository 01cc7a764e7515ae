//! End-to-end tests of the command-line interface: exit codes, report
//! shapes, and idempotence of the formatter.

use std::path::{Path, PathBuf};
use std::process::Command;

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("selflock-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        TempDir(dir)
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let path = self.0.join(name);
        std::fs::write(&path, contents).unwrap();
        path
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        std::fs::remove_dir_all(&self.0).ok();
    }
}

fn selflock(args: &[&str], dir: &Path) -> (String, String, i32) {
    let output = Command::new(env!("CARGO_BIN_EXE_selflock"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    (
        String::from_utf8(output.stdout).unwrap(),
        String::from_utf8(output.stderr).unwrap(),
        output.status.code().expect("no signal"),
    )
}

#[test]
fn check_exit_codes() {
    let dir = TempDir::new("check");
    let locked = dir.file("locked.ccs", "a.b.0 | ~b.~c.0 | c.~a.0\n");
    let clean = dir.file("clean.ccs", "(a.~b.0 | b.0) | ~a.0\n");
    let malformed = dir.file("malformed.ccs", "a.b.0 |\n");
    let nonlinear = dir.file("nonlinear.ccs", "a.~a.a.0\n");

    let (out, _, code) = selflock(&["check", locked.to_str().unwrap()], &dir.0);
    assert_eq!(code, 1);
    assert!(out.contains("locked: (a:i, b:o, c:i)"), "{out}");
    assert!(out.contains("input prefix 'a.b.0'"), "{out}");

    let (out, _, code) = selflock(&["check", clean.to_str().unwrap()], &dir.0);
    assert_eq!(code, 0);
    assert!(out.contains("no detection"), "{out}");

    let (_, err, code) = selflock(&["check", malformed.to_str().unwrap()], &dir.0);
    assert_eq!(code, 2);
    assert!(err.contains("parse error"), "{err}");

    let (_, err, code) = selflock(&["check", nonlinear.to_str().unwrap()], &dir.0);
    assert_eq!(code, 2);
    assert!(err.contains("used 2 times as input"), "{err}");

    // Errors dominate detections across files.
    let (_, _, code) = selflock(
        &[
            "check",
            locked.to_str().unwrap(),
            malformed.to_str().unwrap(),
        ],
        &dir.0,
    );
    assert_eq!(code, 2);
}

#[test]
fn check_json_schema() {
    let dir = TempDir::new("check-json");
    let file = dir.file(
        "both.ccs",
        "a.b.0 | ~b.~c.0 | c.~a.0\n\n(a.~b.0 | b.0) | ~a.0\n",
    );
    let (out, _, code) = selflock(&["check", "--json", file.to_str().unwrap()], &dir.0);
    assert_eq!(code, 1);
    let lines: Vec<serde_json::Value> = out
        .lines()
        .map(|l| serde_json::from_str(l).expect("valid JSON"))
        .collect();
    assert_eq!(lines.len(), 2);

    assert_eq!(lines[0]["index"], 0);
    assert_eq!(lines[0]["linear"], true);
    assert_eq!(lines[0]["verdict"]["verdict"], "locked");
    assert_eq!(lines[0]["verdict"]["reports"][0]["a"], "i");
    assert_eq!(lines[0]["verdict"]["reports"][0]["b"], "o");
    assert!(lines[0]["elapsed_us"].is_u64());

    assert_eq!(lines[1]["index"], 1);
    assert_eq!(lines[1]["verdict"]["verdict"], "no-detection");
    assert!(lines[1]["verdict"]["layers"].is_array());
}

#[test]
fn strict_mode_misses_the_self_hold() {
    let dir = TempDir::new("modes");
    let file = dir.file("hold.ccs", "a.~a.0\n");
    let (_, _, code) = selflock(&["check", file.to_str().unwrap()], &dir.0);
    assert_eq!(code, 1);
    let (_, _, code) = selflock(
        &["check", "--dl-mode", "strict", file.to_str().unwrap()],
        &dir.0,
    );
    assert_eq!(code, 0);
}

#[test]
fn oracle_reports_and_exit_codes() {
    let dir = TempDir::new("oracle");
    let locking = dir.file("p2.ccs", "d.(a.b.0 | ~b.~c.0) | ~d.c.~a.0\n");
    let inert = dir.file("inert.ccs", "0\n");

    let (out, _, code) = selflock(
        &["oracle", "--witness", "--json", locking.to_str().unwrap()],
        &dir.0,
    );
    assert_eq!(code, 1);
    let report: serde_json::Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
    assert_eq!(report["classification"]["potentially_self_locking"], true);
    assert_eq!(report["classification"]["lock_free"], false);
    assert_eq!(report["witness"]["trace"][0]["channel"], "d");
    assert_eq!(
        report["witness"]["locked"],
        serde_json::json!(["a.b.0", "c.~a.0", "~b.~c.0"])
    );

    let (out, _, code) = selflock(&["oracle", inert.to_str().unwrap()], &dir.0);
    assert_eq!(code, 0);
    assert!(out.contains("\"lock_free\":true"), "{out}");

    // The witness trace renders one line per step.
    let (out, _, _) = selflock(&["oracle", "--witness", locking.to_str().unwrap()], &dir.0);
    assert!(out.contains("--d--> a.b.0 | c.~a.0 | ~b.~c.0"), "{out}");
}

#[test]
fn oracle_budget_exceeded_is_exit_3() {
    let dir = TempDir::new("budget");
    let wide = dir.file(
        "wide.ccs",
        "a.0 | ~a.0 | b.0 | ~b.0 | c.0 | ~c.0 | d.0 | ~d.0\n",
    );
    let (_, err, code) = selflock(&["oracle", "--budget", "3", wide.to_str().unwrap()], &dir.0);
    assert_eq!(code, 3);
    assert!(err.contains("budget"), "{err}");
}

#[test]
fn refactor_exit_codes_and_output() {
    let dir = TempDir::new("refactor");
    let locked = dir.file("p5.ccs", "a.~b.c.0 | ~c.b.~a.0\n");
    let clean = dir.file("clean.ccs", "a.0\n");

    let (out, _, code) = selflock(
        &["refactor", "--strategy", "d1", locked.to_str().unwrap()],
        &dir.0,
    );
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "(a.0 | ~b.c.0) | ~c.0 | b.~a.0");

    let (out, _, code) = selflock(
        &[
            "refactor",
            "--strategy",
            "d2",
            "--verify",
            "--json",
            locked.to_str().unwrap(),
        ],
        &dir.0,
    );
    assert_eq!(code, 0);
    let report: serde_json::Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
    assert_eq!(report["strategy"], "pull-output");
    assert_eq!(report["steps"][0]["still_linear"], true);
    assert_eq!(report["steps"][0]["output_lock_free"], true);
    assert_eq!(
        report["steps"][0]["residual_reports"],
        serde_json::json!([])
    );

    let (out, _, code) = selflock(&["refactor", clean.to_str().unwrap()], &dir.0);
    assert_eq!(code, 1);
    assert!(out.contains("no lock detected"), "{out}");

    let (_, _, code) = selflock(
        &["refactor", dir.file("bad.ccs", "a.(").to_str().unwrap()],
        &dir.0,
    );
    assert_eq!(code, 2);
}

#[test]
fn gen_is_deterministic_and_linear() {
    let dir = TempDir::new("gen");
    let args = [
        "gen",
        "--seed",
        "11",
        "--names",
        "4",
        "--count",
        "30",
        "--complete",
    ];
    let (out1, _, code) = selflock(&args, &dir.0);
    assert_eq!(code, 0);
    let (out2, _, _) = selflock(&args, &dir.0);
    assert_eq!(out1, out2);
    assert_eq!(out1.lines().count(), 30);
    for line in out1.lines() {
        let process = selflock_core::process::Process::parse(line).unwrap();
        assert!(selflock_core::typing::is_linear(&process), "{line}");
        assert!(selflock_core::oracle::is_complete(&process), "{line}");
    }
}

#[test]
fn fmt_canonicalises_and_is_idempotent() {
    let dir = TempDir::new("fmt");
    let file = dir.file("messy.ccs", "a.0|0\n\n( b.0 | a.0 ) | 0 # trailing\n");

    let (out, _, code) = selflock(&["fmt", file.to_str().unwrap()], &dir.0);
    assert_eq!(code, 0);
    assert_eq!(out, "a.0\n\na.0 | b.0\n");

    let (_, _, code) = selflock(&["fmt", "--write", file.to_str().unwrap()], &dir.0);
    assert_eq!(code, 0);
    assert_eq!(
        std::fs::read_to_string(&file).unwrap(),
        "a.0\n\na.0 | b.0\n"
    );

    // Formatting its own output changes nothing.
    let (_, _, code) = selflock(&["fmt", "--write", file.to_str().unwrap()], &dir.0);
    assert_eq!(code, 0);
    assert_eq!(
        std::fs::read_to_string(&file).unwrap(),
        "a.0\n\na.0 | b.0\n"
    );

    let bad = dir.file("bad.ccs", "a..0\n");
    let (_, err, code) = selflock(&["fmt", bad.to_str().unwrap()], &dir.0);
    assert_eq!(code, 2);
    assert!(err.contains("parse error"), "{err}");
}

#[test]
fn check_and_oracle_agree_on_the_shipped_samples() {
    // Static detections must be semantically confirmed, sample by sample.
    let samples = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../samples");
    let mut checked = 0;
    for entry in std::fs::read_dir(&samples).expect("samples directory exists") {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "ccs") {
            continue;
        }
        checked += 1;
        let text = std::fs::read_to_string(&path).unwrap();
        for (index, process) in selflock_core::parse_file(&text).into_iter().enumerate() {
            process.unwrap_or_else(|e| panic!("{}[{index}]: {e}", path.display()));
            let source = format!("{}\nchunk {index}", path.display());
            let file = path.to_str().unwrap();
            // Per-process agreement via JSON reports.
            let (check_out, _, _) = selflock(&["check", "--json", file], &samples);
            let (oracle_out, _, _) = selflock(&["oracle", "--json", file], &samples);
            let check: serde_json::Value =
                serde_json::from_str(check_out.lines().nth(index).unwrap()).unwrap();
            let oracle: serde_json::Value =
                serde_json::from_str(oracle_out.lines().nth(index).unwrap()).unwrap();
            if check["verdict"]["verdict"] == "locked" {
                assert_eq!(
                    oracle["classification"]["potentially_self_locking"], true,
                    "static detection not confirmed on {source}"
                );
            }
        }
    }
    assert!(
        checked >= 5,
        "expected the shipped samples, found {checked}"
    );
}
