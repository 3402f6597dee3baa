//! End-to-end tests of the `tausum` binary: exit codes, golden output
//! shapes, cache replay, and manifest reruns.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tausum"));
    // Isolate from the ambient environment; individual tests opt back in.
    c.env_remove("TAUSUM_CACHE_DIR").env_remove("TAUSUM_X_CAP");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Field `idx` of CSV line `line` (0-based, header is line 0).
fn csv_field(text: &str, line: usize, idx: usize) -> String {
    text.lines()
        .nth(line)
        .unwrap_or_else(|| panic!("line {line} missing in {text:?}"))
        .split(',')
        .nth(idx)
        .unwrap_or_else(|| panic!("field {idx} missing"))
        .to_string()
}

// ----------------------------------------------------------------- exit codes

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&run(&["sums", "--x", "100"])), 64, "missing --kind");
    assert_eq!(code(&run(&["sums", "--kind", "phi", "--frobnicate"])), 64);
    assert_eq!(code(&run(&["sums", "--kind", "bogus", "--x", "10"])), 64);
    assert_eq!(code(&run(&["verify-sieve", "--a", "1", "--z", "1"])), 64);
    assert_eq!(code(&run(&["constants", "--a", "0"])), 64);
    assert_eq!(code(&run(&["constants", "--digits", "99"])), 64);
}

#[test]
fn help_and_version_exit_0() {
    let help = run(&["--help"]);
    assert_eq!(code(&help), 0);
    for cmd in [
        "constants",
        "gregory",
        "verify-sieve",
        "sums",
        "bound-report",
        "mainterm-check",
        "rerun",
    ] {
        assert!(stdout_of(&help).contains(cmd), "help lists {cmd}");
    }
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn caps_exit_3() {
    let out = run(&["sums", "--kind", "tau-recip", "--x", "99999999999"]);
    assert_eq!(code(&out), 3);
    assert!(stderr_of(&out).contains("cap"));

    let lowered = bin()
        .env("TAUSUM_X_CAP", "1000")
        .args(["sums", "--kind", "tau-recip", "--x", "10000"])
        .output()
        .unwrap();
    assert_eq!(code(&lowered), 3, "env-lowered cap applies");
}

#[test]
fn unattainable_precision_exits_2() {
    let out = run(&[
        "constants",
        "--prime-cutoff",
        "100",
        "--series-order",
        "4",
        "--digits",
        "13",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr_of(&out).contains("precision"));

    // The same truncation certifies a relaxed target.
    let relaxed = run(&[
        "constants",
        "--prime-cutoff",
        "100",
        "--series-order",
        "4",
        "--digits",
        "6",
    ]);
    assert_eq!(code(&relaxed), 0);
}

#[test]
fn failed_verification_exits_1() {
    // A residual near a sign crossing (x = 10344) followed by an ordinary
    // one: the growth detector fires on this short baseline.  Decade-spaced
    // checkpoints (the default) are what the check is designed for.
    let out = run(&[
        "mainterm-check",
        "--d",
        "10",
        "--m",
        "1",
        "--x",
        "10600",
        "--checkpoints",
        "10344,10600",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr_of(&out).contains("grew"));
    assert!(
        stdout_of(&out).lines().count() == 3,
        "report is still emitted"
    );
}

#[test]
fn io_errors_exit_74() {
    assert_eq!(code(&run(&["rerun", "/nonexistent/manifest.json"])), 74);
}

// ------------------------------------------------------------- golden output

#[test]
fn csv_headers_are_stable() {
    for (args, header) in [
        (
            vec!["constants"],
            "a,k,beta_a,k_a,a0,c_titchmarsh,k_route_delta,prime_cutoff,series_order,target_digits",
        ),
        (vec!["gregory", "--m", "4"], "k,c,d"),
        (
            vec!["verify-sieve", "--a", "1", "--z", "10"],
            "check,status,value,threshold",
        ),
        (
            vec!["sums", "--kind", "tau-recip", "--x", "100"],
            "x,value,normalized,bound,slack,wall_time_ms",
        ),
        (
            vec!["bound-report", "--a", "1", "--x", "10000"],
            "x,value,bound,ratio,order,verdict",
        ),
        (
            vec!["mainterm-check", "--d", "1", "--x", "10000"],
            "x,value,mainterm,residual,scaled_residual,mainterm_lower,residual_lower,scaled_residual_lower",
        ),
    ] {
        let out = run(&args);
        assert_eq!(code(&out), 0, "{args:?} stderr: {}", stderr_of(&out));
        assert_eq!(
            stdout_of(&out).lines().next().unwrap(),
            header,
            "{args:?} header"
        );
    }
}

#[test]
fn small_sums_print_exact_values() {
    let out = run(&["sums", "--kind", "tau-recip", "--x", "4"]);
    assert_eq!(code(&out), 0);
    let value: f64 = csv_field(&stdout_of(&out), 1, 1).parse().unwrap();
    assert_eq!(value.to_bits(), (7.0f64 / 3.0).to_bits(), "1 + 1/2 + 1/2 + 1/3");

    let phi = run(&["sums", "--kind", "phi", "--a", "1", "--x", "10"]);
    let value: f64 = csv_field(&stdout_of(&phi), 1, 1).parse().unwrap();
    assert_eq!(value.to_bits(), (4.0f64 / 3.0).to_bits(), "p ∈ {{2,3,5,7}}");
}

#[test]
fn constants_report_known_values() {
    let out = run(&["constants", "--a", "2"]);
    let text = stdout_of(&out);
    let k: f64 = csv_field(&text, 1, 1).parse().unwrap();
    let beta: f64 = csv_field(&text, 1, 2).parse().unwrap();
    let k_a: f64 = csv_field(&text, 1, 3).parse().unwrap();
    assert!((k - 0.253_201_115_016_4).abs() < 1e-12);
    assert!((beta - (1.0 + 1.0 / (2.0 * std::f64::consts::LN_2 - 1.0))).abs() < 1e-12);
    assert!((k_a - k * beta).abs() < 1e-12);

    let unit = run(&["constants", "--a", "1"]);
    assert_eq!(csv_field(&stdout_of(&unit), 1, 2), "1", "β(1) = 1 exactly");
}

#[test]
fn gregory_prints_the_leading_coefficients() {
    let out = run(&["gregory", "--m", "4"]);
    let text = stdout_of(&out);
    let expect = [1.0, -0.5, -1.0 / 12.0, -1.0 / 24.0, -19.0 / 720.0];
    for (k, want) in expect.iter().enumerate() {
        let c: f64 = csv_field(&text, k + 1, 1).parse().unwrap();
        assert!((c - want).abs() < 1e-12, "c_{k}");
    }
}

#[test]
fn verify_sieve_passes_and_exposes_weights() {
    let out = run(&["verify-sieve", "--a", "1", "--z", "30"]);
    assert_eq!(code(&out), 0);
    let text = stdout_of(&out);
    for line in text.lines().skip(1) {
        let status = line.split(',').nth(1).unwrap();
        assert!(
            status == "pass" || status == "skipped" || status == "info",
            "no failures in {line:?}"
        );
    }

    let json_out = run(&["verify-sieve", "--a", "1", "--z", "2", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&json_out)).unwrap();
    assert_eq!(doc["rho"]["1"], 1.0);
    assert_eq!(doc["rho"]["2"], -1.0);
    let h_a = doc["h_a"].as_f64().unwrap();
    let h2 = 1.0 / (2.0 * std::f64::consts::LN_2 - 1.0);
    assert!((h_a - (1.0 + h2)).abs() < 1e-12, "H(2) = 1 + h(2)");
}

#[test]
fn bound_report_passes_above_ten_thousand() {
    let out = run(&["bound-report", "--a", "1", "--x", "100000"]);
    assert_eq!(code(&out), 0);
    for line in stdout_of(&out).lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let x: u64 = fields[0].parse().unwrap();
        let ratio: f64 = fields[3].parse().unwrap();
        assert!(ratio > 0.0 && ratio < 1.0);
        if x >= 10_000 {
            assert_eq!(fields[5], "pass");
        } else {
            assert_eq!(fields[5], "info");
        }
    }
}

#[test]
fn mainterm_check_passes_on_decade_checkpoints() {
    let out = run(&["mainterm-check", "--d", "6", "--x", "100000"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
}

#[test]
fn json_reports_are_well_formed() {
    for args in [
        vec!["constants", "--a", "2", "--format", "json"],
        vec!["gregory", "--m", "8", "--format", "json"],
        vec!["sums", "--kind", "phi", "--a", "1", "--x", "1000", "--format", "json"],
        vec!["bound-report", "--a", "1", "--x", "10000", "--format", "json"],
        vec!["mainterm-check", "--d", "1", "--x", "10000", "--format", "json"],
    ] {
        let out = run(&args);
        assert_eq!(code(&out), 0, "{args:?}");
        let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out))
            .unwrap_or_else(|e| panic!("{args:?}: {e}"));
        assert!(doc.is_object());
    }

    let sums = run(&[
        "sums", "--kind", "phi", "--a", "2", "--x", "1000", "--format", "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&sums)).unwrap();
    assert_eq!(doc["kind"]["kind"], "phi");
    assert_eq!(doc["kind"]["a"], 2);
    assert_eq!(doc["rows"][0]["x"], 1000);
}

// ------------------------------------------------------- config & environment

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "x=4\nformat=json\nkind=tau-recip\n").unwrap();
    let cfg_str = cfg.to_str().unwrap();

    let from_file = run(&["sums", "--config", cfg_str]);
    assert_eq!(code(&from_file), 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&from_file)).unwrap();
    assert_eq!(doc["x"], 4);

    let overridden = run(&["sums", "--config", cfg_str, "--x", "10"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&overridden)).unwrap();
    assert_eq!(doc["x"], 10, "explicit flag wins");

    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "no-such-key=1\n").unwrap();
    assert_eq!(code(&run(&["sums", "--config", bad.to_str().unwrap()])), 64);
}

#[test]
fn worker_count_does_not_change_output() {
    let one = run(&["sums", "--kind", "phi", "--a", "1", "--x", "100000"]);
    let four = run(&[
        "sums", "--kind", "phi", "--a", "1", "--x", "100000", "--workers", "4",
    ]);
    assert_eq!(code(&one), 0);
    assert_eq!(code(&four), 0);
    assert_eq!(stdout_of(&one), stdout_of(&four));
}

// ------------------------------------------------------------ cache & reruns

struct CachedRun {
    dir: tempfile::TempDir,
    report: PathBuf,
    manifest: PathBuf,
}

fn cached_phi_run(name: &str, dir: &tempfile::TempDir) -> (PathBuf, PathBuf) {
    let report = dir.path().join(format!("{name}.csv"));
    let cache = dir.path().join("cache");
    let out = run(&[
        "sums",
        "--kind",
        "phi",
        "--a",
        "1",
        "--x",
        "100000",
        "--out",
        report.to_str().unwrap(),
        "--cache-dir",
        cache.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let manifest = PathBuf::from(format!("{}.manifest.json", report.display()));
    (report, manifest)
}

fn first_run() -> CachedRun {
    let dir = tempfile::tempdir().unwrap();
    let (report, manifest) = cached_phi_run("first", &dir);
    CachedRun {
        dir,
        report,
        manifest,
    }
}

fn manifest_doc(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn cache_replays_are_byte_identical() {
    let setup = first_run();
    assert_eq!(manifest_doc(&setup.manifest)["cache"]["hit"], false);

    let (second, second_manifest) = cached_phi_run("second", &setup.dir);
    assert_eq!(manifest_doc(&second_manifest)["cache"]["hit"], true);
    assert_eq!(
        std::fs::read(&setup.report).unwrap(),
        std::fs::read(&second).unwrap(),
        "wall_time_ms comes from the cached rows, so bytes match"
    );
    assert_eq!(
        manifest_doc(&setup.manifest)["cache"]["key"],
        manifest_doc(&second_manifest)["cache"]["key"],
    );
}

#[test]
fn rerun_reproduces_the_original_report() {
    let setup = first_run();
    let replay = setup.dir.path().join("replay.csv");
    let out = run(&[
        "rerun",
        setup.manifest.to_str().unwrap(),
        "--out",
        replay.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    assert_eq!(
        std::fs::read(&setup.report).unwrap(),
        std::fs::read(&replay).unwrap()
    );
    let manifest = manifest_doc(&PathBuf::from(format!(
        "{}.manifest.json",
        replay.display()
    )));
    assert_eq!(manifest["cache"]["hit"], true);
}

#[test]
fn corrupted_cache_entries_are_recomputed() {
    let setup = first_run();
    let key = manifest_doc(&setup.manifest)["cache"]["key"]
        .as_str()
        .unwrap()
        .to_string();
    let entry = setup.dir.path().join("cache").join(format!("{key}.json"));
    std::fs::write(&entry, b"{ not json").unwrap();

    let (second, _) = cached_phi_run("second", &setup.dir);
    // Recomputed: same values (wall clock may differ), warning on stderr.
    let orig = std::fs::read_to_string(&setup.report).unwrap();
    let redo = std::fs::read_to_string(&second).unwrap();
    for (a, b) in orig.lines().zip(redo.lines()) {
        let va: Vec<&str> = a.split(',').collect();
        let vb: Vec<&str> = b.split(',').collect();
        assert_eq!(va[..5], vb[..5], "value columns survive recomputation");
    }
    let repaired: Vec<tausum::sums::Checkpoint> =
        serde_json::from_str(&std::fs::read_to_string(&entry).unwrap()).unwrap();
    assert_eq!(repaired.len(), 3, "entry was rewritten");
}

#[test]
fn cache_warning_reaches_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let args = [
        "sums",
        "--kind",
        "tau-recip",
        "--x",
        "1000",
        "--cache-dir",
        cache.to_str().unwrap(),
    ];
    let first = run(&args);
    assert_eq!(code(&first), 0);
    let entry = std::fs::read_dir(&cache)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "json"))
        .expect("cache entry written");
    std::fs::write(&entry, b"garbage").unwrap();
    let second = run(&args);
    assert_eq!(code(&second), 0);
    assert!(stderr_of(&second).contains("corrupted cache entry"));
    assert_eq!(stdout_of(&first), stdout_of(&second));
}

#[test]
fn env_cache_dir_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("env-cache");
    let out = bin()
        .env("TAUSUM_CACHE_DIR", cache.to_str().unwrap())
        .args(["sums", "--kind", "tau-recip", "--x", "1000"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(cache.is_dir(), "cache dir created from the environment");
}
