use std::fs;

use waldschmidt::certs::{check_str, CertificateFile};
use waldschmidt::cli::cli_main;

fn run(args: &[&str]) -> i32 {
    cli_main(std::iter::once("waldschmidt").chain(args.iter().copied()))
}

#[test]
fn empty_emits_checkable_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t1.json");
    let out_s = out.to_str().unwrap();
    assert_eq!(run(&["empty", "--N", "4", "--degree", "36m-1", "--mults", "20m x9, 30m x1", "--emit", out_s]), 0);
    let text = fs::read_to_string(&out).unwrap();
    check_str(&text).unwrap();
    let file = CertificateFile::from_json(&text).unwrap();
    let ks: Vec<&str> = file.steps.iter().filter(|s| s.rule == "cremona").map(|s| s.params["k"].as_str().unwrap()).collect();
    assert_eq!(ks.len(), 3);
    assert_eq!(run(&["check", out_s]), 0);

    let mut bad = file.clone();
    let i = bad.steps.iter().position(|s| s.rule == "cremona").unwrap();
    bad.steps[i].params.insert("k".into(), serde_json::json!("-3m"));
    let bad_path = dir.path().join("bad.json");
    fs::write(&bad_path, bad.to_json()).unwrap();
    assert_eq!(run(&["check", bad_path.to_str().unwrap()]), 1);
}

#[test]
fn unprovable_system_exits_one() {
    assert_eq!(run(&["empty", "--N", "2", "--degree", "3m", "--mults", "m x2"]), 1);
}

#[test]
fn demailly_exit_codes() {
    assert_eq!(run(&["demailly", "--mode", "general", "--N", "3", "--s", "6..216"]), 1);
    assert_eq!(run(&["demailly", "--mode", "general", "--N", "3", "--s", "7..40"]), 0);
    assert_eq!(run(&["demailly", "--mode", "general", "--N", "5", "--s", "8..20"]), 0);
    assert_eq!(run(&["demailly", "--mode", "very-general", "--N", "3", "--s", "6..8"]), 0);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]), 2);
    assert_eq!(run(&["demailly", "--mode", "general", "--N", "3", "--s", "9..2"]), 2);
    assert_eq!(run(&["demailly", "--mode", "sideways", "--N", "3", "--s", "6..8"]), 2);
    assert_eq!(run(&["empty", "--N", "4", "--degree", "m+", "--mults", "m x2"]), 2);
    assert_eq!(run(&["bound", "--N", "4"]), 2);
    assert_eq!(run(&["check", "/nonexistent/cert.json"]), 2);
    assert_eq!(run(&["report", "--suite", "nonsense"]), 2);
}

#[test]
fn report_with_certs_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let certs = dir.path().join("certs");
    let (a, b) = (dir.path().join("a.md"), dir.path().join("b.md"));
    for out in [&a, &b] {
        let code = run(&[
            "report",
            "--suite",
            "p5-general",
            "--certs",
            certs.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--jobs",
            "2",
        ]);
        assert_eq!(code, 0);
    }
    let doc = fs::read_to_string(&a).unwrap();
    assert_eq!(doc, fs::read_to_string(&b).unwrap());
    assert!(doc.contains("| 5 | 125 |"));
    for entry in fs::read_dir(&certs).unwrap() {
        let text = fs::read_to_string(entry.unwrap().path()).unwrap();
        check_str(&text).unwrap();
    }
}

#[test]
fn bound_emit_and_store() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.json");
    let code = run(&["bound", "--N", "4", "--points", "67", "--emit", out.to_str().unwrap(), "--certs", dir.path().join("c").to_str().unwrap()]);
    assert_eq!(code, 0);
    let file = CertificateFile::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(file.claim["bound"], "12/5");
    assert!(dir.path().join("c").join(format!("{}.json", file.content_id())).exists());
}

#[test]
fn config_file_and_oracle_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("w.toml");
    fs::write(&cfg, "prime = 1000003\nseed = 7\nmax_columns = 500\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();
    assert_eq!(run(&["hilbert", "--N", "3", "--s", "5", "--d", "4", "--oracle", "--config", cfg_s]), 0);
    assert_eq!(run(&["oracle-validate", "--rule", "cremona", "--N", "2", "--trials", "40", "--config", cfg_s]), 0);
    assert_eq!(run(&["oracle-validate", "--rule", "ah", "--N", "3", "--s-max", "8", "--d-max", "4"]), 0);
    fs::write(&cfg, "colour = 3\n").unwrap();
    assert_eq!(run(&["hilbert", "--N", "3", "--s", "5", "--d", "4", "--config", cfg_s]), 2);
    assert_eq!(run(&["hilbert", "--N", "3", "--s", "5", "--d", "4", "--oracle", "--prime", "12"]), 2);
}
